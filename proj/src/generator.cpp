// Copyright 2026 The sro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sro/generator.hpp"

#include "sro/errors.hpp"

#include <cmath>
#include <random>
#include <utility>

namespace sro {
namespace {

using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

void expect_size(std::string_view axis, Index expected, Index actual) {
    if (expected != actual) {
        throw ShapeError(std::string(axis) + ": expected " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
    }
}

void check_dims(GeneratorKind kind, const GeneratorDims& dims) {
    if (dims.context_dim < 0 || dims.latent_dim < 1 || dims.output_dim < 1) {
        throw ShapeError("generator dims must have latent_dim >= 1, output_dim >= 1 and "
                         "context_dim >= 0");
    }
    if (kind == GeneratorKind::MlpTanh && dims.hidden_dim < 1) {
        throw ShapeError("hidden_dim: MlpTanh needs at least one hidden unit");
    }
}

// Core output (before standardization) for every row of draws.
Matrix core_batch(const GeneratorSpec& spec, const Matrix& draws, const Vector& x) {
    const auto& dims = spec.dims();
    const double* t = spec.theta().data();
    const Index d = dims.output_dim;
    const Index f = dims.context_dim;
    const Index dz = dims.latent_dim;

    if (spec.kind() == GeneratorKind::AffineGaussian) {
        ConstRowMap A(t, d, f);
        ConstRowMap B(t + d * f, d, dz);
        Eigen::Map<const Vector> c(t + d * f + d * dz, d);
        const Vector mean = A * x + c;
        Matrix y = draws * B.transpose();
        y.rowwise() += mean.transpose();
        return y;
    }

    const Index h = dims.hidden_dim;
    ConstRowMap W1(t, h, f + dz);
    Eigen::Map<const Vector> b1(t + h * (f + dz), h);
    ConstRowMap W2(t + h * (f + dz) + h, d, h);
    Eigen::Map<const Vector> b2(t + h * (f + dz) + h + d * h, d);

    const Vector pre_context = W1.leftCols(f) * x + b1;
    Matrix hidden = draws * W1.rightCols(dz).transpose();
    hidden.rowwise() += pre_context.transpose();
    hidden = hidden.array().tanh().matrix();
    Matrix y = hidden * W2.transpose();
    y.rowwise() += b2.transpose();
    return y;
}

void check_inputs(const GeneratorSpec& spec, const Matrix& draws, const Vector& x) {
    expect_size("latent dimension", spec.dims().latent_dim, draws.cols());
    expect_size("context dimension", spec.dims().context_dim, x.size());
}

}  // namespace

std::string_view to_string(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::AffineGaussian:
            return "affine_gaussian";
        case GeneratorKind::MlpTanh:
            return "mlp_tanh";
    }
    return "unknown";
}

GeneratorKind generator_kind_from_string(std::string_view name) {
    if (name == "affine_gaussian") return GeneratorKind::AffineGaussian;
    if (name == "mlp_tanh") return GeneratorKind::MlpTanh;
    throw DataError("unknown generator kind '" + std::string(name) + "'");
}

Index parameter_count(GeneratorKind kind, const GeneratorDims& dims) {
    const Index d = dims.output_dim;
    const Index f = dims.context_dim;
    const Index dz = dims.latent_dim;
    if (kind == GeneratorKind::AffineGaussian) return d * f + d * dz + d;
    const Index h = dims.hidden_dim;
    return h * (f + dz) + h + d * h + d;
}

GeneratorSpec::GeneratorSpec(GeneratorKind kind, GeneratorDims dims, Vector theta,
                             std::optional<Standardization> scaling)
    : kind_(kind), dims_(dims), theta_(std::move(theta)), scaling_(std::move(scaling)) {
    check_dims(kind_, dims_);
    if (kind_ == GeneratorKind::AffineGaussian) dims_.hidden_dim = 0;
    expect_size("theta length", sro::parameter_count(kind_, dims_), theta_.size());
    if (scaling_) {
        expect_size("scaling mean", dims_.output_dim, scaling_->mean.size());
        expect_size("scaling scale", dims_.output_dim, scaling_->scale.size());
    }
}

GeneratorSpec GeneratorSpec::with_theta(Vector theta) const {
    return GeneratorSpec(kind_, dims_, std::move(theta), scaling_);
}

void GeneratorSpec::set_theta(const Vector& theta) {
    expect_size("theta length", theta_.size(), theta.size());
    theta_ = theta;
}

GeneratorDims AffineGaussianParams::dims() const {
    return GeneratorDims{A.cols(), B.cols(), c.size(), 0};
}

Vector AffineGaussianParams::flatten() const {
    const Index d = c.size();
    expect_size("A rows", d, A.rows());
    expect_size("B rows", d, B.rows());
    Vector theta(parameter_count(GeneratorKind::AffineGaussian, dims()));
    RowMap(theta.data(), d, A.cols()) = A;
    RowMap(theta.data() + A.size(), d, B.cols()) = B;
    theta.tail(d) = c;
    return theta;
}

AffineGaussianParams AffineGaussianParams::unflatten(const GeneratorDims& dims,
                                                     const Vector& theta) {
    expect_size("theta length", parameter_count(GeneratorKind::AffineGaussian, dims),
                theta.size());
    const Index d = dims.output_dim;
    const Index f = dims.context_dim;
    const Index dz = dims.latent_dim;
    AffineGaussianParams p;
    p.A = ConstRowMap(theta.data(), d, f);
    p.B = ConstRowMap(theta.data() + d * f, d, dz);
    p.c = theta.tail(d);
    return p;
}

GeneratorSpec AffineGaussianParams::to_spec(std::optional<Standardization> scaling) const {
    return GeneratorSpec(GeneratorKind::AffineGaussian, dims(), flatten(), std::move(scaling));
}

GeneratorDims MlpTanhParams::dims(Index context_dim) const {
    return GeneratorDims{context_dim, W1.cols() - context_dim, b2.size(), b1.size()};
}

Vector MlpTanhParams::flatten() const {
    const Index h = b1.size();
    const Index d = b2.size();
    expect_size("W1 rows", h, W1.rows());
    expect_size("W2 rows", d, W2.rows());
    expect_size("W2 cols", h, W2.cols());
    Vector theta(W1.size() + h + W2.size() + d);
    Index at = 0;
    RowMap(theta.data(), h, W1.cols()) = W1;
    at += W1.size();
    theta.segment(at, h) = b1;
    at += h;
    RowMap(theta.data() + at, d, h) = W2;
    at += W2.size();
    theta.segment(at, d) = b2;
    return theta;
}

MlpTanhParams MlpTanhParams::unflatten(const GeneratorDims& dims, const Vector& theta) {
    expect_size("theta length", parameter_count(GeneratorKind::MlpTanh, dims), theta.size());
    const Index h = dims.hidden_dim;
    const Index in = dims.context_dim + dims.latent_dim;
    const Index d = dims.output_dim;
    MlpTanhParams p;
    Index at = 0;
    p.W1 = ConstRowMap(theta.data(), h, in);
    at += h * in;
    p.b1 = theta.segment(at, h);
    at += h;
    p.W2 = ConstRowMap(theta.data() + at, d, h);
    at += d * h;
    p.b2 = theta.segment(at, d);
    return p;
}

GeneratorSpec MlpTanhParams::to_spec(Index context_dim,
                                     std::optional<Standardization> scaling) const {
    return GeneratorSpec(GeneratorKind::MlpTanh, dims(context_dim), flatten(),
                         std::move(scaling));
}

ParamBlock affine_offset_block(const GeneratorDims& dims) {
    const Index d = dims.output_dim;
    return ParamBlock{d * dims.context_dim + d * dims.latent_dim, d};
}

Matrix forward_batch(const GeneratorSpec& spec, const Matrix& draws, const Vector& x) {
    check_inputs(spec, draws, x);
    Matrix y = core_batch(spec, draws, x);
    if (const auto& s = spec.scaling()) {
        y = (y.array().rowwise() * s->scale.transpose().array()).matrix();
        y.rowwise() += s->mean.transpose();
    }
    return y;
}

Vector forward(const GeneratorSpec& spec, const Vector& z, const Vector& x) {
    return forward_batch(spec, z.transpose(), x).row(0).transpose();
}

Vector vjp_theta_batch(const GeneratorSpec& spec, const Matrix& draws, const Vector& x,
                       const Matrix& upstream) {
    check_inputs(spec, draws, x);
    expect_size("upstream rows", draws.rows(), upstream.rows());
    expect_size("upstream output dimension", spec.dims().output_dim, upstream.cols());

    const auto& dims = spec.dims();
    const Index d = dims.output_dim;
    const Index f = dims.context_dim;
    const Index dz = dims.latent_dim;

    Matrix core_up = upstream;
    if (const auto& s = spec.scaling()) {
        core_up = (core_up.array().rowwise() * s->scale.transpose().array()).matrix();
    }
    const Vector up_sum = core_up.colwise().sum().transpose();

    Vector grad(spec.parameter_count());
    double* g = grad.data();

    if (spec.kind() == GeneratorKind::AffineGaussian) {
        RowMap(g, d, f) = up_sum * x.transpose();
        RowMap(g + d * f, d, dz) = core_up.transpose() * draws;
        grad.tail(d) = up_sum;
        return grad;
    }

    const Index h = dims.hidden_dim;
    const double* t = spec.theta().data();
    ConstRowMap W1(t, h, f + dz);
    Eigen::Map<const Vector> b1(t + h * (f + dz), h);
    ConstRowMap W2(t + h * (f + dz) + h, d, h);

    const Vector pre_context = W1.leftCols(f) * x + b1;
    Matrix hidden = draws * W1.rightCols(dz).transpose();
    hidden.rowwise() += pre_context.transpose();
    hidden = hidden.array().tanh().matrix();

    // delta = (core_up W2) .* (1 - tanh^2)
    const Matrix delta =
        ((core_up * W2).array() * (1.0 - hidden.array().square())).matrix();
    const Vector delta_sum = delta.colwise().sum().transpose();

    RowMap gW1(g, h, f + dz);
    gW1.leftCols(f) = delta_sum * x.transpose();
    gW1.rightCols(dz) = delta.transpose() * draws;
    Index at = h * (f + dz);
    grad.segment(at, h) = delta_sum;
    at += h;
    RowMap(g + at, d, h) = core_up.transpose() * hidden;
    at += d * h;
    grad.segment(at, d) = up_sum;
    return grad;
}

Vector vjp_theta(const GeneratorSpec& spec, const Vector& z, const Vector& x,
                 const Vector& upstream) {
    return vjp_theta_batch(spec, z.transpose(), x, upstream.transpose());
}

LatentBatch sample_batch(std::uint64_t seed, Index n, Index latent_dim) {
    if (n < 1) throw ConfigError("latent batch size must be at least 1");
    if (latent_dim < 1) throw ShapeError("latent dimension must be at least 1");
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    LatentBatch batch;
    batch.seed = seed;
    batch.draws.resize(n, latent_dim);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < latent_dim; ++j) batch.draws(i, j) = normal(engine);
    }
    return batch;
}

AffineCalibration calibrate_affine(const Matrix& targets, const Matrix& contexts,
                                   Index latent_dim) {
    expect_size("context rows", targets.rows(), contexts.rows());
    if (latent_dim < 1) throw ShapeError("latent dimension must be at least 1");
    const Index rows = targets.rows();
    const Index d = targets.cols();
    const Index f = contexts.cols();
    if (rows < latent_dim + f + 10) {
        throw DataError("calibration needs at least " + std::to_string(latent_dim + f + 10) +
                        " rows, got " + std::to_string(rows));
    }
    if (!targets.allFinite() || !contexts.allFinite()) {
        throw DataError("calibration inputs contain non-finite values");
    }

    Matrix design(rows, f + 1);
    design.leftCols(f) = contexts;
    design.col(f).setOnes();

    AffineCalibration out;
    out.rows = rows;
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    out.rank = qr.rank();
    Matrix coef;
    if (out.rank < f + 1) {
        out.ridge_used = true;
        out.ridge_penalty = kCalibrationRidge;
        Matrix gram = design.transpose() * design;
        gram.diagonal().array() += kCalibrationRidge;
        coef = gram.ldlt().solve(design.transpose() * targets);
    } else {
        coef = qr.solve(targets);
    }

    out.params.A = coef.topRows(f).transpose();
    out.params.c = coef.row(f).transpose();

    const Matrix resid = targets - design * coef;
    const Matrix cov = (resid.transpose() * resid) / static_cast<double>(rows);

    out.params.B = Matrix::Zero(d, latent_dim);
    bool factored = false;
    if (latent_dim >= d) {
        Eigen::LLT<Matrix> llt(cov);
        if (llt.info() == Eigen::Success) {
            out.params.B.leftCols(d) = llt.matrixL();
            factored = true;
        }
    }
    if (!factored) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
        const Index keep = std::min(d, latent_dim);
        for (Index k = 0; k < keep; ++k) {
            const Index src = d - 1 - k;  // eigenvalues ascend
            const double lambda = std::max(eig.eigenvalues()(src), 0.0);
            out.params.B.col(k) = eig.eigenvectors().col(src) * std::sqrt(lambda);
        }
    }
    return out;
}

MlpTanhParams synthesize_mlp(Index context_dim, Index latent_dim, Index output_dim,
                             Index hidden_dim, std::uint64_t seed, double gain) {
    check_dims(GeneratorKind::MlpTanh,
               GeneratorDims{context_dim, latent_dim, output_dim, hidden_dim});
    std::mt19937_64 engine(seed);
    const auto xavier = [&](Index fan_out, Index fan_in) {
        std::normal_distribution<double> normal(
            0.0, gain * std::sqrt(2.0 / static_cast<double>(fan_in + fan_out)));
        Matrix m(fan_out, fan_in);
        for (Index i = 0; i < fan_out; ++i)
            for (Index j = 0; j < fan_in; ++j) m(i, j) = normal(engine);
        return m;
    };
    MlpTanhParams p;
    p.W1 = xavier(hidden_dim, context_dim + latent_dim);
    p.b1 = Vector::Zero(hidden_dim);
    p.W2 = xavier(output_dim, hidden_dim);
    p.b2 = Vector::Zero(output_dim);
    return p;
}

}  // namespace sro
