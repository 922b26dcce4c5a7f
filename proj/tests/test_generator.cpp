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

#include "support.hpp"

#include "sro/errors.hpp"
#include "sro/generator.hpp"
#include "sro/generator_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace sro {
namespace {

using testing::random_affine;
using testing::random_matrix;
using testing::random_mlp;
using testing::random_vector;
using testing::rel_error;

GeneratorSpec affine_identity(const Vector& c) {
    AffineGaussianParams p;
    p.A = Matrix::Zero(2, 3);
    p.B = Matrix::Identity(2, 2);
    p.c = c;
    return p.to_spec();
}

TEST(Forward, AffineIdentityMap) {
    const auto gen = affine_identity(Vector::Zero(2));
    const Vector y = forward(gen, Vector{{0.3, -0.1}}, Vector::Zero(3));
    EXPECT_EQ(y(0), 0.3);
    EXPECT_EQ(y(1), -0.1);
}

TEST(Forward, AffineConstantShift) {
    const auto gen = affine_identity(Vector::Ones(2));
    const Vector y = forward(gen, Vector::Zero(2), Vector::Zero(3));
    EXPECT_EQ(y, Vector::Ones(2));
}

TEST(Forward, MlpZeroParametersGiveZero) {
    std::mt19937_64 rng(1);
    GeneratorDims dims{4, 3, 2, kDefaultHiddenWidth};
    GeneratorSpec gen(GeneratorKind::MlpTanh, dims,
                      Vector::Zero(parameter_count(GeneratorKind::MlpTanh, dims)));
    const Vector y = forward(gen, random_vector(rng, 3), random_vector(rng, 4));
    EXPECT_EQ(y, Vector::Zero(2));
}

TEST(Forward, AffineMatchesDefinition) {
    std::mt19937_64 rng(2);
    const auto gen = random_affine(rng, 3, 5, 4);
    const auto p = AffineGaussianParams::unflatten(gen.dims(), gen.theta());
    const Vector z = random_vector(rng, 4);
    const Vector x = random_vector(rng, 5);
    const Vector expected = p.A * x + p.B * z + p.c;
    EXPECT_LT((forward(gen, z, x) - expected).norm(), 1e-14);
}

TEST(Forward, MlpMatchesDefinition) {
    std::mt19937_64 rng(3);
    const auto gen = random_mlp(rng, 2, 4, 3, 5);
    const auto p = MlpTanhParams::unflatten(gen.dims(), gen.theta());
    const Vector z = random_vector(rng, 3);
    const Vector x = random_vector(rng, 4);
    Vector in(7);
    in << x, z;
    const Vector expected = p.W2 * (p.W1 * in + p.b1).array().tanh().matrix() + p.b2;
    EXPECT_LT((forward(gen, z, x) - expected).norm(), 1e-14);
}

TEST(Forward, ScalingAppliedAfterCore) {
    std::mt19937_64 rng(4);
    auto core = random_affine(rng, 2, 3, 2);
    Standardization s{Vector{{0.01, -0.02}}, Vector{{2.0, 0.5}}};
    GeneratorSpec scaled(core.kind(), core.dims(), core.theta(), s);
    const Vector z = random_vector(rng, 2);
    const Vector x = random_vector(rng, 3);
    const Vector expected = s.mean + s.scale.cwiseProduct(forward(core, z, x));
    EXPECT_LT((forward(scaled, z, x) - expected).norm(), 1e-15);
}

TEST(Forward, DeterministicBitIdentical) {
    std::mt19937_64 rng(5);
    const auto gen = random_mlp(rng, 3, 6, 2, 8);
    const Vector z = random_vector(rng, 2);
    const Vector x = random_vector(rng, 6);
    EXPECT_EQ(forward(gen, z, x), forward(gen, z, x));
}

TEST(Forward, BatchRowsMatchSingleDraws) {
    std::mt19937_64 rng(6);
    for (const auto& gen : {random_affine(rng, 3, 4, 2), random_mlp(rng, 3, 4, 2, 5)}) {
        const Matrix draws = random_matrix(rng, 7, 2);
        const Vector x = random_vector(rng, 4);
        const Matrix batch = forward_batch(gen, draws, x);
        for (Index i = 0; i < draws.rows(); ++i) {
            EXPECT_LT((batch.row(i).transpose() - forward(gen, draws.row(i).transpose(), x)).norm(),
                      1e-13);
        }
    }
}

TEST(Forward, ShapeErrorsNameAxis) {
    std::mt19937_64 rng(7);
    const auto gen = random_affine(rng, 2, 3, 2);
    try {
        forward(gen, Vector::Zero(3), Vector::Zero(3));
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("latent"), std::string::npos) << e.what();
    }
    try {
        forward(gen, Vector::Zero(2), Vector::Zero(4));
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("context"), std::string::npos) << e.what();
    }
}

TEST(Spec, RejectsWrongThetaLength) {
    GeneratorDims dims{3, 2, 2, 0};
    EXPECT_THROW(GeneratorSpec(GeneratorKind::AffineGaussian, dims, Vector::Zero(5)), ShapeError);
    EXPECT_EQ(parameter_count(GeneratorKind::AffineGaussian, dims), 2 * 3 + 2 * 2 + 2);
    GeneratorDims mlp{3, 2, 2, 4};
    EXPECT_EQ(parameter_count(GeneratorKind::MlpTanh, mlp), 4 * 5 + 4 + 2 * 4 + 2);
}

TEST(Params, AffineFlattenRoundTrip) {
    std::mt19937_64 rng(8);
    const auto gen = random_affine(rng, 3, 5, 2);
    const auto p = AffineGaussianParams::unflatten(gen.dims(), gen.theta());
    EXPECT_EQ(p.flatten(), gen.theta());
    // row-major order: theta[1] is A(0, 1)
    EXPECT_EQ(gen.theta()(1), p.A(0, 1));
    EXPECT_EQ(gen.theta()(5), p.A(1, 0));
    EXPECT_EQ(gen.theta()(15), p.B(0, 0));
    EXPECT_EQ(gen.theta()(16), p.B(0, 1));
    EXPECT_EQ(gen.theta()(21), p.c(0));
}

TEST(Params, MlpFlattenRoundTrip) {
    std::mt19937_64 rng(9);
    const auto gen = random_mlp(rng, 2, 3, 2, 4);
    const auto p = MlpTanhParams::unflatten(gen.dims(), gen.theta());
    EXPECT_EQ(p.flatten(), gen.theta());
    EXPECT_EQ(gen.theta()(1), p.W1(0, 1));
    EXPECT_EQ(gen.theta()(20), p.b1(0));
}

TEST(Params, OffsetBlockLocatesC) {
    std::mt19937_64 rng(10);
    const auto gen = random_affine(rng, 3, 4, 2);
    const auto block = affine_offset_block(gen.dims());
    const auto p = AffineGaussianParams::unflatten(gen.dims(), gen.theta());
    EXPECT_EQ(block.length, 3);
    EXPECT_EQ(gen.theta().segment(block.offset, block.length), p.c);
}

TEST(Vjp, AffineUnitExample) {
    const auto gen = affine_identity(Vector::Zero(2));
    const Vector g = vjp_theta(gen, Vector{{1.0, 0.0}}, Vector::Zero(3), Vector{{1.0, 0.0}});
    ASSERT_EQ(g.size(), 12);
    EXPECT_EQ(g.segment(0, 6), Vector::Zero(6));   // A block
    EXPECT_EQ(g.segment(6, 4), (Vector{{1.0, 0.0, 0.0, 0.0}}));  // B rows
    EXPECT_EQ(g.segment(10, 2), (Vector{{1.0, 0.0}}));            // c
}

TEST(Vjp, MlpAtZeroParameters) {
    std::mt19937_64 rng(11);
    GeneratorDims dims{3, 2, 2, 4};
    GeneratorSpec gen(GeneratorKind::MlpTanh, dims,
                      Vector::Zero(parameter_count(GeneratorKind::MlpTanh, dims)));
    const Vector up = random_vector(rng, 2);
    const Vector g = vjp_theta(gen, random_vector(rng, 2), random_vector(rng, 3), up);
    const Index w2 = 4 * 5 + 4;
    EXPECT_EQ(g.segment(w2, 8), Vector::Zero(8));
    EXPECT_EQ(g.tail(2), up);
}

// Central finite differences of upstream . forward in every theta direction.
Vector fd_vjp(const GeneratorSpec& gen, const Vector& z, const Vector& x, const Vector& up,
              double h) {
    Vector out(gen.parameter_count());
    for (Index k = 0; k < gen.parameter_count(); ++k) {
        Vector tp = gen.theta();
        Vector tm = gen.theta();
        tp(k) += h;
        tm(k) -= h;
        out(k) = (up.dot(forward(gen.with_theta(tp), z, x)) -
                  up.dot(forward(gen.with_theta(tm), z, x))) /
                 (2.0 * h);
    }
    return out;
}

TEST(Vjp, MatchesFiniteDifferencesAffine) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const auto gen = random_affine(rng, 3, 4, 2);
        const Vector z = random_vector(rng, 2);
        const Vector x = random_vector(rng, 4);
        const Vector up = random_vector(rng, 3);
        EXPECT_LT(rel_error(vjp_theta(gen, z, x, up), fd_vjp(gen, z, x, up, 1e-6)), 1e-5);
    }
}

TEST(Vjp, MatchesFiniteDifferencesMlp) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const auto gen = random_mlp(rng, 2, 4, 3, 5);
        const Vector z = random_vector(rng, 3);
        const Vector x = random_vector(rng, 4);
        const Vector up = random_vector(rng, 2);
        EXPECT_LT(rel_error(vjp_theta(gen, z, x, up), fd_vjp(gen, z, x, up, 1e-6)), 1e-4);
    }
}

TEST(Vjp, BatchIsSumOfSingles) {
    std::mt19937_64 rng(14);
    for (const auto& gen : {random_affine(rng, 3, 4, 2), random_mlp(rng, 3, 4, 2, 5)}) {
        const Matrix draws = random_matrix(rng, 6, 2);
        const Matrix up = random_matrix(rng, 6, 3);
        const Vector x = random_vector(rng, 4);
        Vector sum = Vector::Zero(gen.parameter_count());
        for (Index i = 0; i < 6; ++i) {
            sum += vjp_theta(gen, draws.row(i).transpose(), x, up.row(i).transpose());
        }
        EXPECT_LT(rel_error(vjp_theta_batch(gen, draws, x, up), sum), 1e-12);
    }
}

TEST(Vjp, ScalingEntersThroughUpstream) {
    std::mt19937_64 rng(15);
    auto core = random_affine(rng, 2, 3, 2);
    Standardization s{Vector{{0.1, 0.2}}, Vector{{3.0, 0.5}}};
    GeneratorSpec scaled(core.kind(), core.dims(), core.theta(), s);
    const Vector z = random_vector(rng, 2);
    const Vector x = random_vector(rng, 3);
    const Vector up = random_vector(rng, 2);
    EXPECT_LT(rel_error(vjp_theta(scaled, z, x, up), fd_vjp(scaled, z, x, up, 1e-6)), 1e-6);
}

TEST(Lipschitz, AffineInLatent) {
    std::mt19937_64 rng(16);
    const auto gen = random_affine(rng, 3, 4, 5);
    const auto p = AffineGaussianParams::unflatten(gen.dims(), gen.theta());
    const double lb = Eigen::JacobiSVD<Matrix>(p.B).singularValues()(0);
    const Vector x = random_vector(rng, 4);
    for (int i = 0; i < 100; ++i) {
        const Vector z1 = random_vector(rng, 5);
        const Vector z2 = random_vector(rng, 5);
        EXPECT_LE((forward(gen, z1, x) - forward(gen, z2, x)).norm(),
                  lb * (z1 - z2).norm() * (1 + 1e-12));
    }
}

TEST(Batch, Deterministic) {
    const auto a = sample_batch(42, 5, 8);
    const auto b = sample_batch(42, 5, 8);
    EXPECT_EQ(a.draws, b.draws);
    EXPECT_EQ(a.seed, 42u);
    EXPECT_EQ(a.size(), 5);
    EXPECT_NE(a.draws, sample_batch(43, 5, 8).draws);
}

TEST(Batch, MomentsWithinClt) {
    const auto b = sample_batch(7, 100000, 1);
    const double mean = b.draws.mean();
    const double var = (b.draws.array() - mean).square().sum() / (b.size() - 1);
    EXPECT_LT(std::abs(mean), 0.013);
    // std error of the sample variance is sqrt(2/N)
    EXPECT_LT(std::abs(var - 1.0), 4.0 * std::sqrt(2.0 / 100000));
}

TEST(Batch, RejectsEmpty) { EXPECT_THROW(sample_batch(1, 0, 3), std::invalid_argument); }

TEST(Calibrate, RecoversKnownAffineModel) {
    std::mt19937_64 rng(17);
    const Index d = 3;
    const Index f = 4;
    AffineGaussianParams truth;
    truth.A = random_matrix(rng, d, f, 0.5);
    truth.B = random_matrix(rng, d, d, 0.3);
    truth.c = random_vector(rng, d, 1.0);
    const Index t = 10000;
    const Matrix x = random_matrix(rng, t, f);
    const Matrix z = random_matrix(rng, t, d);
    Matrix y = (x * truth.A.transpose() + z * truth.B.transpose()).rowwise() +
               truth.c.transpose();
    const auto fit = calibrate_affine(y, x, d);
    EXPECT_FALSE(fit.ridge_used);
    EXPECT_LT((fit.params.A - truth.A).norm() / truth.A.norm(), 0.05);
    EXPECT_LT((fit.params.c - truth.c).norm() / truth.c.norm(), 0.05);
    const Matrix cov_fit = fit.params.B * fit.params.B.transpose();
    const Matrix cov_true = truth.B * truth.B.transpose();
    EXPECT_LT((cov_fit - cov_true).norm() / cov_true.norm(), 0.1);
}

TEST(Calibrate, DeterministicTargetGivesZeroB) {
    std::mt19937_64 rng(18);
    const Matrix x = random_matrix(rng, 200, 3);
    const Matrix a = random_matrix(rng, 2, 3);
    const Matrix y = x * a.transpose();
    const auto fit = calibrate_affine(y, x, 2);
    EXPECT_LT(fit.params.B.norm(), 1e-6);
    EXPECT_LT((fit.params.A - a).norm(), 1e-8);
}

TEST(Calibrate, ConstantTargetGivesIntercept) {
    std::mt19937_64 rng(19);
    const Matrix x = random_matrix(rng, 300, 4);
    const Vector m{{0.02, -0.01}};
    const Matrix y = Matrix::Ones(300, 1) * m.transpose();
    const auto fit = calibrate_affine(y, x, 2);
    EXPECT_LT((fit.params.c - m).norm(), 1e-10);
    EXPECT_LT(fit.params.A.norm(), 1e-10);
}

TEST(Calibrate, RankDeficientUsesRidge) {
    std::mt19937_64 rng(20);
    Matrix x = random_matrix(rng, 100, 3);
    x.col(2) = x.col(0);  // collinear design
    const Matrix y = random_matrix(rng, 100, 2);
    const auto fit = calibrate_affine(y, x, 2);
    EXPECT_TRUE(fit.ridge_used);
    EXPECT_EQ(fit.ridge_penalty, kCalibrationRidge);
    EXPECT_TRUE(fit.params.A.allFinite());
}

TEST(Calibrate, FewerLatentsThanOutputs) {
    std::mt19937_64 rng(21);
    const Matrix x = random_matrix(rng, 500, 2);
    const Matrix y = random_matrix(rng, 500, 3);
    const auto fit = calibrate_affine(y, x, 1);
    EXPECT_EQ(fit.params.B.cols(), 1);
    EXPECT_TRUE(fit.params.B.allFinite());
}

TEST(Calibrate, RejectsTooFewRows) {
    std::mt19937_64 rng(22);
    const Matrix x = random_matrix(rng, 15, 4);
    const Matrix y = random_matrix(rng, 15, 2);
    EXPECT_THROW(calibrate_affine(y, x, 2), DataError);
}

TEST(Io, JsonRoundTrip) {
    std::mt19937_64 rng(23);
    auto core = random_mlp(rng, 2, 4, 3, 5);
    GeneratorSpec gen(core.kind(), core.dims(), core.theta(),
                      Standardization{Vector{{0.1, 0.2}}, Vector{{1.5, 2.5}}});
    const auto back = generator_from_json(generator_to_json(gen));
    EXPECT_EQ(back.kind(), gen.kind());
    EXPECT_EQ(back.dims(), gen.dims());
    EXPECT_EQ(back.theta(), gen.theta());
    ASSERT_TRUE(back.scaling().has_value());
    EXPECT_EQ(back.scaling()->scale, gen.scaling()->scale);

    const auto path = std::filesystem::temp_directory_path() / "sro_gen_roundtrip.json";
    save_generator(gen, path);
    EXPECT_EQ(load_generator(path).theta(), gen.theta());
    std::filesystem::remove(path);
}

TEST(Io, RejectsThetaLengthMismatch) {
    std::mt19937_64 rng(24);
    auto doc = generator_to_json(random_affine(rng, 2, 3, 2));
    doc["theta"].erase(doc["theta"].size() - 1);
    EXPECT_THROW(generator_from_json(doc), DataError);
}

TEST(Synthesize, MlpXavierShapes) {
    const auto p = synthesize_mlp(6, 2, 3, 8, 5);
    EXPECT_EQ(p.W1.rows(), 8);
    EXPECT_EQ(p.W1.cols(), 8);
    EXPECT_EQ(p.W2.rows(), 3);
    EXPECT_EQ(p.b1, Vector::Zero(8));
    EXPECT_EQ(p.flatten(), synthesize_mlp(6, 2, 3, 8, 5).flatten());
}

}  // namespace
}  // namespace sro
