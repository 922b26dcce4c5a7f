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

// Parametric conditional samplers y = G_theta(z, x).
//
// Two generator families are provided. Both take an already-standardized
// context vector x (a flattened L x d window) and a latent draw z ~ N(0, I):
//
//   AffineGaussian:  core = A x + B z + c
//   MlpTanh:         core = W2 tanh(W1 [x; z] + b1) + b2
//
// All parameters live in one flat vector theta with a fixed order so that
// perturbation norms are reproducible. An optional output standardization
// (mean m, scale s, not part of theta) maps the core output back to return
// units: y = m + s .* core. Without it, y = core.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sro {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class GeneratorKind { AffineGaussian, MlpTanh };

std::string_view to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(std::string_view name);

struct GeneratorDims {
    Index context_dim = 0;  ///< flattened L*d window length
    Index latent_dim = 0;
    Index output_dim = 0;
    Index hidden_dim = 0;  ///< MlpTanh only; ignored for AffineGaussian

    bool operator==(const GeneratorDims&) const = default;
};

/// Per-asset affine map applied after the generator core.
struct Standardization {
    Vector mean;
    Vector scale;
};

/// Contiguous range of theta entries.
struct ParamBlock {
    Index offset = 0;
    Index length = 0;
};

Index parameter_count(GeneratorKind kind, const GeneratorDims& dims);

class GeneratorSpec {
public:
    GeneratorSpec(GeneratorKind kind, GeneratorDims dims, Vector theta,
                  std::optional<Standardization> scaling = std::nullopt);

    GeneratorKind kind() const noexcept { return kind_; }
    const GeneratorDims& dims() const noexcept { return dims_; }
    const Vector& theta() const noexcept { return theta_; }
    Index parameter_count() const noexcept { return theta_.size(); }
    const std::optional<Standardization>& scaling() const noexcept { return scaling_; }

    /// Same architecture and scaling, different parameters.
    GeneratorSpec with_theta(Vector theta) const;
    void set_theta(const Vector& theta);

private:
    GeneratorKind kind_;
    GeneratorDims dims_;
    Vector theta_;
    std::optional<Standardization> scaling_;
};

/// Unflattened AffineGaussian parameters. Flattening order: row-major A,
/// row-major B, then c.
struct AffineGaussianParams {
    Matrix A;  ///< d x context_dim
    Matrix B;  ///< d x latent_dim
    Vector c;  ///< d

    GeneratorDims dims() const;
    Vector flatten() const;
    static AffineGaussianParams unflatten(const GeneratorDims& dims, const Vector& theta);
    GeneratorSpec to_spec(std::optional<Standardization> scaling = std::nullopt) const;
};

/// Unflattened MlpTanh parameters. Flattening order: row-major W1, b1,
/// row-major W2, b2. W1 acts on the concatenation [x; z].
struct MlpTanhParams {
    Matrix W1;  ///< h x (context_dim + latent_dim)
    Vector b1;  ///< h
    Matrix W2;  ///< d x h
    Vector b2;  ///< d

    GeneratorDims dims(Index context_dim) const;
    Vector flatten() const;
    static MlpTanhParams unflatten(const GeneratorDims& dims, const Vector& theta);
    GeneratorSpec to_spec(Index context_dim,
                          std::optional<Standardization> scaling = std::nullopt) const;
};

inline constexpr Index kDefaultHiddenWidth = 8;

/// The c block of an AffineGaussian theta.
ParamBlock affine_offset_block(const GeneratorDims& dims);

/// Single-draw evaluation. z has latent_dim entries, x has context_dim.
Vector forward(const GeneratorSpec& spec, const Vector& z, const Vector& x);

/// Row i of the result is G_theta(draws.row(i), x).
Matrix forward_batch(const GeneratorSpec& spec, const Matrix& draws, const Vector& x);

/// upstream^T dG/dtheta for one draw.
Vector vjp_theta(const GeneratorSpec& spec, const Vector& z, const Vector& x,
                 const Vector& upstream);

/// Sum over rows i of upstream.row(i)^T dG(draws.row(i), x)/dtheta.
Vector vjp_theta_batch(const GeneratorSpec& spec, const Matrix& draws, const Vector& x,
                       const Matrix& upstream);

/// Fixed i.i.d. standard normal latent draws, one per row.
struct LatentBatch {
    Matrix draws;  ///< N x latent_dim
    std::uint64_t seed = 0;

    Index size() const noexcept { return draws.rows(); }
};

LatentBatch sample_batch(std::uint64_t seed, Index n, Index latent_dim);

struct AffineCalibration {
    AffineGaussianParams params;
    Index rows = 0;
    Index rank = 0;
    bool ridge_used = false;
    double ridge_penalty = 0.0;
};

inline constexpr double kCalibrationRidge = 1e-6;

/// Least-squares fit of targets (T x d) on contexts (T x F) with intercept.
/// B is a square-root factor of the residual covariance (Cholesky when
/// latent_dim >= d, otherwise the leading latent_dim eigen-directions).
AffineCalibration calibrate_affine(const Matrix& targets, const Matrix& contexts,
                                   Index latent_dim);

/// Xavier-normal initialisation for an MlpTanh generator.
MlpTanhParams synthesize_mlp(Index context_dim, Index latent_dim, Index output_dim,
                             Index hidden_dim, std::uint64_t seed, double gain = 1.0);

}  // namespace sro
