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

#pragma once

#include "sro/generator.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace sro::testing {

inline Vector random_vector(std::mt19937_64& rng, Index n, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, Index r, Index c, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
        for (Index j = 0; j < c; ++j) m(i, j) = normal(rng);
    }
    return m;
}

inline Vector random_simplex(std::mt19937_64& rng, Index d) {
    std::exponential_distribution<double> expo(1.0);
    Vector w(d);
    for (Index i = 0; i < d; ++i) w(i) = expo(rng);
    return w / w.sum();
}

inline GeneratorSpec random_affine(std::mt19937_64& rng, Index d, Index f, Index dz,
                                   double scale = 0.3) {
    AffineGaussianParams p;
    p.A = random_matrix(rng, d, f, scale);
    p.B = random_matrix(rng, d, dz, scale);
    p.c = random_vector(rng, d, scale);
    return p.to_spec();
}

inline GeneratorSpec random_mlp(std::mt19937_64& rng, Index d, Index f, Index dz, Index h) {
    GeneratorDims dims{f, dz, d, h};
    return GeneratorSpec(GeneratorKind::MlpTanh, dims,
                         random_vector(rng, parameter_count(GeneratorKind::MlpTanh, dims), 0.5));
}

/// max |a - b| / max(1, |b|) style relative error on vectors.
inline double rel_error(const Vector& a, const Vector& b) {
    const double denom = std::max(1e-8, std::max(a.norm(), b.norm()));
    return (a - b).norm() / denom;
}

}  // namespace sro::testing
