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

// Constraint geometry for decisions (long-only simplex) and generator
// parameters (l_p balls around the fitted theta).
#pragma once

#include "sro/generator.hpp"

#include <limits>

namespace sro {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kBallTolerance = 1e-12;

/// Closed ball {theta : ||theta - center||_p <= radius}. A radius of zero is
/// the singleton {center}.
struct PerturbationBall {
    Vector center;
    double radius = 0.0;
    double p = 2.0;

    void validate() const;
};

/// ||v||_p for p >= 1 or p = inf.
double lp_norm(const Vector& v, double p);

/// Conjugate exponent q with 1/p + 1/q = 1 (p = inf gives q = 1).
double dual_exponent(double p);

/// Euclidean projection onto {w : sum w = 1, w >= 0} (sort-and-threshold).
Vector project_simplex(const Vector& v);

/// Projection of a perturbation onto the ball of radius ball.radius around
/// the origin. Only p = 2 (radial scaling) and p = inf (clamp) are supported.
Vector project_ball(const Vector& eps, const PerturbationBall& ball);

struct DualStep {
    Vector eps;
    double value = 0.0;  ///< max over the ball of eps^T g = radius ||g||_q
};

/// Closed-form maximiser of eps^T g over ||eps||_p <= radius, 1 < p <= inf.
DualStep dual_norm_step(const Vector& g, const PerturbationBall& ball);

bool ball_membership(const Vector& theta, const PerturbationBall& ball);

}  // namespace sro
