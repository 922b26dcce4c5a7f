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

// Quadratic-utility portfolio objective.
//
// The decision maker maximizes u(pi) = pi - (lambda/2) pi^2 averaged over
// generated scenarios; the adversarial sampler minimizes the same quantity.
#pragma once

#include "sro/generator.hpp"

namespace sro {

inline constexpr double kDefaultRiskAversion = 10.0;

struct DecisionProblem {
    Index n_assets = 0;
    double lambda = kDefaultRiskAversion;

    /// Throws ConfigError unless lambda > 0 and n_assets >= 1.
    void validate() const;
};

inline constexpr double kSimplexSumTolerance = 1e-9;
inline constexpr double kSimplexNegativeTolerance = 1e-12;

/// Throws ShapeError/ConfigError if w is not on the long-only simplex.
void check_weights(const Vector& w, Index n_assets);

/// Clamps entries within tolerance of zero to exactly zero.
Vector clean_weights(const Vector& w);

double utility(double pi, double lambda);

/// Mean over scenario rows of u(row . w).
double empirical_utility(const Vector& w, const Matrix& scenarios, double lambda);

/// (1/N) sum_i (1 - lambda pi_i) r_i.
Vector grad_w(const Vector& w, const Matrix& scenarios, double lambda);

/// (1 - lambda y.w) w, the outcome gradient of u(y.w).
Vector grad_y(const Vector& w, const Vector& y, double lambda);

/// Value and both gradients of the empirical utility in one pass.
struct ScenarioEvaluation {
    double value = 0.0;
    Vector grad_w;
    Matrix grad_scenarios;  ///< row i = d/d r_i of the mean utility
};

ScenarioEvaluation evaluate_scenarios(const Vector& w, const Matrix& scenarios, double lambda,
                                      bool want_scenario_grad);

}  // namespace sro
