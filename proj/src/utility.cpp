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

#include "sro/utility.hpp"

#include "sro/errors.hpp"

#include <cmath>

namespace sro {

void DecisionProblem::validate() const {
    if (n_assets < 1) throw ConfigError("decision problem needs at least one asset");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("risk aversion lambda must be positive and finite");
    }
}

void check_weights(const Vector& w, Index n_assets) {
    if (w.size() != n_assets) {
        throw ShapeError("weights: expected " + std::to_string(n_assets) + ", got " +
                         std::to_string(w.size()));
    }
    if (!w.allFinite()) throw ConfigError("weights contain non-finite entries");
    if (std::abs(w.sum() - 1.0) > kSimplexSumTolerance || w.minCoeff() < -kSimplexNegativeTolerance) {
        throw ConfigError("weights are not on the long-only simplex");
    }
}

Vector clean_weights(const Vector& w) {
    Vector out = w;
    for (Index j = 0; j < out.size(); ++j) {
        if (out(j) < 0.0 && out(j) >= -kSimplexNegativeTolerance) out(j) = 0.0;
    }
    return out;
}

double utility(double pi, double lambda) { return pi - 0.5 * lambda * pi * pi; }

ScenarioEvaluation evaluate_scenarios(const Vector& w, const Matrix& scenarios, double lambda,
                                      bool want_scenario_grad) {
    if (scenarios.rows() == 0) throw ShapeError("scenario set is empty");
    if (scenarios.cols() != w.size()) {
        throw ShapeError("scenario columns: expected " + std::to_string(w.size()) + ", got " +
                         std::to_string(scenarios.cols()));
    }
    const double inv_n = 1.0 / static_cast<double>(scenarios.rows());
    const Vector pi = scenarios * w;
    const Vector slope = (1.0 - lambda * pi.array()).matrix() * inv_n;

    ScenarioEvaluation out;
    out.value = (pi.array() - 0.5 * lambda * pi.array().square()).sum() * inv_n;
    out.grad_w = scenarios.transpose() * slope;
    if (want_scenario_grad) out.grad_scenarios = slope * w.transpose();
    return out;
}

double empirical_utility(const Vector& w, const Matrix& scenarios, double lambda) {
    return evaluate_scenarios(w, scenarios, lambda, false).value;
}

Vector grad_w(const Vector& w, const Matrix& scenarios, double lambda) {
    return evaluate_scenarios(w, scenarios, lambda, false).grad_w;
}

Vector grad_y(const Vector& w, const Vector& y, double lambda) {
    if (y.size() != w.size()) {
        throw ShapeError("outcome: expected " + std::to_string(w.size()) + ", got " +
                         std::to_string(y.size()));
    }
    return (1.0 - lambda * y.dot(w)) * w;
}

}  // namespace sro
