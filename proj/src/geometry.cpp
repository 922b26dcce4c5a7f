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

#include "sro/geometry.hpp"

#include "sro/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace sro {

void PerturbationBall::validate() const {
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
        throw ConfigError("ball radius must be finite and non-negative");
    }
    if (!(p >= 1.0)) throw UnsupportedExponent("ball exponent must satisfy p >= 1");
}

double lp_norm(const Vector& v, double p) {
    if (v.size() == 0) return 0.0;
    if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
    if (p == 2.0) return v.norm();
    if (p == 1.0) return v.cwiseAbs().sum();
    if (!(p > 1.0)) throw UnsupportedExponent("lp_norm needs p >= 1");
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return scale * std::pow((v.cwiseAbs() / scale).array().pow(p).sum(), 1.0 / p);
}

double dual_exponent(double p) {
    if (std::isinf(p)) return 1.0;
    if (!(p > 1.0)) throw UnsupportedExponent("dual exponent needs p > 1");
    return p / (p - 1.0);
}

Vector project_simplex(const Vector& v) {
    const Index n = v.size();
    if (n == 0) throw ShapeError("simplex projection of an empty vector");
    if (!v.allFinite()) throw ConfigError("simplex projection of a non-finite vector");

    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumsum = 0.0;
    double threshold = 0.0;
    for (Index i = 0; i < n; ++i) {
        cumsum += sorted[static_cast<std::size_t>(i)];
        const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (sorted[static_cast<std::size_t>(i)] - t > 0.0) threshold = t;
    }
    return (v.array() - threshold).cwiseMax(0.0).matrix();
}

Vector project_ball(const Vector& eps, const PerturbationBall& ball) {
    ball.validate();
    if (std::isinf(ball.p)) {
        return eps.cwiseMax(-ball.radius).cwiseMin(ball.radius);
    }
    if (ball.p != 2.0) {
        throw UnsupportedExponent("ball projection supports p = 2 and p = inf only, got p = " +
                                  std::to_string(ball.p));
    }
    const double norm = eps.norm();
    if (norm <= ball.radius) return eps;
    return eps * (ball.radius / norm);
}

DualStep dual_norm_step(const Vector& g, const PerturbationBall& ball) {
    ball.validate();
    if (!(ball.p > 1.0)) {
        throw UnsupportedExponent("dual step needs p > 1, got p = " + std::to_string(ball.p));
    }
    DualStep out;
    out.eps = Vector::Zero(g.size());
    const double scale = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (scale == 0.0 || ball.radius == 0.0) return out;

    if (std::isinf(ball.p)) {
        out.eps = ball.radius * g.array().sign().matrix();
        out.value = ball.radius * g.cwiseAbs().sum();
        return out;
    }
    if (ball.p == 2.0) {
        const double norm = g.norm();
        out.eps = g * (ball.radius / norm);
        out.value = ball.radius * norm;
        return out;
    }
    // Work with g / max|g| so |g|^(q-1) neither overflows nor underflows.
    const double q = dual_exponent(ball.p);
    const Vector unit = g / scale;
    const Eigen::ArrayXd mag = unit.cwiseAbs().array().pow(q - 1.0);
    const double norm_q = std::pow(unit.cwiseAbs().array().pow(q).sum(), 1.0 / q);
    out.eps = (ball.radius * unit.array().sign() * mag / std::pow(norm_q, q - 1.0)).matrix();
    out.value = ball.radius * scale * norm_q;
    return out;
}

bool ball_membership(const Vector& theta, const PerturbationBall& ball) {
    if (theta.size() != ball.center.size()) {
        throw ShapeError("ball membership: expected " + std::to_string(ball.center.size()) +
                         " parameters, got " + std::to_string(theta.size()));
    }
    return lp_norm(theta - ball.center, ball.p) <= ball.radius * (1.0 + kBallTolerance);
}

}  // namespace sro
