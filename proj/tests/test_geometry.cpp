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
#include "sro/geometry.hpp"

#include <gtest/gtest.h>

namespace sro {
namespace {

using testing::random_vector;

PerturbationBall ball(Index n, double rho, double p) { return {Vector::Zero(n), rho, p}; }

TEST(Simplex, Examples) {
    EXPECT_LT((project_simplex(Vector{{0.5, 0.5}}) - Vector{{0.5, 0.5}}).norm(), 1e-15);
    EXPECT_LT((project_simplex(Vector{{2.0, 0.0}}) - Vector{{1.0, 0.0}}).norm(), 1e-15);
    EXPECT_LT((project_simplex(Vector{{0.4, 0.4, 0.4}}) - Vector::Constant(3, 1.0 / 3)).norm(),
              1e-15);
    EXPECT_THROW(project_simplex(Vector(0)), ShapeError);
}

// Brute force over a grid on the simplex with step h.
double grid_distance(const Vector& v, double h) {
    const Index d = v.size();
    const int steps = static_cast<int>(std::lround(1.0 / h));
    double best = std::numeric_limits<double>::infinity();
    Vector w(d);
    std::function<void(Index, int)> rec = [&](Index j, int left) {
        if (j == d - 1) {
            w(j) = left * h;
            best = std::min(best, (w - v).squaredNorm());
            return;
        }
        for (int k = 0; k <= left; ++k) {
            w(j) = k * h;
            rec(j + 1, left - k);
        }
    };
    rec(0, steps);
    return std::sqrt(best);
}

TEST(Simplex, MatchesGridSearch) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const Index d = 2 + trial % 2;  // d = 2, 3 at step 1e-3
        const Vector v = random_vector(rng, d, 0.8);
        const Vector w = project_simplex(v);
        EXPECT_LE((w - v).norm(), grid_distance(v, 1e-3) + 1e-12);
        EXPECT_NEAR(w.sum(), 1.0, 1e-12);
        EXPECT_GE(w.minCoeff(), 0.0);
    }
}

TEST(Simplex, Idempotent) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const Vector w = project_simplex(random_vector(rng, 5));
        EXPECT_LT((project_simplex(w) - w).norm(), 1e-12);
    }
}

TEST(Ball, ProjectionExamples) {
    const Vector inside{{0.1, 0.2}};
    EXPECT_EQ(project_ball(inside, ball(2, 1.0, 2.0)), inside);
    EXPECT_LT((project_ball(Vector{{3.0, 4.0}}, ball(2, 1.0, 2.0)) - Vector{{0.6, 0.8}}).norm(),
              1e-15);
    EXPECT_EQ(project_ball(Vector{{0.5, -0.9}}, ball(2, 0.3, kInf)), (Vector{{0.3, -0.3}}));
}

TEST(Ball, UnsupportedExponent) {
    EXPECT_THROW(project_ball(Vector{{1.0, 1.0}}, ball(2, 1.0, 3.0)), UnsupportedExponent);
}

TEST(Ball, Nonexpansive) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto b = ball(4, 0.5, 2.0);
        const Vector a = random_vector(rng, 4);
        const Vector c = random_vector(rng, 4);
        EXPECT_LE((project_ball(a, b) - project_ball(c, b)).norm(), (a - c).norm() + 1e-15);
    }
}

TEST(Ball, ZeroRadiusIsCenter) {
    EXPECT_EQ(project_ball(Vector{{1.0, -2.0}}, ball(2, 0.0, 2.0)), Vector::Zero(2));
    EXPECT_THROW((PerturbationBall{Vector::Zero(2), -0.1, 2.0}.validate()), ConfigError);
}

TEST(DualStep, Examples) {
    const auto s2 = dual_norm_step(Vector{{3.0, 4.0}}, ball(2, 0.5, 2.0));
    EXPECT_LT((s2.eps - Vector{{0.3, 0.4}}).norm(), 1e-15);
    EXPECT_NEAR(s2.value, 2.5, 1e-15);

    const auto si = dual_norm_step(Vector{{1.0, -2.0}}, ball(2, 1.0, kInf));
    EXPECT_EQ(si.eps, (Vector{{1.0, -1.0}}));
    EXPECT_NEAR(si.value, 3.0, 1e-15);

    const auto s0 = dual_norm_step(Vector::Zero(3), ball(3, 1.0, 2.0));
    EXPECT_EQ(s0.eps, Vector::Zero(3));
    EXPECT_EQ(s0.value, 0.0);
}

TEST(DualStep, BoxVertexEnumeration) {
    // p = inf: the maximiser is a vertex of the box; enumerate all of them.
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector g = random_vector(rng, 4);
        const auto s = dual_norm_step(g, ball(4, 0.7, kInf));
        double best = -1.0;
        for (int mask = 0; mask < 16; ++mask) {
            Vector v(4);
            for (int j = 0; j < 4; ++j) v(j) = (mask >> j & 1) ? 0.7 : -0.7;
            best = std::max(best, v.dot(g));
        }
        EXPECT_NEAR(s.eps.dot(g), best, 1e-12);
    }
}

TEST(DualStep, RejectsPAtMostOne) {
    EXPECT_THROW(dual_norm_step(Vector{{1.0, 2.0}}, ball(2, 1.0, 1.0)), std::invalid_argument);
}

TEST(DualStep, AttainsRadiusAndValue) {
    std::mt19937_64 rng(5);
    for (double p : {1.5, 2.0, 3.0, kInf}) {
        for (int trial = 0; trial < 50; ++trial) {
            const Vector g = random_vector(rng, 6);
            const auto s = dual_norm_step(g, ball(6, 0.4, p));
            EXPECT_NEAR(lp_norm(s.eps, p), 0.4, 1e-9);
            EXPECT_NEAR(s.eps.dot(g), s.value, 1e-12);
            EXPECT_NEAR(s.value, 0.4 * lp_norm(g, dual_exponent(p)), 1e-12);
        }
    }
}

TEST(Norms, Basics) {
    const Vector v{{3.0, -4.0}};
    EXPECT_NEAR(lp_norm(v, 2.0), 5.0, 1e-15);
    EXPECT_NEAR(lp_norm(v, 1.0), 7.0, 1e-15);
    EXPECT_EQ(lp_norm(v, kInf), 4.0);
    EXPECT_EQ(dual_exponent(2.0), 2.0);
    EXPECT_EQ(dual_exponent(kInf), 1.0);
    EXPECT_NEAR(dual_exponent(3.0), 1.5, 1e-15);
}

TEST(Membership, Boundary) {
    const PerturbationBall b{Vector{{1.0, 1.0}}, 0.5, 2.0};
    EXPECT_TRUE(ball_membership(b.center, b));
    EXPECT_TRUE(ball_membership(b.center + Vector{{0.3, 0.4}}, b));
    EXPECT_FALSE(ball_membership(b.center + 1.01 * Vector{{0.3, 0.4}}, b));
}

}  // namespace
}  // namespace sro
