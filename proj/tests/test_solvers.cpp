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
#include "sro/solvers.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace sro {
namespace {

using testing::random_affine;
using testing::random_mlp;
using testing::random_simplex;
using testing::random_vector;

GeneratorSpec constant_generator(const Vector& c, Index f = 2, Index dz = 2) {
    AffineGaussianParams p;
    p.A = Matrix::Zero(c.size(), f);
    p.B = Matrix::Zero(c.size(), dz);
    p.c = c;
    return p.to_spec();
}

RobustConfig small_config(double rho = 0.3, long k = 300) {
    RobustConfig cfg;
    cfg.rho = rho;
    cfg.iterations = k;
    cfg.batch_size = 64;
    cfg.inner_iterations = 400;
    cfg.alpha_theta = 0.005;
    cfg.seed = 11;
    cfg.snapshot_stride = 50;
    return cfg;
}

TEST(Config, Validation) {
    RobustConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.alpha_theta = 0.2;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = RobustConfig{};
    cfg.iterations = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = RobustConfig{};
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = RobustConfig{};
    cfg.p = 1.0;
    EXPECT_THROW(cfg.validate(), UnsupportedExponent);
    EXPECT_EQ(solver_kind_from_string("two-timescale"), SolverKind::TwoTimescale);
    EXPECT_THROW(solver_kind_from_string("sgd"), ConfigError);
}

TEST(Nominal, ConstantGeneratorPicksBestAsset) {
    const auto gen = constant_generator(Vector{{0.02, -0.05}});
    const auto res = solve_nominal(gen, Vector::Zero(2), {2, 10.0}, small_config());
    EXPECT_NEAR(res.weights(0), 1.0, 1e-12);
    EXPECT_NEAR(res.weights(1), 0.0, 1e-12);
    EXPECT_NEAR(res.trace.objective.back(), 0.018, 1e-12);
}

TEST(Nominal, IdenticalColumnsSymmetric) {
    std::mt19937_64 rng(1);
    AffineGaussianParams p;
    p.A = Matrix::Zero(2, 3);
    p.B = Matrix::Zero(2, 2);
    p.B.row(0) = random_vector(rng, 2, 0.05).transpose();
    p.B.row(1) = p.B.row(0);
    p.c = Vector::Constant(2, 0.01);
    const auto gen = p.to_spec();
    const auto cfg = small_config();
    const DecisionProblem problem{2, 10.0};
    const auto res = solve_nominal(gen, Vector::Zero(3), problem, cfg);
    EXPECT_NEAR(nominal_objective(gen, Vector::Zero(3), problem, res.weights, cfg),
                nominal_objective(gen, Vector::Zero(3), problem, Vector::Constant(2, 0.5), cfg),
                1e-9);
}

TEST(Nominal, SingleAsset) {
    const auto gen = constant_generator(Vector{{0.01}});
    const auto res = solve_nominal(gen, Vector::Zero(2), {1, 10.0}, small_config(0.3, 5));
    EXPECT_EQ(res.weights, Vector::Ones(1));
}

TEST(Nominal, MonotoneOnAffine) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const auto gen = random_affine(rng, 4, 6, 3, 0.05);
        const auto res = solve_nominal(gen, random_vector(rng, 6), {4, 10.0}, small_config());
        for (std::size_t k = 1; k < res.trace.size(); ++k) {
            EXPECT_GE(res.trace.objective[k], res.trace.objective[k - 1] - 1e-8);
        }
    }
}

TEST(Nominal, NonFiniteAbortsWithIteration) {
    const auto gen = constant_generator(Vector{{std::nan(""), 0.0}});
    try {
        solve_nominal(gen, Vector::Zero(2), {2, 10.0}, small_config());
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_EQ(e.iteration(), 0);
    }
}

TEST(Solvers, ZeroRadiusIsNominalBitwise) {
    std::mt19937_64 rng(3);
    for (const auto& gen : {random_affine(rng, 3, 4, 2, 0.1), random_mlp(rng, 3, 4, 2, 5)}) {
        const Vector x = random_vector(rng, 4);
        const auto cfg = small_config(0.0, 200);
        const auto nom = solve_nominal(gen, x, {3, 10.0}, cfg);
        for (auto kind : {SolverKind::FirstOrder, SolverKind::TwoTimescale}) {
            const auto sro = solve(kind, gen, x, {3, 10.0}, cfg);
            EXPECT_EQ(sro.weights, nom.weights);
            EXPECT_EQ(sro.trace.objective, nom.trace.objective);
            EXPECT_EQ(sro.trace.snapshots, nom.trace.snapshots);
        }
        const auto tt = solve_sro_two_timescale(gen, x, {3, 10.0}, cfg);
        EXPECT_EQ(*tt.adversary_theta, gen.theta());
    }
}

TEST(FirstOrder, ConstantGeneratorIsConservative) {
    const auto gen = constant_generator(Vector{{0.02, 0.01, -0.01}});
    const DecisionProblem problem{3, 10.0};
    const auto cfg = small_config(0.05);
    const auto nom = solve_nominal(gen, Vector::Zero(2), problem, cfg);
    const auto sro = solve_sro_first_order(gen, Vector::Zero(2), problem, cfg);
    EXPECT_LE(sro.trace.objective.back(), nom.trace.objective.back());
    // every trace point sits on the sphere of radius rho
    for (double dist : sro.trace.theta_distance) EXPECT_NEAR(dist, 0.05, 1e-12);
}

TEST(FirstOrder, ZeroGradientBranch) {
    // B = 0 and every scenario return equals 1/lambda: grad_y vanishes.
    const auto gen = constant_generator(Vector::Constant(2, 0.1));
    const auto res = solve_sro_first_order(gen, Vector::Zero(2), {2, 10.0}, small_config(0.3, 3));
    for (double dist : res.trace.theta_distance) EXPECT_EQ(dist, 0.0);
}

TEST(FirstOrder, GeneralExponents) {
    std::mt19937_64 rng(4);
    const auto gen = random_affine(rng, 3, 4, 2, 0.1);
    const Vector x = random_vector(rng, 4);
    for (double p : {1.5, 3.0, kInf}) {
        auto cfg = small_config(0.1, 20);
        cfg.p = p;
        const auto res = solve_sro_first_order(gen, x, {3, 10.0}, cfg);
        EXPECT_NEAR(res.weights.sum(), 1.0, 1e-12);
        for (double dist : res.trace.theta_distance) EXPECT_LE(dist, 0.1 * (1 + 1e-9));
    }
}

TEST(TwoTimescale, SingleIteration) {
    std::mt19937_64 rng(5);
    const auto gen = random_affine(rng, 2, 3, 2, 0.1);
    const auto res = solve_sro_two_timescale(gen, random_vector(rng, 3), {2, 10.0},
                                             small_config(0.3, 1));
    EXPECT_EQ(res.trace.size(), 1u);
    EXPECT_EQ(res.trace.snapshot_iterations, std::vector<long>{0});
}

TEST(TwoTimescale, FeasibleThroughout) {
    std::mt19937_64 rng(6);
    for (double p : {2.0, kInf}) {
        const auto gen = random_mlp(rng, 3, 4, 2, 5);
        auto cfg = small_config(0.05, 400);
        cfg.p = p;
        cfg.alpha_theta = 0.05;
        const auto res = solve_sro_two_timescale(gen, random_vector(rng, 4), {3, 10.0}, cfg);
        for (double dist : res.trace.theta_distance) EXPECT_LE(dist, 0.05 * (1 + 1e-12));
        for (const auto& w : res.trace.snapshots) {
            EXPECT_NEAR(w.sum(), 1.0, 1e-12);
            EXPECT_GE(w.minCoeff(), -1e-12);
        }
        EXPECT_TRUE(ball_membership(*res.adversary_theta, {gen.theta(), 0.05, p}));
    }
}

TEST(TwoTimescale, RejectsUnsupportedExponent) {
    std::mt19937_64 rng(7);
    const auto gen = random_affine(rng, 2, 3, 2);
    auto cfg = small_config();
    cfg.p = 3.0;
    EXPECT_THROW(solve_sro_two_timescale(gen, Vector::Zero(3), {2, 10.0}, cfg),
                 UnsupportedExponent);
}

TEST(Solvers, Deterministic) {
    std::mt19937_64 rng(8);
    const auto gen = random_mlp(rng, 3, 4, 2, 5);
    const Vector x = random_vector(rng, 4);
    for (auto kind : {SolverKind::Nominal, SolverKind::FirstOrder, SolverKind::TwoTimescale}) {
        const auto a = solve(kind, gen, x, {3, 10.0}, small_config());
        const auto b = solve(kind, gen, x, {3, 10.0}, small_config());
        EXPECT_EQ(a.weights, b.weights);
        EXPECT_EQ(a.trace.objective, b.trace.objective);
        EXPECT_EQ(a.trace.theta_distance, b.trace.theta_distance);
    }
}

TEST(Solvers, ShapeMismatch) {
    std::mt19937_64 rng(9);
    const auto gen = random_affine(rng, 2, 3, 2);
    EXPECT_THROW(solve_nominal(gen, Vector::Zero(4), {2, 10.0}, small_config()), ShapeError);
    EXPECT_THROW(solve_nominal(gen, Vector::Zero(3), {3, 10.0}, small_config()), ShapeError);
}

TEST(Robust, ZeroRadiusEqualsNominal) {
    std::mt19937_64 rng(10);
    const auto gen = random_affine(rng, 3, 4, 2, 0.1);
    const Vector x = random_vector(rng, 4);
    const Vector w = random_simplex(rng, 3);
    const auto cfg = small_config(0.0);
    EXPECT_EQ(robust_objective(gen, x, {3, 10.0}, w, cfg),
              nominal_objective(gen, x, {3, 10.0}, w, cfg));
    EXPECT_EQ(sharpness(gen, x, {3, 10.0}, w, cfg), 0.0);
}

TEST(Robust, ConservativeAndMonotone) {
    std::mt19937_64 rng(11);
    const auto gen = random_mlp(rng, 3, 4, 2, 5);
    const Vector x = random_vector(rng, 4);
    const DecisionProblem problem{3, 10.0};
    for (int trial = 0; trial < 10; ++trial) {
        const Vector w = random_simplex(rng, 3);
        const double nominal = nominal_objective(gen, x, problem, w, small_config());
        double previous = nominal;
        for (double rho : {0.05, 0.1, 0.2, 0.3}) {
            const auto cfg = small_config(rho);
            const double robust = robust_objective(gen, x, problem, w, cfg);
            EXPECT_LE(robust, nominal + 1e-12);
            EXPECT_LE(robust, previous + 1e-12);
            EXPECT_NEAR(nominal - sharpness(gen, x, problem, w, cfg), robust, 1e-12);
            previous = robust;
        }
    }
}

// Minimum of the batch utility over c-shifts with ||dc||_2 <= rho: the shift
// enters every scenario return through delta = w . dc, |delta| <= rho ||w||.
double c_block_oracle(const GeneratorSpec& gen, const Vector& x, const Vector& w, double lambda,
                      const RobustConfig& cfg) {
    const auto batch = sample_batch(cfg.seed, cfg.batch_size, gen.dims().latent_dim);
    const Vector pi = forward_batch(gen, batch.draws, x) * w;
    auto value = [&](double delta) {
        double s = 0.0;
        for (Index i = 0; i < pi.size(); ++i) s += utility(pi(i) + delta, lambda);
        return s / static_cast<double>(pi.size());
    };
    const double reach = cfg.rho * w.norm();
    return std::min(value(-reach), value(reach));
}

TEST(Robust, ConstantGeneratorCBlockOracle) {
    const auto gen = constant_generator(Vector{{0.01, 0.02, -0.01}});
    std::mt19937_64 rng(12);
    auto cfg = small_config(0.05);
    cfg.block = affine_offset_block(gen.dims());
    cfg.inner_iterations = 2000;
    cfg.alpha_theta = 0.05;
    for (int trial = 0; trial < 5; ++trial) {
        const Vector w = random_simplex(rng, 3);
        const double oracle = c_block_oracle(gen, Vector::Zero(2), w, 10.0, cfg);
        const double got = robust_objective(gen, Vector::Zero(2), {3, 10.0}, w, cfg);
        EXPECT_NEAR(got, oracle, 0.01 * std::abs(oracle));
        const double nominal = nominal_objective(gen, Vector::Zero(2), {3, 10.0}, w, cfg);
        EXPECT_NEAR(sharpness(gen, Vector::Zero(2), {3, 10.0}, w, cfg), nominal - oracle,
                    0.01 * std::abs(nominal - oracle));
    }
}

TEST(Robust, BlockLeavesRestFixed) {
    std::mt19937_64 rng(13);
    const auto gen = random_affine(rng, 3, 4, 2, 0.1);
    auto cfg = small_config(0.2);
    const auto block = affine_offset_block(gen.dims());
    cfg.block = block;
    const auto inner = worst_case_inner(gen, random_vector(rng, 4), {3, 10.0},
                                        random_simplex(rng, 3), cfg);
    const Index head = block.offset;
    EXPECT_EQ(inner.theta.head(head), gen.theta().head(head));
}

TEST(Trace, CsvLayout) {
    std::mt19937_64 rng(14);
    const auto gen = random_affine(rng, 2, 3, 2, 0.1);
    auto cfg = small_config(0.1, 3);
    cfg.snapshot_stride = 2;
    const auto res = solve_sro_two_timescale(gen, random_vector(rng, 3), {2, 10.0}, cfg);
    std::ostringstream out;
    write_trace_csv(out, res.trace, 2);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "iteration,objective,theta_dist,w0,w1");
    std::getline(in, line);
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
    EXPECT_NE(line.back(), ',');  // snapshot row has weights
    std::getline(in, line);
    EXPECT_EQ(line.substr(line.size() - 2), ",,");  // no snapshot at k = 1
}

}  // namespace
}  // namespace sro
