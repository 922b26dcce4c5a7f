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

#include "sro/solvers.hpp"

#include "sro/errors.hpp"
#include "sro/format.hpp"

#include <cmath>
#include <ostream>

namespace sro {
namespace {

struct BatchEval {
    double value = 0.0;
    Vector grad_w;
    Vector grad_theta;
};

BatchEval evaluate(const GeneratorSpec& at, const Matrix& draws, const Vector& x,
                   const Vector& w, double lambda, bool want_theta) {
    const Matrix scenarios = forward_batch(at, draws, x);
    auto eval = evaluate_scenarios(w, scenarios, lambda, want_theta);
    BatchEval out;
    out.value = eval.value;
    out.grad_w = std::move(eval.grad_w);
    if (want_theta) out.grad_theta = vjp_theta_batch(at, draws, x, eval.grad_scenarios);
    return out;
}

void guard_finite(const BatchEval& e, long k) {
    if (!std::isfinite(e.value)) throw SolverError("non-finite objective", k);
    if (!e.grad_w.allFinite()) throw SolverError("non-finite decision gradient", k);
    if (e.grad_theta.size() && !e.grad_theta.allFinite()) {
        throw SolverError("non-finite generator gradient", k);
    }
}

Vector masked(const Vector& g, const std::optional<ParamBlock>& block) {
    if (!block) return g;
    Vector out = Vector::Zero(g.size());
    out.segment(block->offset, block->length) = g.segment(block->offset, block->length);
    return out;
}

void check_common(const GeneratorSpec& gen, const Vector& x, const DecisionProblem& problem,
                  const RobustConfig& cfg) {
    problem.validate();
    cfg.validate();
    if (gen.dims().output_dim != problem.n_assets) {
        throw ShapeError("generator output dimension: expected " +
                         std::to_string(problem.n_assets) + ", got " +
                         std::to_string(gen.dims().output_dim));
    }
    if (x.size() != gen.dims().context_dim) {
        throw ShapeError("context dimension: expected " +
                         std::to_string(gen.dims().context_dim) + ", got " +
                         std::to_string(x.size()));
    }
    if (cfg.block && cfg.block->offset + cfg.block->length > gen.parameter_count()) {
        throw ConfigError("perturbation block exceeds the parameter vector");
    }
}

PerturbationBall ball_of(const GeneratorSpec& gen, const RobustConfig& cfg) {
    return PerturbationBall{gen.theta(), cfg.rho, cfg.p};
}

Vector uniform_weights(Index d) { return Vector::Constant(d, 1.0 / static_cast<double>(d)); }

// Records w^(k) and steps it along the decision gradient.
class DecisionLoop {
public:
    DecisionLoop(Index d, const RobustConfig& cfg) : w_(uniform_weights(d)), cfg_(cfg) {
        trace_.objective.reserve(static_cast<std::size_t>(cfg.iterations));
        trace_.theta_distance.reserve(static_cast<std::size_t>(cfg.iterations));
    }

    const Vector& weights() const { return w_; }

    void step(long k, const BatchEval& at_decision, double theta_distance) {
        trace_.objective.push_back(at_decision.value);
        trace_.theta_distance.push_back(theta_distance);
        if (cfg_.snapshot_stride > 0 && k % cfg_.snapshot_stride == 0) {
            trace_.snapshot_iterations.push_back(k);
            trace_.snapshots.push_back(w_);
        }
        w_ = project_simplex(w_ + cfg_.alpha_omega * at_decision.grad_w);
    }

    SolveResult finish() {
        SolveResult out;
        out.weights = clean_weights(w_);
        out.trace = std::move(trace_);
        return out;
    }

private:
    Vector w_;
    const RobustConfig& cfg_;
    SolveTrace trace_;
};

}  // namespace

std::string_view to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::Nominal:
            return "nominal";
        case SolverKind::FirstOrder:
            return "first-order";
        case SolverKind::TwoTimescale:
            return "two-timescale";
    }
    return "unknown";
}

SolverKind solver_kind_from_string(std::string_view name) {
    if (name == "nominal") return SolverKind::Nominal;
    if (name == "first-order") return SolverKind::FirstOrder;
    if (name == "two-timescale") return SolverKind::TwoTimescale;
    throw ConfigError("unknown solver '" + std::string(name) + "'");
}

void RobustConfig::validate() const {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be finite and >= 0");
    if (!(p > 1.0)) throw UnsupportedExponent("perturbation norm needs p > 1");
    if (!(alpha_theta > 0.0) || !(alpha_omega > 0.0)) {
        throw ConfigError("step sizes must be positive");
    }
    if (!(alpha_theta < alpha_omega)) {
        throw ConfigError("two-timescale ordering requires alpha_theta < alpha_omega");
    }
    if (iterations < 1) throw ConfigError("iteration budget must be at least 1");
    if (inner_iterations < 0) throw ConfigError("inner iteration budget must be >= 0");
    if (batch_size < 1) throw ConfigError("latent batch size must be at least 1");
    if (snapshot_stride < 0) throw ConfigError("snapshot stride must be >= 0");
    if (block && (block->offset < 0 || block->length < 1)) {
        throw ConfigError("perturbation block must be a non-empty range");
    }
}

SolveResult solve_nominal(const GeneratorSpec& gen, const Vector& x,
                          const DecisionProblem& problem, const RobustConfig& cfg) {
    check_common(gen, x, problem, cfg);
    const auto batch = sample_batch(cfg.seed, cfg.batch_size, gen.dims().latent_dim);
    DecisionLoop loop(problem.n_assets, cfg);
    for (long k = 0; k < cfg.iterations; ++k) {
        const auto e = evaluate(gen, batch.draws, x, loop.weights(), problem.lambda, false);
        guard_finite(e, k);
        loop.step(k, e, 0.0);
    }
    return loop.finish();
}

SolveResult solve_sro_first_order(const GeneratorSpec& gen, const Vector& x,
                                  const DecisionProblem& problem, const RobustConfig& cfg) {
    check_common(gen, x, problem, cfg);
    const auto ball = ball_of(gen, cfg);
    const auto batch = sample_batch(cfg.seed, cfg.batch_size, gen.dims().latent_dim);
    const Vector& theta_hat = gen.theta();
    GeneratorSpec perturbed = gen;
    DecisionLoop loop(problem.n_assets, cfg);
    for (long k = 0; k < cfg.iterations; ++k) {
        const auto at_hat = evaluate(gen, batch.draws, x, loop.weights(), problem.lambda, true);
        guard_finite(at_hat, k);
        // The adversary lowers utility: maximise eps^T (-g) over the ball.
        const auto step = dual_norm_step(-masked(at_hat.grad_theta, cfg.block), ball);
        perturbed.set_theta(theta_hat + step.eps);
        const auto e = evaluate(perturbed, batch.draws, x, loop.weights(), problem.lambda, false);
        guard_finite(e, k);
        loop.step(k, e, lp_norm(step.eps, cfg.p));
    }
    return loop.finish();
}

SolveResult solve_sro_two_timescale(const GeneratorSpec& gen, const Vector& x,
                                    const DecisionProblem& problem, const RobustConfig& cfg) {
    check_common(gen, x, problem, cfg);
    const auto ball = ball_of(gen, cfg);
    if (!(std::isinf(cfg.p) || cfg.p == 2.0)) {
        throw UnsupportedExponent("two-timescale solver supports p = 2 and p = inf only");
    }
    const auto batch = sample_batch(cfg.seed, cfg.batch_size, gen.dims().latent_dim);
    const Vector& theta_hat = gen.theta();
    GeneratorSpec adversary = gen;
    DecisionLoop loop(problem.n_assets, cfg);
    for (long k = 0; k < cfg.iterations; ++k) {
        const auto at_theta =
            evaluate(adversary, batch.draws, x, loop.weights(), problem.lambda, true);
        guard_finite(at_theta, k);
        const Vector trial =
            adversary.theta() - cfg.alpha_theta * masked(at_theta.grad_theta, cfg.block);
        const Vector eps = project_ball(trial - theta_hat, ball);
        adversary.set_theta(theta_hat + eps);
        const auto e = evaluate(adversary, batch.draws, x, loop.weights(), problem.lambda, false);
        guard_finite(e, k);
        loop.step(k, e, lp_norm(eps, cfg.p));
    }
    auto out = loop.finish();
    out.adversary_theta = adversary.theta();
    return out;
}

SolveResult solve(SolverKind kind, const GeneratorSpec& gen, const Vector& x,
                  const DecisionProblem& problem, const RobustConfig& cfg) {
    switch (kind) {
        case SolverKind::Nominal:
            return solve_nominal(gen, x, problem, cfg);
        case SolverKind::FirstOrder:
            return solve_sro_first_order(gen, x, problem, cfg);
        case SolverKind::TwoTimescale:
            return solve_sro_two_timescale(gen, x, problem, cfg);
    }
    throw ConfigError("unknown solver kind");
}

InnerSolution worst_case_inner(const GeneratorSpec& gen, const Vector& x,
                               const DecisionProblem& problem, const Vector& w,
                               const RobustConfig& cfg) {
    check_common(gen, x, problem, cfg);
    check_weights(w, problem.n_assets);
    const auto ball = ball_of(gen, cfg);
    if (!(std::isinf(cfg.p) || cfg.p == 2.0)) {
        throw UnsupportedExponent("robust objective supports p = 2 and p = inf only");
    }
    const auto batch = sample_batch(cfg.seed, cfg.batch_size, gen.dims().latent_dim);
    const Vector& theta_hat = gen.theta();
    GeneratorSpec adversary = gen;

    InnerSolution best;
    for (long k = 0;; ++k) {
        const bool last = k == cfg.inner_iterations || cfg.rho == 0.0;
        const auto e = evaluate(adversary, batch.draws, x, w, problem.lambda, !last);
        guard_finite(e, k);
        if (k == 0 || e.value < best.value) {
            best.value = e.value;
            best.theta = adversary.theta();
        }
        if (last) break;
        const Vector trial = adversary.theta() - cfg.alpha_theta * masked(e.grad_theta, cfg.block);
        adversary.set_theta(theta_hat + project_ball(trial - theta_hat, ball));
    }
    return best;
}

double robust_objective(const GeneratorSpec& gen, const Vector& x,
                        const DecisionProblem& problem, const Vector& w,
                        const RobustConfig& cfg) {
    return worst_case_inner(gen, x, problem, w, cfg).value;
}

double nominal_objective(const GeneratorSpec& gen, const Vector& x,
                         const DecisionProblem& problem, const Vector& w,
                         const RobustConfig& cfg) {
    check_common(gen, x, problem, cfg);
    check_weights(w, problem.n_assets);
    const auto batch = sample_batch(cfg.seed, cfg.batch_size, gen.dims().latent_dim);
    return empirical_utility(w, forward_batch(gen, batch.draws, x), problem.lambda);
}

double sharpness(const GeneratorSpec& gen, const Vector& x, const DecisionProblem& problem,
                 const Vector& w, const RobustConfig& cfg) {
    return nominal_objective(gen, x, problem, w, cfg) -
           robust_objective(gen, x, problem, w, cfg);
}

void write_trace_csv(std::ostream& out, const SolveTrace& trace, Index n_assets) {
    out << "iteration,objective,theta_dist";
    for (Index j = 0; j < n_assets; ++j) out << ",w" << j;
    out << '\n';
    std::size_t snap = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        out << k << ',' << format_double(trace.objective[k]) << ','
            << format_double(trace.theta_distance[k]);
        const bool has_snapshot = snap < trace.snapshot_iterations.size() &&
                                  trace.snapshot_iterations[snap] == static_cast<long>(k);
        for (Index j = 0; j < n_assets; ++j) {
            out << ',';
            if (has_snapshot) out << format_double(trace.snapshots[snap](j));
        }
        if (has_snapshot) ++snap;
        out << '\n';
    }
}

}  // namespace sro
