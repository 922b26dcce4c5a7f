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

// Decision procedures over a fixed latent batch:
//
//   solve_nominal            projected utility ascent at the fitted theta
//   solve_sro_first_order    ascent against the first-order worst-case
//                            perturbation (closed-form dual-norm step)
//   solve_sro_two_timescale  alternating projected descent (slow adversary,
//                            theta) and ascent (fast decision, w)
//
// All three start from uniform weights and share the same decision step,
// so rho = 0 reproduces the nominal trajectory exactly.
#pragma once

#include "sro/generator.hpp"
#include "sro/geometry.hpp"
#include "sro/utility.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace sro {

enum class SolverKind { Nominal, FirstOrder, TwoTimescale };

std::string_view to_string(SolverKind kind);
SolverKind solver_kind_from_string(std::string_view name);

struct RobustConfig {
    double rho = 0.3;
    double p = 2.0;
    double alpha_theta = 0.001;
    double alpha_omega = 0.1;
    long iterations = 12000;
    Index batch_size = 1000;
    std::uint64_t seed = 0;
    long inner_iterations = 2000;  ///< adversary steps used by robust_objective
    long snapshot_stride = 100;    ///< 0 disables decision snapshots
    /// Restrict perturbations to this slice of theta; the rest stays at theta-hat.
    std::optional<ParamBlock> block;

    void validate() const;
};

struct SolveTrace {
    std::vector<double> objective;       ///< J_B at the point used for the decision step
    std::vector<double> theta_distance;  ///< ||theta_k - theta_hat||_p of that point
    std::vector<long> snapshot_iterations;
    std::vector<Vector> snapshots;  ///< decision iterate w^(k) at each snapshot

    std::size_t size() const noexcept { return objective.size(); }
};

struct SolveResult {
    Vector weights;
    SolveTrace trace;
    std::optional<Vector> adversary_theta;  ///< two-timescale only
};

SolveResult solve_nominal(const GeneratorSpec& gen, const Vector& x,
                          const DecisionProblem& problem, const RobustConfig& cfg);

SolveResult solve_sro_first_order(const GeneratorSpec& gen, const Vector& x,
                                  const DecisionProblem& problem, const RobustConfig& cfg);

SolveResult solve_sro_two_timescale(const GeneratorSpec& gen, const Vector& x,
                                    const DecisionProblem& problem, const RobustConfig& cfg);

SolveResult solve(SolverKind kind, const GeneratorSpec& gen, const Vector& x,
                  const DecisionProblem& problem, const RobustConfig& cfg);

/// Result of the frozen-decision adversary loop.
struct InnerSolution {
    double value = 0.0;  ///< smallest batch utility seen, theta-hat included
    Vector theta;        ///< parameter attaining it
};

/// Worst-case (minimum) batch utility over the ball for a fixed decision,
/// approximated by cfg.inner_iterations projected descent steps from theta-hat.
InnerSolution worst_case_inner(const GeneratorSpec& gen, const Vector& x,
                               const DecisionProblem& problem, const Vector& w,
                               const RobustConfig& cfg);

double robust_objective(const GeneratorSpec& gen, const Vector& x,
                        const DecisionProblem& problem, const Vector& w,
                        const RobustConfig& cfg);

/// Batch utility at theta-hat with the latent batch drawn from cfg.seed.
double nominal_objective(const GeneratorSpec& gen, const Vector& x,
                         const DecisionProblem& problem, const Vector& w,
                         const RobustConfig& cfg);

/// nominal_objective - robust_objective (non-negative by construction).
double sharpness(const GeneratorSpec& gen, const Vector& x, const DecisionProblem& problem,
                 const Vector& w, const RobustConfig& cfg);

/// iteration,objective,theta_dist,w0..w{d-1}; weight columns are filled on
/// snapshot rows and left empty elsewhere.
void write_trace_csv(std::ostream& out, const SolveTrace& trace, Index n_assets);

}  // namespace sro
