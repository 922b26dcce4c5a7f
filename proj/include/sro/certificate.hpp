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

// Reliability diagnostics for robust decisions.
//
// Everything here is in the utility convention: the robust criterion is the
// infimum of batch utility over the parameter ball, the slack of a decision
// is mu(w) = J*(w) - U(w) >= 0 under coverage, and the finite-sample
// certificate reads
//
//     J*(w) >= U_N(w) - epsilon_N + mu_bar.
#pragma once

#include "sro/generator.hpp"
#include "sro/geometry.hpp"
#include "sro/solvers.hpp"
#include "sro/utility.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace sro {

inline constexpr Index kDefaultOracleSamples = 100000;
inline constexpr Index kMinOracleSamples = 10000;
inline constexpr Index kDefaultSlackGrid = 64;
inline constexpr double kRegimeThreshold = 0.05;
inline constexpr double kDefaultReturnBound = 0.1;

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    Index samples = 0;
};

/// Monte Carlo estimate of E_z[u(G_oracle(z, x) . w)].
MonteCarloEstimate oracle_utility(const GeneratorSpec& oracle, const Vector& x,
                                  const DecisionProblem& problem, const Vector& w,
                                  Index n_oracle, std::uint64_t seed);

struct Gaps {
    double nominal = 0.0;  ///< J_N(w_nom; theta_hat) - J*(w_nom)
    double robust = 0.0;   ///< U_N(w_rob) - J*(w_rob)
};

Gaps gaps(double empirical_nominal, double oracle_nominal, double robust_value,
          double oracle_robust);

struct Coverage {
    bool covered = false;
    double distance = 0.0;  ///< ||theta* - theta_hat||_p
};

/// Parameter-proximity sufficient condition for distributional coverage.
Coverage coverage_check(const GeneratorSpec& oracle, const GeneratorSpec& nominal,
                        double rho, double p);

/// Deterministic decision grid: the d vertices, the barycentre, then seeded
/// uniform (flat Dirichlet) points until `size` is reached.
std::vector<Vector> simplex_grid(Index d, Index size, std::uint64_t seed);

struct SlackEstimate {
    double mu_bar = 0.0;     ///< min over the grid of J*(w) - U_N(w)
    double std_error = 0.0;  ///< MC standard error of J* at the minimiser
    Vector argmin;
    std::vector<double> pointwise;
    Coverage coverage;
};

struct SlackOptions {
    Index grid_size = kDefaultSlackGrid;
    std::uint64_t grid_seed = 0;
    Index n_oracle = kDefaultOracleSamples;
    std::uint64_t oracle_seed = 0;
    std::vector<Vector> extra_points;  ///< e.g. solver outputs
};

/// Grid estimate of the population slack. Reported value is an upper bound
/// on the infimum over the whole simplex.
SlackEstimate slack_estimate(const GeneratorSpec& oracle, const GeneratorSpec& nominal,
                             const Vector& x, const DecisionProblem& problem,
                             const RobustConfig& cfg, const SlackOptions& options);

/// As above with separate contexts (the generators may standardize
/// differently).
SlackEstimate slack_estimate(const GeneratorSpec& oracle, const Vector& x_oracle,
                             const GeneratorSpec& nominal, const Vector& x_nominal,
                             const DecisionProblem& problem, const RobustConfig& cfg,
                             const SlackOptions& options);

enum class Regime { Small, Moderate, Large };

std::string_view to_string(Regime regime);

Regime classify_regime(double mu_bar, double epsilon_n, double tau = kRegimeThreshold);

struct CertificateConstants {
    double lipschitz_outcome = 0.0;   ///< L_y
    double lipschitz_latent = 0.0;    ///< L_z
    double lipschitz_decision = 0.0;  ///< L_omega
    double cover_radius = 0.0;        ///< epsilon attaining the minimum
    double log_cover = 0.0;           ///< log N_W(epsilon)
    double epsilon_n = 0.0;
};

/// Finite-simulation term for an AffineGaussian generator:
///   L_y L_z sqrt(2 (log N_W(eps) + log(1/delta)) / N) + 2 L_omega eps,
/// minimised over a log-spaced eps grid (or at `cover_radius` when given),
/// with N_W(eps) <= (3/eps)^d. lambda = 0 (linear utility) is accepted here.
CertificateConstants certificate_constants(const GeneratorSpec& nominal, double lambda,
                                           double return_bound, double rho, double p,
                                           double delta, Index n_samples,
                                           std::optional<double> cover_radius = std::nullopt);

/// Lower certificate on the oracle utility: U_N - epsilon_N + mu_bar.
inline double certified_lower_bound(double robust_value, double epsilon_n, double mu_bar) {
    return robust_value - epsilon_n + mu_bar;
}

struct CertificateReport {
    double empirical_utility_nominal = 0.0;
    double robust_objective = 0.0;
    double oracle_utility_nominal = 0.0;
    double oracle_utility_robust = 0.0;
    double gap_nominal = 0.0;
    double gap_robust = 0.0;
    double oracle_std_error = 0.0;
    double slack_estimate = 0.0;
    double epsilon_n = 0.0;
    Regime regime = Regime::Small;
    bool coverage_flag = false;
    double coverage_distance = 0.0;
    Index n_oracle = 0;
};

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const CertificateReport& report);

}  // namespace sro
