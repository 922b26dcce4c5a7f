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

#include "sro/certificate.hpp"

#include "sro/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sro {

MonteCarloEstimate oracle_utility(const GeneratorSpec& oracle, const Vector& x,
                                  const DecisionProblem& problem, const Vector& w,
                                  Index n_oracle, std::uint64_t seed) {
    problem.validate();
    check_weights(w, problem.n_assets);
    if (n_oracle < kMinOracleSamples) {
        throw ConfigError("oracle utility needs at least " + std::to_string(kMinOracleSamples) +
                          " samples");
    }
    const auto batch = sample_batch(seed, n_oracle, oracle.dims().latent_dim);
    const Vector pi = forward_batch(oracle, batch.draws, x) * w;

    // Shift by the first draw so a degenerate sampler gives exact zero spread.
    const double u0 = utility(pi(0), problem.lambda);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (Index i = 0; i < pi.size(); ++i) {
        const double du = utility(pi(i), problem.lambda) - u0;
        sum += du;
        sum_sq += du * du;
    }
    const double n = static_cast<double>(n_oracle);
    const double mean_shift = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean_shift * mean_shift) / (n - 1.0));

    MonteCarloEstimate out;
    out.mean = u0 + mean_shift;
    out.std_error = std::sqrt(var / n);
    out.samples = n_oracle;
    return out;
}

Gaps gaps(double empirical_nominal, double oracle_nominal, double robust_value,
          double oracle_robust) {
    return Gaps{empirical_nominal - oracle_nominal, robust_value - oracle_robust};
}

Coverage coverage_check(const GeneratorSpec& oracle, const GeneratorSpec& nominal,
                        double rho, double p) {
    if (oracle.kind() != nominal.kind()) {
        throw ConfigError("coverage check needs generators of the same kind");
    }
    if (!(oracle.dims() == nominal.dims())) {
        throw ShapeError("coverage check needs generators with identical dims");
    }
    Coverage out;
    out.distance = lp_norm(oracle.theta() - nominal.theta(), p);
    out.covered = out.distance <= rho * (1.0 + kBallTolerance);
    return out;
}

std::vector<Vector> simplex_grid(Index d, Index size, std::uint64_t seed) {
    if (d < 1) throw ShapeError("simplex grid needs d >= 1");
    std::vector<Vector> grid;
    for (Index j = 0; j < d && static_cast<Index>(grid.size()) < size; ++j) {
        grid.push_back(Vector::Unit(d, j));
    }
    if (d > 1 && static_cast<Index>(grid.size()) < size) {
        grid.push_back(Vector::Constant(d, 1.0 / static_cast<double>(d)));
    }
    std::mt19937_64 engine(seed);
    std::exponential_distribution<double> expo(1.0);
    while (static_cast<Index>(grid.size()) < size) {
        Vector v(d);
        for (Index j = 0; j < d; ++j) v(j) = expo(engine);
        grid.push_back(v / v.sum());
    }
    return grid;
}

SlackEstimate slack_estimate(const GeneratorSpec& oracle, const GeneratorSpec& nominal,
                             const Vector& x, const DecisionProblem& problem,
                             const RobustConfig& cfg, const SlackOptions& options) {
    return slack_estimate(oracle, x, nominal, x, problem, cfg, options);
}

SlackEstimate slack_estimate(const GeneratorSpec& oracle, const Vector& x_oracle,
                             const GeneratorSpec& nominal, const Vector& x_nominal,
                             const DecisionProblem& problem, const RobustConfig& cfg,
                             const SlackOptions& options) {
    SlackEstimate out;
    out.coverage = coverage_check(oracle, nominal, cfg.rho, cfg.p);

    auto points = simplex_grid(problem.n_assets, options.grid_size, options.grid_seed);
    points.insert(points.end(), options.extra_points.begin(), options.extra_points.end());
    out.pointwise.reserve(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        const Vector w = clean_weights(points[k]);
        const auto star = oracle_utility(oracle, x_oracle, problem, w, options.n_oracle,
                                         options.oracle_seed);
        const double mu = star.mean - robust_objective(nominal, x_nominal, problem, w, cfg);
        out.pointwise.push_back(mu);
        if (k == 0 || mu < out.mu_bar) {
            out.mu_bar = mu;
            out.std_error = star.std_error;
            out.argmin = w;
        }
    }
    return out;
}

std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::Small:
            return "small";
        case Regime::Moderate:
            return "moderate";
        case Regime::Large:
            return "large";
    }
    return "unknown";
}

Regime classify_regime(double mu_bar, double epsilon_n, double tau) {
    if (!(epsilon_n > 0.0)) throw ConfigError("regime classification needs epsilon_N > 0");
    if (mu_bar >= epsilon_n) return Regime::Large;
    if (mu_bar <= tau * epsilon_n) return Regime::Small;
    return Regime::Moderate;
}

CertificateConstants certificate_constants(const GeneratorSpec& nominal, double lambda,
                                           double return_bound, double rho, double p,
                                           double delta, Index n_samples,
                                           std::optional<double> cover_radius) {
    if (nominal.kind() != GeneratorKind::AffineGaussian) {
        throw ConfigError("certificate constants are only derived for AffineGaussian generators");
    }
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (!(return_bound > 0.0)) throw ConfigError("return bound must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (n_samples < 1) throw ConfigError("sample count must be >= 1");
    if (!(rho >= 0.0) || !(p > 1.0)) throw ConfigError("invalid perturbation ball");
    if (cover_radius && !(*cover_radius > 0.0 && *cover_radius <= 3.0)) {
        throw ConfigError("cover radius must lie in (0, 3]");
    }

    const auto params = AffineGaussianParams::unflatten(nominal.dims(), nominal.theta());
    const Index d = nominal.dims().output_dim;
    const double dd = static_cast<double>(d);

    // An l_p perturbation of the B block moves its spectral norm by at most
    // its Frobenius (l_2) size.
    const double block_size = static_cast<double>(params.B.size());
    const double rho_two = (std::isinf(p) ? std::sqrt(block_size)
                            : p > 2.0    ? std::pow(block_size, 0.5 - 1.0 / p)
                                         : 1.0) *
                           rho;
    const double spectral = params.B.size() ? Eigen::JacobiSVD<Matrix>(params.B).singularValues()(0)
                                            : 0.0;
    double output_scale = 1.0;
    if (const auto& s = nominal.scaling()) output_scale = s->scale.cwiseAbs().maxCoeff();

    CertificateConstants out;
    out.lipschitz_outcome = 1.0 + lambda * dd * return_bound;
    out.lipschitz_latent = output_scale * (spectral + rho_two);
    out.lipschitz_decision = out.lipschitz_outcome * return_bound * std::sqrt(dd);

    const double n = static_cast<double>(n_samples);
    const double log_delta = std::log(1.0 / delta);
    const double lead = out.lipschitz_outcome * out.lipschitz_latent;
    if (d == 1) {
        out.epsilon_n = lead * std::sqrt(2.0 * log_delta / n);
        return out;
    }
    auto consider = [&](double eps, bool first) {
        const double log_cover = dd * std::log(3.0 / eps);
        const double value =
            lead * std::sqrt(2.0 * (log_cover + log_delta) / n) +
            2.0 * out.lipschitz_decision * eps;
        if (first || value < out.epsilon_n) {
            out.epsilon_n = value;
            out.cover_radius = eps;
            out.log_cover = log_cover;
        }
    };
    if (cover_radius) {
        consider(*cover_radius, true);
        return out;
    }
    for (int k = 0; k <= 120; ++k) consider(std::pow(10.0, -6.0 + 0.05 * k), k == 0);  // 1e-6 .. 1
    return out;
}

nlohmann::json to_json(const CertificateReport& r) {
    return {{"schema_version", kReportSchemaVersion},
            {"empirical_utility_nominal", r.empirical_utility_nominal},
            {"robust_objective", r.robust_objective},
            {"oracle_utility_nominal", r.oracle_utility_nominal},
            {"oracle_utility_robust", r.oracle_utility_robust},
            {"gap_nominal", r.gap_nominal},
            {"gap_robust", r.gap_robust},
            {"oracle_std_error", r.oracle_std_error},
            {"slack_estimate", r.slack_estimate},
            {"slack_is_upper_bound", true},
            {"epsilon_N", r.epsilon_n},
            {"regime", std::string(to_string(r.regime))},
            {"coverage_flag", r.coverage_flag},
            {"coverage_distance", r.coverage_distance},
            {"N_oracle", r.n_oracle}};
}

}  // namespace sro
