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

// sro: command-line front end.
//
//   sro calibrate  --panel returns.csv --out generator.json
//   sro simulate   [--generator g.json] --rows 1300 --out panel.csv
//   sro solve      --generator g.json --panel returns.csv [--t T] --out weights.json
//   sro certify    --oracle o.json --generator g.json --panel returns.csv --out sweep.csv
//   sro controlled --config study.json --out dir
//   sro backtest   --config study.json --out dir
//   sro report     --in dir --out dir
#include "sro/certificate.hpp"
#include "sro/errors.hpp"
#include "sro/experiment.hpp"
#include "sro/format.hpp"
#include "sro/generator_io.hpp"
#include "sro/panel.hpp"
#include "sro/solvers.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> rho;
    std::string solver;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool out_required = true) {
    cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Seed (overrides the config)");
    cmd->add_option("--rho", c.rho, "Perturbation radius (overrides the config)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--solver", c.solver, "Robust solver")
        ->check(CLI::IsMember({"first-order", "two-timescale"}));
    auto* out = cmd->add_option("--out", c.out, "Output path");
    if (out_required) out->required();
}

sro::ExperimentConfig base_config(const Common& c) {
    sro::ExperimentConfig cfg = c.config.empty() ? sro::ExperimentConfig{}
                                                 : sro::load_config(c.config);
    if (c.seed) cfg.seeds = {*c.seed};
    if (c.rho) {
        cfg.rho_grid = {*c.rho};
        cfg.robust.rho = *c.rho;
    }
    if (!c.solver.empty()) cfg.solver = sro::solver_kind_from_string(c.solver);
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sro::DataError("cannot write " + path.string());
    return out;
}

// Context at row t (default: after the last row) of a panel, standardized
// with the generator's own statistics.
sro::Vector panel_context(const sro::GeneratorSpec& gen, const std::string& panel_path,
                          std::optional<sro::Index> t, sro::Index lookback) {
    const auto panel = sro::ingest_csv(panel_path, lookback + 1);
    if (panel.assets() != gen.dims().output_dim) {
        throw sro::ShapeError("panel has " + std::to_string(panel.assets()) +
                              " assets, generator expects " +
                              std::to_string(gen.dims().output_dim));
    }
    const sro::Index d = gen.dims().output_dim;
    const auto stats = gen.scaling().value_or(
        sro::Standardization{sro::Vector::Zero(d), sro::Vector::Ones(d)});
    const sro::Matrix clipped = sro::clip_returns(panel.returns);
    return sro::make_context(clipped, t.value_or(panel.rows()), lookback, stats);
}

json weights_json(const sro::Vector& w) { return std::vector<double>(w.data(), w.data() + w.size()); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampler-robust portfolio optimization"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log per-seed progress to stderr");

    // calibrate
    Common cal;
    std::string cal_panel;
    auto* calibrate = app.add_subcommand("calibrate", "Fit an affine generator to a return panel");
    add_common(calibrate, cal);
    calibrate->add_option("--panel", cal_panel, "Return panel CSV")->required()->check(CLI::ExistingFile);

    // simulate
    Common sim;
    std::string sim_gen;
    sro::Index sim_rows = 1300;
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic return panel");
    add_common(simulate, sim);
    simulate->add_option("--generator", sim_gen, "Generator JSON (default: built-in synthetic model)")
        ->check(CLI::ExistingFile);
    simulate->add_option("--rows", sim_rows, "Number of days")->check(CLI::PositiveNumber);

    // solve
    Common sol;
    std::string sol_gen;
    std::string sol_panel;
    std::optional<sro::Index> sol_t;
    std::string sol_trace;
    bool sol_nominal = false;
    auto* solve = app.add_subcommand("solve", "Optimize weights for one context");
    add_common(solve, sol);
    solve->add_option("--generator", sol_gen, "Generator JSON")->required()->check(CLI::ExistingFile);
    solve->add_option("--panel", sol_panel, "Return panel CSV")->required()->check(CLI::ExistingFile);
    solve->add_option("--t", sol_t, "Decision row (context uses rows t-L..t-1)");
    solve->add_option("--trace", sol_trace, "Write the solver trace CSV here");
    solve->add_flag("--nominal", sol_nominal, "Solve the nominal problem instead");

    // certify
    Common cert;
    std::string cert_oracle;
    std::string cert_gen;
    std::string cert_panel;
    std::optional<sro::Index> cert_t;
    std::vector<double> cert_grid{0.0, 0.05, 0.1, 0.2, 0.3, 0.5};
    auto* certify = app.add_subcommand("certify", "Slack and epsilon_N over a radius sweep");
    add_common(certify, cert);
    certify->add_option("--oracle", cert_oracle, "Oracle generator JSON")->required()->check(CLI::ExistingFile);
    certify->add_option("--generator", cert_gen, "Nominal generator JSON")->required()->check(CLI::ExistingFile);
    certify->add_option("--panel", cert_panel, "Return panel CSV")->required()->check(CLI::ExistingFile);
    certify->add_option("--t", cert_t, "Decision row");
    certify->add_option("--rho-grid", cert_grid, "Radii to sweep")->delimiter(',');

    // controlled / backtest
    Common ctl;
    auto* controlled = app.add_subcommand("controlled", "Generator-to-generator study");
    add_common(controlled, ctl);
    Common bt;
    auto* backtest = app.add_subcommand("backtest", "Rolling backtest on a return panel");
    add_common(backtest, bt);

    // report
    std::string rep_in;
    std::string rep_out;
    auto* report = app.add_subcommand("report", "Recompute aggregate tables from per-seed CSVs");
    report->add_option("--in", rep_in, "Directory with per_seed_*.csv")->required()->check(CLI::ExistingDirectory);
    report->add_option("--out", rep_out, "Output directory (default: --in)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*calibrate) {
            auto cfg = base_config(cal);
            const auto panel = sro::ingest_csv(cal_panel);
            const auto pre = sro::preprocess(panel);
            bool ridge = false;
            const auto gen = sro::calibrate_conditional(pre.clipped.returns, cfg.lookback,
                                                        panel.rows(), cfg.lookback,
                                                        cfg.latent_dim, pre.stats, &ridge);
            sro::save_generator(gen, cal.out);
            std::cout << "calibrated " << panel.assets() << " assets on " << panel.rows()
                      << " rows" << (ridge ? " (ridge fallback)" : "") << " -> " << cal.out << '\n';
        } else if (*simulate) {
            auto cfg = base_config(sim);
            const std::uint64_t seed = sim.seed.value_or(cfg.synthetic_seed);
            const auto gen = sim_gen.empty()
                                 ? sro::synthetic_affine_model(cfg.synthetic_assets, cfg.lookback,
                                                               cfg.latent_dim, seed)
                                 : sro::load_generator(sim_gen);
            sro::emit_csv(fs::path(sim.out), sro::synthesize_panel(gen, cfg.lookback, sim_rows, seed));
        } else if (*solve) {
            auto cfg = base_config(sol);
            const auto gen = sro::load_generator(sol_gen);
            const sro::Index lookback = gen.dims().context_dim / gen.dims().output_dim;
            const auto x = panel_context(gen, sol_panel, sol_t, lookback);
            sro::RobustConfig rc = cfg.robust;
            if (sol.seed) rc.seed = *sol.seed;
            const sro::DecisionProblem problem{gen.dims().output_dim, cfg.lambda};
            const auto kind = sol_nominal ? sro::SolverKind::Nominal : cfg.solver;
            const auto res = sro::solve(kind, gen, x, problem, rc);
            json doc = {{"schema_version", 1},
                        {"solver", std::string(sro::to_string(kind))},
                        {"rho", rc.rho},
                        {"seed", rc.seed},
                        {"weights", weights_json(res.weights)},
                        {"empirical_utility", sro::nominal_objective(gen, x, problem, res.weights, rc)},
                        {"robust_objective", sro::robust_objective(gen, x, problem, res.weights, rc)}};
            open_out(sol.out) << doc.dump(2) << '\n';
            if (!sol_trace.empty()) {
                auto out = open_out(sol_trace);
                sro::write_trace_csv(out, res.trace, problem.n_assets);
            }
        } else if (*certify) {
            auto cfg = base_config(cert);
            if (cert.rho) cert_grid = {*cert.rho};
            const auto oracle = sro::load_generator(cert_oracle);
            const auto nominal = sro::load_generator(cert_gen);
            const sro::Index lookback = nominal.dims().context_dim / nominal.dims().output_dim;
            const auto x_nom = panel_context(nominal, cert_panel, cert_t, lookback);
            const auto x_orc = panel_context(oracle, cert_panel, cert_t, lookback);
            const sro::DecisionProblem problem{nominal.dims().output_dim, cfg.lambda};
            auto out = open_out(cert.out);
            out << "rho,mu_bar,mu_bar_std_error,epsilon_N,regime,coverage_flag,coverage_distance\n";
            for (double rho : cert_grid) {
                sro::RobustConfig rc = cfg.robust;
                rc.rho = rho;
                if (cert.seed) rc.seed = *cert.seed;
                sro::SlackOptions opt;
                opt.grid_size = cfg.slack_grid;
                opt.grid_seed = rc.seed;
                opt.n_oracle = cfg.n_oracle;
                opt.oracle_seed = rc.seed + 1;
                const auto slack =
                    sro::slack_estimate(oracle, x_orc, nominal, x_nom, problem, rc, opt);
                const auto c = sro::certificate_constants(nominal, cfg.lambda, cfg.return_bound,
                                                          rho, rc.p, cfg.delta, rc.batch_size);
                out << sro::format_double(rho) << ',' << sro::format_double(slack.mu_bar) << ','
                    << sro::format_double(slack.std_error) << ','
                    << sro::format_double(c.epsilon_n) << ','
                    << sro::to_string(sro::classify_regime(slack.mu_bar, c.epsilon_n)) << ','
                    << (slack.coverage.covered ? 1 : 0) << ','
                    << sro::format_double(slack.coverage.distance) << '\n';
            }
        } else if (*controlled || *backtest) {
            const bool is_controlled = controlled->parsed();
            auto cfg = base_config(is_controlled ? ctl : bt);
            cfg.verbose = cfg.verbose || verbose;
            cfg.mode = is_controlled ? sro::ExperimentMode::Controlled : sro::ExperimentMode::Backtest;
            cfg.validate();
            const auto result = is_controlled ? sro::run_controlled(cfg) : sro::run_backtest(cfg);
            const auto& out = (is_controlled ? ctl : bt).out;
            sro::write_outputs(result, out);
            std::size_t excluded = 0;
            for (const auto& s : result.seeds) excluded += s.excluded ? 1 : 0;
            std::cout << (is_controlled ? "controlled" : "backtest") << ": "
                      << result.seeds.size() << " seeds (" << excluded << " excluded) -> " << out
                      << '\n';
        } else if (*report) {
            const auto rows = sro::report_from_directory(rep_in, rep_out.empty() ? rep_in : rep_out);
            std::cout << "aggregate.csv: " << rows.size() << " rows\n";
        }
    } catch (const sro::SolverError& e) {
        std::cerr << "error: " << e.what() << " (iteration " << e.iteration() << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
