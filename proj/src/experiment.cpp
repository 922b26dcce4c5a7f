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

#include "sro/experiment.hpp"

#include "sro/errors.hpp"
#include "sro/format.hpp"
#include "sro/generator_io.hpp"
#include "sro/screen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace sro {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// derive_seed streams
constexpr std::uint64_t kPathStream = 1;
constexpr std::uint64_t kScreenStream = 2;
constexpr std::uint64_t kValidationStream = 3;
constexpr std::uint64_t kTestStream = 4;
constexpr std::uint64_t kOracleStream = 5;
constexpr std::uint64_t kGridStream = 6;
constexpr std::uint64_t kUniverseStream = 7;

constexpr int kSchemaVersion = 1;

std::string_view to_string(ExperimentMode mode) {
    return mode == ExperimentMode::Controlled ? "controlled" : "backtest";
}

ExperimentMode mode_from_string(const std::string& s) {
    if (s == "controlled") return ExperimentMode::Controlled;
    if (s == "backtest") return ExperimentMode::Backtest;
    throw ConfigError("unknown mode '" + s + "'");
}

std::string_view to_string(SelectionCriterion c) {
    switch (c) {
        case SelectionCriterion::Sharpe:
            return "sharpe";
        case SelectionCriterion::MeanUtility:
            return "mean-utility";
        case SelectionCriterion::Cvar5:
            return "cvar5";
    }
    return "unknown";
}

SelectionCriterion criterion_from_string(const std::string& s) {
    if (s == "sharpe") return SelectionCriterion::Sharpe;
    if (s == "mean-utility") return SelectionCriterion::MeanUtility;
    if (s == "cvar5") return SelectionCriterion::Cvar5;
    throw ConfigError("unknown selection criterion '" + s + "'");
}

double exponent_from_json(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return kInf;
        throw ConfigError("p must be a number or \"inf\"");
    }
    return v.get<double>();
}

json exponent_to_json(double p) {
    if (std::isinf(p)) return "inf";
    return p;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ConfigError("unknown key '" + item.key() + "' in " + std::string(where));
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

Standardization identity_stats(Index d) {
    return Standardization{Vector::Zero(d), Vector::Ones(d)};
}

Standardization context_stats(const GeneratorSpec& gen) {
    return gen.scaling().value_or(identity_stats(gen.dims().output_dim));
}

void log_line(const ExperimentConfig& cfg, const std::string& msg) {
    if (cfg.verbose) std::clog << msg << '\n';
}

struct Study {
    const GeneratorSpec& nominal;
    const Matrix& clipped;  ///< model-side series (contexts)
    const Matrix& raw;      ///< realized returns
    Index validation_begin;
    Index test_begin;
    Index test_end;
};

// Validation over the radius grid, then test-window nominal/SRO decisions.
void run_decisions(const ExperimentConfig& cfg, const Study& study, SeedResult& out,
                   std::vector<Vector>* nominal_weights, std::vector<Vector>* robust_weights) {
    const Index lookback = cfg.lookback;
    for (double rho : cfg.rho_grid) {
        std::vector<double> returns;
        for (Index t = study.validation_begin; t < study.test_begin; ++t) {
            RobustConfig rc = cfg.robust;
            rc.rho = rho;
            rc.seed = derive_seed(out.seed, kValidationStream, static_cast<std::uint64_t>(t));
            const Vector x = make_context(study.clipped, t, lookback, context_stats(study.nominal));
            const DecisionProblem problem{study.nominal.dims().output_dim, cfg.lambda};
            const auto res = solve(cfg.solver, study.nominal, x, problem, rc);
            returns.push_back(realized_return(res.weights, study.raw.row(t).transpose()));
        }
        out.validation.emplace_back(rho, selection_score(cfg.selection, returns, cfg.lambda));
    }
    out.rho = select_radius(out.validation);

    MethodResult nominal{"nominal", {}, {}};
    MethodResult robust{"sro", {}, {}};
    for (Index t = study.test_begin; t < study.test_end; ++t) {
        const auto dec = decide_day(study.nominal, study.clipped, t, lookback, cfg.solver,
                                    cfg.robust, out.rho, cfg.lambda,
                                    derive_seed(out.seed, kTestStream, static_cast<std::uint64_t>(t)));
        const Vector r = study.raw.row(t).transpose();
        nominal.returns.push_back(realized_return(dec.nominal, r));
        robust.returns.push_back(realized_return(dec.robust, r));
        if (nominal_weights) nominal_weights->push_back(dec.nominal);
        if (robust_weights) robust_weights->push_back(dec.robust);
    }
    nominal.metrics = compute_metrics(nominal.returns);
    robust.metrics = compute_metrics(robust.returns);
    out.methods.push_back(std::move(nominal));
    out.methods.push_back(std::move(robust));
}

bool screen_nominal(const ExperimentConfig& cfg, const GeneratorSpec& nominal,
                    const Matrix& clipped, Index begin, Index end, SeedResult& out) {
    if (!cfg.screen) return true;
    const auto rows = supervised_rows(clipped, begin, end, cfg.lookback, context_stats(nominal));
    const auto res = validity_screen(nominal, rows.contexts, rows.targets,
                                     derive_seed(out.seed, kScreenStream));
    if (res.passed) return true;
    out.excluded = true;
    std::string reason = "validity screen failed";
    for (const auto& f : res.failures) reason += "; " + f;
    out.exclusion_reason = reason;
    log_line(cfg, "seed " + std::to_string(out.seed) + " excluded: " + reason);
    return false;
}

struct OracleSource {
    GeneratorSpec oracle;
    Matrix history;  ///< at least L rows preceding the simulated path
    bool burn_in = false;
};

OracleSource oracle_source(const ExperimentConfig& cfg) {
    if (!cfg.oracle_path.empty()) {
        auto gen = load_generator(cfg.oracle_path);
        const Index d = gen.dims().output_dim;
        return {std::move(gen), Matrix::Zero(cfg.lookback, d), true};
    }
    if (!cfg.panel_path.empty()) {
        const auto panel = ingest_csv(cfg.panel_path);
        const auto pre = preprocess(panel);
        auto gen = calibrate_conditional(pre.clipped.returns, cfg.lookback, panel.rows(),
                                         cfg.lookback, cfg.latent_dim, pre.stats);
        return {std::move(gen), panel.returns.bottomRows(cfg.lookback), false};
    }
    auto gen = synthetic_affine_model(cfg.synthetic_assets, cfg.lookback, cfg.latent_dim,
                                      cfg.synthetic_seed);
    return {std::move(gen), Matrix::Zero(cfg.lookback, cfg.synthetic_assets), true};
}

constexpr Index kBurnIn = 200;

SeedResult controlled_seed(const ExperimentConfig& cfg, const OracleSource& src,
                           std::uint64_t seed) {
    SeedResult out;
    out.seed = seed;
    const auto& oracle = src.oracle;
    const Index d = oracle.dims().output_dim;
    const Index lookback = cfg.lookback;

    // series row H + i is path day i
    const Index burn = src.burn_in ? kBurnIn : 0;
    const Matrix sim = simulate_path(oracle, src.history, lookback, burn + cfg.path_length,
                                     derive_seed(seed, kPathStream));
    Matrix raw(lookback + cfg.path_length, d);
    if (burn > 0) {
        raw.topRows(lookback) = sim.middleRows(burn - lookback, lookback);
    } else {
        raw.topRows(lookback) = src.history.bottomRows(lookback);
    }
    raw.bottomRows(cfg.path_length) = sim.bottomRows(cfg.path_length);
    const Matrix clipped = clip_returns(raw);

    const Index h = lookback;
    const Index train_end = cfg.path_length - cfg.validation_days - cfg.test_days;
    const Index train_begin = train_end - cfg.retrain_window;
    const Standardization stats =
        standardization_stats(clipped.middleRows(h + train_begin, cfg.retrain_window));
    const GeneratorSpec nominal = calibrate_conditional(clipped, h + train_begin, h + train_end,
                                                        lookback, cfg.latent_dim, stats);
    if (!screen_nominal(cfg, nominal, clipped, h + train_begin, h + train_end, out)) return out;

    const Study study{nominal, clipped, raw, h + train_end, h + train_end + cfg.validation_days,
                      h + cfg.path_length};
    std::vector<Vector> w_nom;
    std::vector<Vector> w_rob;
    run_decisions(cfg, study, out, &w_nom, &w_rob);

    const DecisionProblem problem{d, cfg.lambda};
    const Standardization oracle_stats = context_stats(oracle);
    MethodResult orc{"oracle", {}, {}};
    CertificateReport report;
    report.n_oracle = cfg.n_oracle;
    double se_sum = 0.0;
    for (Index t = study.test_begin; t < study.test_end; ++t) {
        const auto k = static_cast<std::size_t>(t - study.test_begin);
        const std::uint64_t day_seed = derive_seed(seed, kTestStream, static_cast<std::uint64_t>(t));
        const Vector x_nom = make_context(clipped, t, lookback, stats);
        const Vector x_orc = make_context(clipped, t, lookback, oracle_stats);

        RobustConfig rc = cfg.robust;
        rc.seed = day_seed;
        rc.rho = out.rho;
        const Vector w_orc = solve_nominal(oracle, x_orc, problem, rc).weights;
        orc.returns.push_back(realized_return(w_orc, raw.row(t).transpose()));

        const std::uint64_t mc_seed = derive_seed(seed, kOracleStream, static_cast<std::uint64_t>(t));
        const auto star_nom = oracle_utility(oracle, x_orc, problem, w_nom[k], cfg.n_oracle, mc_seed);
        const auto star_rob = oracle_utility(oracle, x_orc, problem, w_rob[k], cfg.n_oracle, mc_seed);
        const auto star_orc = oracle_utility(oracle, x_orc, problem, w_orc, cfg.n_oracle, mc_seed);

        DailyDiagnostics day;
        day.day = t - h;
        day.empirical_nominal = nominal_objective(nominal, x_nom, problem, w_nom[k], rc);
        day.robust_value = robust_objective(nominal, x_nom, problem, w_rob[k], rc);
        day.oracle_nominal = star_nom.mean;
        day.oracle_robust = star_rob.mean;
        day.oracle_oracle = star_orc.mean;
        out.days.push_back(day);
        se_sum += 0.5 * (star_nom.std_error + star_rob.std_error);

        if (t == study.test_begin) {
            SlackOptions opt;
            opt.grid_size = cfg.slack_grid;
            opt.grid_seed = derive_seed(seed, kGridStream);
            opt.n_oracle = cfg.n_oracle;
            opt.oracle_seed = mc_seed;
            opt.extra_points = {w_nom[k], w_rob[k]};
            const auto slack = slack_estimate(oracle, x_orc, nominal, x_nom, problem, rc, opt);
            const auto constants = certificate_constants(nominal, cfg.lambda, cfg.return_bound,
                                                         out.rho, rc.p, cfg.delta,
                                                         rc.batch_size);
            report.slack_estimate = slack.mu_bar;
            report.epsilon_n = constants.epsilon_n;
            report.regime = classify_regime(slack.mu_bar, constants.epsilon_n);
            report.coverage_flag = slack.coverage.covered;
            report.coverage_distance = slack.coverage.distance;
        }
    }
    const double n_days = static_cast<double>(out.days.size());
    auto mean_of = [&](double DailyDiagnostics::*field) {
        double s = 0.0;
        for (const auto& day : out.days) s += day.*field;
        return s / n_days;
    };
    report.empirical_utility_nominal = mean_of(&DailyDiagnostics::empirical_nominal);
    report.robust_objective = mean_of(&DailyDiagnostics::robust_value);
    report.oracle_utility_nominal = mean_of(&DailyDiagnostics::oracle_nominal);
    report.oracle_utility_robust = mean_of(&DailyDiagnostics::oracle_robust);
    const auto g = gaps(report.empirical_utility_nominal, report.oracle_utility_nominal,
                        report.robust_objective, report.oracle_utility_robust);
    report.gap_nominal = g.nominal;
    report.gap_robust = g.robust;
    report.oracle_std_error = se_sum / n_days;
    out.certificate = report;

    orc.metrics = compute_metrics(orc.returns);
    out.methods.push_back(std::move(orc));
    log_line(cfg, "seed " + std::to_string(seed) + ": rho=" + format_double(out.rho) +
                      " gap_nominal=" + format_double(report.gap_nominal) +
                      " gap_robust=" + format_double(report.gap_robust));
    return out;
}

ReturnPanel backtest_panel(const ExperimentConfig& cfg) {
    if (!cfg.panel_path.empty()) return ingest_csv(cfg.panel_path);
    const auto gen = synthetic_affine_model(cfg.synthetic_assets, cfg.lookback, cfg.latent_dim,
                                            cfg.synthetic_seed);
    return synthesize_panel(gen, cfg.lookback, cfg.synthetic_rows, cfg.synthetic_seed);
}

std::vector<Index> pick_universe(Index available, Index wanted, std::uint64_t seed) {
    std::vector<Index> idx(static_cast<std::size_t>(available));
    std::iota(idx.begin(), idx.end(), Index{0});
    if (wanted >= available) return idx;
    std::mt19937_64 engine(derive_seed(seed, kUniverseStream));
    // Fisher-Yates with explicit draws so the subset does not depend on the
    // standard library's shuffle implementation.
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i);
        std::swap(idx[i], idx[pick(engine)]);
    }
    idx.resize(static_cast<std::size_t>(wanted));
    std::sort(idx.begin(), idx.end());
    return idx;
}

SeedResult backtest_seed(const ExperimentConfig& cfg, const ReturnPanel& full,
                         std::uint64_t seed) {
    SeedResult out;
    out.seed = seed;
    out.assets = pick_universe(full.assets(), cfg.universe_size, seed);
    const Index total = cfg.train_rows + cfg.validation_days + cfg.test_days;
    const auto panel = full.select_assets(out.assets).slice_rows(0, total);
    const auto pre = preprocess(panel);
    const Matrix& clipped = pre.clipped.returns;
    const GeneratorSpec nominal = calibrate_conditional(clipped, cfg.lookback, cfg.train_rows,
                                                        cfg.lookback, cfg.latent_dim, pre.stats);
    if (!screen_nominal(cfg, nominal, clipped, cfg.lookback, cfg.train_rows, out)) return out;
    const Study study{nominal, clipped, panel.returns, cfg.train_rows,
                      cfg.train_rows + cfg.validation_days, total};
    run_decisions(cfg, study, out, nullptr, nullptr);
    log_line(cfg, "seed " + std::to_string(seed) + ": rho=" + format_double(out.rho));
    return out;
}

// ---- CSV plumbing ----

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& s, const fs::path& path, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
    }
}

std::vector<std::vector<std::string>> read_table(const fs::path& path, const std::string& header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw DataError(path.string() + ": unexpected header");
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(split_line(line));
    }
    return rows;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

const std::string kMetricHeader = "seed,method,mean,std,sharpe,cvar5,mdd";
const std::string kDiagnosticHeader =
    "seed,rho,empirical_utility_nominal,robust_objective,oracle_utility_nominal,"
    "oracle_utility_robust,gap_nominal,gap_robust,oracle_std_error,slack_estimate,"
    "epsilon_N,regime,coverage_flag,coverage_distance,N_oracle";

void write_metric_rows(const fs::path& path, const std::vector<MetricRow>& rows) {
    auto out = open_out(path);
    out << kMetricHeader << '\n';
    for (const auto& r : rows) {
        out << r.seed << ',' << r.method << ',' << format_double(r.metrics.mean) << ','
            << format_double(r.metrics.std) << ',' << opt_cell(r.metrics.sharpe) << ','
            << format_double(r.metrics.cvar5) << ',' << format_double(r.metrics.mdd) << '\n';
    }
}

void write_diagnostic_rows(const fs::path& path, const std::vector<DiagnosticRow>& rows) {
    auto out = open_out(path);
    out << kDiagnosticHeader << '\n';
    for (const auto& row : rows) {
        const auto& r = row.report;
        out << row.seed << ',' << format_double(row.rho) << ','
            << format_double(r.empirical_utility_nominal) << ','
            << format_double(r.robust_objective) << ',' << format_double(r.oracle_utility_nominal)
            << ',' << format_double(r.oracle_utility_robust) << ','
            << format_double(r.gap_nominal) << ',' << format_double(r.gap_robust) << ','
            << format_double(r.oracle_std_error) << ',' << format_double(r.slack_estimate) << ','
            << format_double(r.epsilon_n) << ',' << to_string(r.regime) << ','
            << (r.coverage_flag ? 1 : 0) << ',' << format_double(r.coverage_distance) << ','
            << r.n_oracle << '\n';
    }
}

Regime regime_from_string(const std::string& s) {
    if (s == "small") return Regime::Small;
    if (s == "moderate") return Regime::Moderate;
    if (s == "large") return Regime::Large;
    throw DataError("unknown regime '" + s + "'");
}

json aggregate_json(const std::vector<AggregateRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"table", r.table},
                       {"method", r.method},
                       {"metric", r.metric},
                       {"mean", r.value.mean},
                       {"std", r.value.std},
                       {"n", r.value.n}});
    }
    return arr;
}

}  // namespace

// ---- config ----

ExperimentConfig::ExperimentConfig() {
    for (std::uint64_t s = 40; s <= 59; ++s) seeds.push_back(s);
    robust.snapshot_stride = 0;
}

void ExperimentConfig::validate() const {
    robust.validate();
    if (lookback < 1) throw ConfigError("lookback must be >= 1");
    if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (rho_grid.empty()) throw ConfigError("rho_grid must not be empty");
    for (double r : rho_grid) {
        if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("rho_grid entries must be >= 0");
    }
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
    if (validation_days < 2 || test_days < 2) {
        throw ConfigError("validation and test windows need at least 2 days");
    }
    if (n_oracle < 1) throw ConfigError("n_oracle must be >= 1");
    if (slack_grid < 1) throw ConfigError("slack_grid must be >= 1");
    if (mode == ExperimentMode::Controlled) {
        const Index train_end = path_length - validation_days - test_days;
        if (retrain_window < kStandardizationRows) {
            throw ConfigError("retrain_window must cover the 100 standardization rows");
        }
        if (retrain_window > train_end) {
            throw ConfigError("retrain_window exceeds the training part of the path");
        }
    } else {
        if (train_rows <= lookback) throw ConfigError("train_rows must exceed the lookback");
        if (train_rows < kStandardizationRows) throw ConfigError("train_rows must be >= 100");
        if (universe_size < 1) throw ConfigError("universe_size must be >= 1");
    }
}

ExperimentConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    check_keys(doc,
               {"schema_version", "mode", "lookback", "latent_dim", "lambda", "solver", "robust",
                "rho_grid", "selection", "seeds", "screen", "validation_days", "test_days",
                "n_oracle", "slack_grid", "delta", "return_bound", "panel_path", "oracle_path",
                "synthetic_assets", "synthetic_rows", "synthetic_seed", "path_length",
                "retrain_window", "train_rows", "universe_size", "verbose"},
               "config");
    ExperimentConfig cfg;
    try {
        if (doc.contains("mode")) cfg.mode = mode_from_string(doc.at("mode").get<std::string>());
        read(doc, "lookback", cfg.lookback);
        read(doc, "latent_dim", cfg.latent_dim);
        read(doc, "lambda", cfg.lambda);
        if (doc.contains("solver")) {
            cfg.solver = solver_kind_from_string(doc.at("solver").get<std::string>());
        }
        if (doc.contains("robust")) {
            const auto& r = doc.at("robust");
            check_keys(r,
                       {"rho", "p", "alpha_theta", "alpha_omega", "iterations", "batch_size",
                        "inner_iterations", "snapshot_stride", "seed", "block"},
                       "robust");
            read(r, "rho", cfg.robust.rho);
            if (r.contains("p")) cfg.robust.p = exponent_from_json(r.at("p"));
            read(r, "alpha_theta", cfg.robust.alpha_theta);
            read(r, "alpha_omega", cfg.robust.alpha_omega);
            read(r, "iterations", cfg.robust.iterations);
            read(r, "batch_size", cfg.robust.batch_size);
            read(r, "inner_iterations", cfg.robust.inner_iterations);
            read(r, "snapshot_stride", cfg.robust.snapshot_stride);
            read(r, "seed", cfg.robust.seed);
            if (r.contains("block")) {
                const auto& b = r.at("block");
                cfg.robust.block = ParamBlock{b.at("offset").get<Index>(), b.at("length").get<Index>()};
            }
        }
        read(doc, "rho_grid", cfg.rho_grid);
        if (doc.contains("selection")) {
            cfg.selection = criterion_from_string(doc.at("selection").get<std::string>());
        }
        read(doc, "seeds", cfg.seeds);
        read(doc, "screen", cfg.screen);
        read(doc, "validation_days", cfg.validation_days);
        read(doc, "test_days", cfg.test_days);
        read(doc, "n_oracle", cfg.n_oracle);
        read(doc, "slack_grid", cfg.slack_grid);
        read(doc, "delta", cfg.delta);
        read(doc, "return_bound", cfg.return_bound);
        read(doc, "panel_path", cfg.panel_path);
        read(doc, "oracle_path", cfg.oracle_path);
        read(doc, "synthetic_assets", cfg.synthetic_assets);
        read(doc, "synthetic_rows", cfg.synthetic_rows);
        read(doc, "synthetic_seed", cfg.synthetic_seed);
        read(doc, "path_length", cfg.path_length);
        read(doc, "retrain_window", cfg.retrain_window);
        read(doc, "train_rows", cfg.train_rows);
        read(doc, "universe_size", cfg.universe_size);
        read(doc, "verbose", cfg.verbose);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

json to_json(const ExperimentConfig& cfg) {
    json robust = {{"rho", cfg.robust.rho},
                   {"p", exponent_to_json(cfg.robust.p)},
                   {"alpha_theta", cfg.robust.alpha_theta},
                   {"alpha_omega", cfg.robust.alpha_omega},
                   {"iterations", cfg.robust.iterations},
                   {"batch_size", cfg.robust.batch_size},
                   {"inner_iterations", cfg.robust.inner_iterations},
                   {"snapshot_stride", cfg.robust.snapshot_stride},
                   {"seed", cfg.robust.seed}};
    if (cfg.robust.block) {
        robust["block"] = {{"offset", cfg.robust.block->offset},
                           {"length", cfg.robust.block->length}};
    }
    return {{"schema_version", kSchemaVersion},
            {"mode", std::string(to_string(cfg.mode))},
            {"lookback", cfg.lookback},
            {"latent_dim", cfg.latent_dim},
            {"lambda", cfg.lambda},
            {"solver", std::string(to_string(cfg.solver))},
            {"robust", robust},
            {"rho_grid", cfg.rho_grid},
            {"selection", std::string(to_string(cfg.selection))},
            {"seeds", cfg.seeds},
            {"screen", cfg.screen},
            {"validation_days", cfg.validation_days},
            {"test_days", cfg.test_days},
            {"n_oracle", cfg.n_oracle},
            {"slack_grid", cfg.slack_grid},
            {"delta", cfg.delta},
            {"return_bound", cfg.return_bound},
            {"panel_path", cfg.panel_path},
            {"oracle_path", cfg.oracle_path},
            {"synthetic_assets", cfg.synthetic_assets},
            {"synthetic_rows", cfg.synthetic_rows},
            {"synthetic_seed", cfg.synthetic_seed},
            {"path_length", cfg.path_length},
            {"retrain_window", cfg.retrain_window},
            {"train_rows", cfg.train_rows},
            {"universe_size", cfg.universe_size},
            {"verbose", cfg.verbose}};
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(doc);
}

// ---- daily loop ----

DailyDecisions decide_day(const GeneratorSpec& nominal, const Matrix& clipped, Index t,
                          Index lookback, SolverKind solver, RobustConfig cfg, double rho,
                          double lambda, std::uint64_t day_seed) {
    const Vector x = make_context(clipped, t, lookback, context_stats(nominal));
    const DecisionProblem problem{nominal.dims().output_dim, lambda};
    cfg.seed = day_seed;
    cfg.rho = rho;
    DailyDecisions out;
    out.nominal = solve_nominal(nominal, x, problem, cfg).weights;
    out.robust = solve(solver, nominal, x, problem, cfg).weights;
    return out;
}

double selection_score(SelectionCriterion criterion, const std::vector<double>& returns,
                       double lambda) {
    const auto m = compute_metrics(returns);
    switch (criterion) {
        case SelectionCriterion::Sharpe:
            return m.sharpe.value_or(-std::numeric_limits<double>::infinity());
        case SelectionCriterion::MeanUtility: {
            double s = 0.0;
            for (double r : returns) s += r - 0.5 * lambda * r * r;
            return s / static_cast<double>(returns.size());
        }
        case SelectionCriterion::Cvar5:
            return m.cvar5;
    }
    return 0.0;
}

double select_radius(const std::vector<std::pair<double, double>>& scores) {
    if (scores.empty()) throw ConfigError("no validation scores");
    auto best = scores.front();
    for (const auto& s : scores) {
        if (s.second > best.second) best = s;
    }
    return best.first;
}

ExperimentResult run_controlled(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto src = oracle_source(cfg);
    if (src.oracle.dims().context_dim != cfg.lookback * src.oracle.dims().output_dim) {
        throw ConfigError("oracle context dimension does not match lookback * assets");
    }
    ExperimentResult result;
    result.config = cfg;
    result.config.mode = ExperimentMode::Controlled;
    for (auto seed : cfg.seeds) result.seeds.push_back(controlled_seed(cfg, src, seed));
    return result;
}

ExperimentResult run_backtest(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto panel = backtest_panel(cfg);
    const Index needed = cfg.train_rows + cfg.validation_days + cfg.test_days;
    if (panel.rows() < needed) {
        throw DataError("backtest needs " + std::to_string(needed) + " rows, panel has " +
                        std::to_string(panel.rows()));
    }
    ExperimentResult result;
    result.config = cfg;
    result.config.mode = ExperimentMode::Backtest;
    for (auto seed : cfg.seeds) result.seeds.push_back(backtest_seed(cfg, panel, seed));
    return result;
}

// ---- outputs ----

std::vector<AggregateRow> aggregate_rows(const std::vector<MetricRow>& metrics,
                                         const std::vector<DiagnosticRow>& diagnostics) {
    std::vector<AggregateRow> out;
    std::vector<std::string> methods;
    for (const auto& r : metrics) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
            methods.push_back(r.method);
        }
    }
    using Getter = std::optional<double> (*)(const PerformanceMetrics&);
    const std::vector<std::pair<std::string, Getter>> perf = {
        {"mean", [](const PerformanceMetrics& m) -> std::optional<double> { return m.mean; }},
        {"std", [](const PerformanceMetrics& m) -> std::optional<double> { return m.std; }},
        {"sharpe", [](const PerformanceMetrics& m) { return m.sharpe; }},
        {"cvar5", [](const PerformanceMetrics& m) -> std::optional<double> { return m.cvar5; }},
        {"mdd", [](const PerformanceMetrics& m) -> std::optional<double> { return m.mdd; }}};
    for (const auto& method : methods) {
        for (const auto& [name, get] : perf) {
            std::vector<double> values;
            for (const auto& r : metrics) {
                if (r.method != method) continue;
                if (auto v = get(r.metrics)) values.push_back(*v);
            }
            out.push_back({"performance", method, name, aggregate(values)});
        }
    }
    if (diagnostics.empty()) return out;
    using DiagGetter = double (*)(const DiagnosticRow&);
    const std::vector<std::pair<std::string, DiagGetter>> diag = {
        {"rho", [](const DiagnosticRow& r) { return r.rho; }},
        {"empirical_utility_nominal",
         [](const DiagnosticRow& r) { return r.report.empirical_utility_nominal; }},
        {"robust_objective", [](const DiagnosticRow& r) { return r.report.robust_objective; }},
        {"oracle_utility_nominal",
         [](const DiagnosticRow& r) { return r.report.oracle_utility_nominal; }},
        {"oracle_utility_robust",
         [](const DiagnosticRow& r) { return r.report.oracle_utility_robust; }},
        {"gap_nominal", [](const DiagnosticRow& r) { return r.report.gap_nominal; }},
        {"gap_robust", [](const DiagnosticRow& r) { return r.report.gap_robust; }},
        {"slack_estimate", [](const DiagnosticRow& r) { return r.report.slack_estimate; }},
        {"epsilon_N", [](const DiagnosticRow& r) { return r.report.epsilon_n; }},
        {"coverage_flag",
         [](const DiagnosticRow& r) { return r.report.coverage_flag ? 1.0 : 0.0; }}};
    for (const auto& [name, get] : diag) {
        std::vector<double> values;
        for (const auto& r : diagnostics) values.push_back(get(r));
        out.push_back({"diagnostics", "all", name, aggregate(values)});
    }
    return out;
}

void write_aggregate_csv(const fs::path& path, const std::vector<AggregateRow>& rows) {
    auto out = open_out(path);
    out << "table,method,metric,mean,std,n\n";
    for (const auto& r : rows) {
        out << r.table << ',' << r.method << ',' << r.metric << ',' << format_double(r.value.mean)
            << ',' << format_double(r.value.std) << ',' << r.value.n << '\n';
    }
}

std::vector<MetricRow> read_metric_rows(const fs::path& path) {
    std::vector<MetricRow> rows;
    std::size_t line = 1;
    for (const auto& cells : read_table(path, kMetricHeader)) {
        ++line;
        if (cells.size() != 7) {
            throw DataError(path.string() + ":" + std::to_string(line) + ": expected 7 cells");
        }
        MetricRow r;
        r.seed = static_cast<std::uint64_t>(parse_cell(cells[0], path, line));
        r.method = cells[1];
        r.metrics.mean = parse_cell(cells[2], path, line);
        r.metrics.std = parse_cell(cells[3], path, line);
        if (!cells[4].empty()) r.metrics.sharpe = parse_cell(cells[4], path, line);
        r.metrics.cvar5 = parse_cell(cells[5], path, line);
        r.metrics.mdd = parse_cell(cells[6], path, line);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<DiagnosticRow> read_diagnostic_rows(const fs::path& path) {
    std::vector<DiagnosticRow> rows;
    std::size_t line = 1;
    for (const auto& cells : read_table(path, kDiagnosticHeader)) {
        ++line;
        if (cells.size() != 15) {
            throw DataError(path.string() + ":" + std::to_string(line) + ": expected 15 cells");
        }
        DiagnosticRow row;
        auto num = [&](std::size_t i) { return parse_cell(cells[i], path, line); };
        row.seed = static_cast<std::uint64_t>(num(0));
        row.rho = num(1);
        auto& r = row.report;
        r.empirical_utility_nominal = num(2);
        r.robust_objective = num(3);
        r.oracle_utility_nominal = num(4);
        r.oracle_utility_robust = num(5);
        r.gap_nominal = num(6);
        r.gap_robust = num(7);
        r.oracle_std_error = num(8);
        r.slack_estimate = num(9);
        r.epsilon_n = num(10);
        r.regime = regime_from_string(cells[11]);
        r.coverage_flag = num(12) != 0.0;
        r.coverage_distance = num(13);
        r.n_oracle = static_cast<Index>(num(14));
        rows.push_back(row);
    }
    return rows;
}

void write_outputs(const ExperimentResult& result, const fs::path& dir) {
    fs::create_directories(dir);
    const bool controlled = result.config.mode == ExperimentMode::Controlled;

    std::vector<MetricRow> metrics;
    std::vector<DiagnosticRow> diagnostics;
    json seeds = json::array();
    json excluded = json::array();
    {
        auto daily = open_out(dir / "daily_returns.csv");
        daily << (controlled ? "seed,day,nominal,sro,oracle\n" : "seed,day,nominal,sro\n");
        auto val = open_out(dir / "validation.csv");
        val << "seed,rho,score,selected\n";
        for (const auto& s : result.seeds) {
            if (s.excluded) {
                excluded.push_back({{"seed", s.seed}, {"reason", s.exclusion_reason}});
                continue;
            }
            for (const auto& m : s.methods) metrics.push_back({s.seed, m.method, m.metrics});
            if (s.certificate) diagnostics.push_back({s.seed, s.rho, *s.certificate});
            const std::size_t days = s.methods.front().returns.size();
            for (std::size_t i = 0; i < days; ++i) {
                daily << s.seed << ',' << i;
                for (const auto& m : s.methods) daily << ',' << format_double(m.returns[i]);
                daily << '\n';
            }
            for (const auto& [rho, score] : s.validation) {
                val << s.seed << ',' << format_double(rho) << ',' << format_double(score) << ','
                    << (rho == s.rho ? 1 : 0) << '\n';
            }
            json entry = {{"seed", s.seed}, {"rho", s.rho}};
            if (!s.assets.empty()) entry["assets"] = s.assets;
            if (s.certificate) entry["certificate"] = to_json(*s.certificate);
            seeds.push_back(entry);
        }
    }
    write_metric_rows(dir / "per_seed_metrics.csv", metrics);
    if (controlled) {
        write_diagnostic_rows(dir / "per_seed_diagnostics.csv", diagnostics);
        auto out = open_out(dir / "daily_diagnostics.csv");
        out << "seed,day,empirical_nominal,robust_value,oracle_nominal,oracle_robust,"
               "oracle_oracle\n";
        for (const auto& s : result.seeds) {
            for (const auto& d : s.days) {
                out << s.seed << ',' << d.day << ',' << format_double(d.empirical_nominal) << ','
                    << format_double(d.robust_value) << ',' << format_double(d.oracle_nominal)
                    << ',' << format_double(d.oracle_robust) << ','
                    << format_double(d.oracle_oracle) << '\n';
            }
        }
    }
    const auto agg = aggregate_rows(metrics, diagnostics);
    write_aggregate_csv(dir / "aggregate.csv", agg);

    const json summary = {{"schema_version", kSchemaVersion},
                          {"mode", std::string(to_string(result.config.mode))},
                          {"config", to_json(result.config)},
                          {"seeds", seeds},
                          {"excluded", excluded},
                          {"aggregate", aggregate_json(agg)}};
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << '\n';
}

std::vector<AggregateRow> report_from_directory(const fs::path& in_dir, const fs::path& out_dir) {
    const auto metrics = read_metric_rows(in_dir / "per_seed_metrics.csv");
    std::vector<DiagnosticRow> diagnostics;
    if (fs::exists(in_dir / "per_seed_diagnostics.csv")) {
        diagnostics = read_diagnostic_rows(in_dir / "per_seed_diagnostics.csv");
    }
    const auto rows = aggregate_rows(metrics, diagnostics);
    fs::create_directories(out_dir);
    write_aggregate_csv(out_dir / "aggregate.csv", rows);
    return rows;
}

}  // namespace sro
