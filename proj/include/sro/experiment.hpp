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

// End-to-end studies.
//
// controlled: an oracle generator simulates a synthetic path; a nominal
//   generator is recalibrated on a training window, the radius is picked on
//   a validation window and nominal / robust / oracle decisions are compared
//   day by day on the test window, together with the certificate
//   diagnostics that the known oracle makes available.
// backtest: the same daily loop on a return panel (real or synthetic) with a
//   seeded random asset subset and no oracle.
#pragma once

#include "sro/certificate.hpp"
#include "sro/generator.hpp"
#include "sro/metrics.hpp"
#include "sro/panel.hpp"
#include "sro/solvers.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sro {

enum class ExperimentMode { Controlled, Backtest };
enum class SelectionCriterion { Sharpe, MeanUtility, Cvar5 };

struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::Controlled;
    Index lookback = kDefaultLookback;
    Index latent_dim = 8;
    double lambda = kDefaultRiskAversion;
    SolverKind solver = SolverKind::TwoTimescale;
    RobustConfig robust;  ///< rho is replaced by the validated value
    std::vector<double> rho_grid{0.1, 0.2, 0.3, 0.5};
    SelectionCriterion selection = SelectionCriterion::Sharpe;
    std::vector<std::uint64_t> seeds;  ///< defaults to 40..59
    bool screen = true;
    Index validation_days = 100;
    Index test_days = 100;

    // certificate diagnostics (controlled)
    Index n_oracle = kDefaultOracleSamples;
    Index slack_grid = kDefaultSlackGrid;
    double delta = 0.05;
    double return_bound = kDefaultReturnBound;

    // data sources
    std::string panel_path;   ///< CSV; controlled: oracle calibration data
    std::string oracle_path;  ///< controlled: generator JSON, overrides panel
    Index synthetic_assets = 5;
    Index synthetic_rows = 1300;
    std::uint64_t synthetic_seed = 7;

    // controlled
    Index path_length = 1000;
    Index retrain_window = 800;

    // backtest
    Index train_rows = 1000;
    Index universe_size = 10;

    bool verbose = false;

    ExperimentConfig();
    void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

struct MethodResult {
    std::string method;  ///< "nominal", "sro" or "oracle"
    std::vector<double> returns;
    PerformanceMetrics metrics;
};

struct DailyDiagnostics {
    Index day = 0;
    double empirical_nominal = 0.0;
    double robust_value = 0.0;
    double oracle_nominal = 0.0;
    double oracle_robust = 0.0;
    double oracle_oracle = 0.0;
};

struct SeedResult {
    std::uint64_t seed = 0;
    bool excluded = false;
    std::string exclusion_reason;
    std::vector<Index> assets;  ///< backtest universe (column indices)
    double rho = 0.0;
    std::vector<std::pair<double, double>> validation;  ///< (rho, criterion)
    std::vector<MethodResult> methods;
    std::vector<DailyDiagnostics> days;
    std::optional<CertificateReport> certificate;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SeedResult> seeds;
};

struct DailyDecisions {
    Vector nominal;
    Vector robust;
};

/// Decisions for day t from rows [0, t) of the clipped series only.
DailyDecisions decide_day(const GeneratorSpec& nominal, const Matrix& clipped, Index t,
                          Index lookback, SolverKind solver, RobustConfig cfg, double rho,
                          double lambda, std::uint64_t day_seed);

/// Argmax of the criterion over the radius grid (first wins ties).
double select_radius(const std::vector<std::pair<double, double>>& scores);

double selection_score(SelectionCriterion criterion, const std::vector<double>& returns,
                       double lambda);

ExperimentResult run_controlled(const ExperimentConfig& cfg);
ExperimentResult run_backtest(const ExperimentConfig& cfg);

/// One row of per_seed_metrics.csv.
struct MetricRow {
    std::uint64_t seed = 0;
    std::string method;
    PerformanceMetrics metrics;
};

/// One row of per_seed_diagnostics.csv.
struct DiagnosticRow {
    std::uint64_t seed = 0;
    double rho = 0.0;
    CertificateReport report;
};

struct AggregateRow {
    std::string table;  ///< "performance" or "diagnostics"
    std::string method;
    std::string metric;
    SeedAggregate value;
};

std::vector<AggregateRow> aggregate_rows(const std::vector<MetricRow>& metrics,
                                         const std::vector<DiagnosticRow>& diagnostics);

/// Writes per_seed_metrics.csv, daily_returns.csv, validation.csv,
/// aggregate.csv, summary.json and (controlled) per_seed_diagnostics.csv and
/// daily_diagnostics.csv into `dir`.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// Recomputes aggregate.csv in `out_dir` from the per-seed CSVs in `in_dir`.
std::vector<AggregateRow> report_from_directory(const std::filesystem::path& in_dir,
                                                const std::filesystem::path& out_dir);

std::vector<MetricRow> read_metric_rows(const std::filesystem::path& path);
std::vector<DiagnosticRow> read_diagnostic_rows(const std::filesystem::path& path);
void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);

}  // namespace sro
