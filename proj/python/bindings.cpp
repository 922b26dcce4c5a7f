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
#include "sro/experiment.hpp"
#include "sro/generator_io.hpp"
#include "sro/geometry.hpp"
#include "sro/metrics.hpp"
#include "sro/panel.hpp"
#include "sro/solvers.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

sro::ExperimentConfig parse_config(const std::string& text) {
    return sro::config_from_json(nlohmann::json::parse(text));
}

py::list aggregate_list(const std::vector<sro::AggregateRow>& rows) {
    py::list out;
    for (const auto& r : rows) {
        out.append(py::dict("table"_a = r.table, "method"_a = r.method, "metric"_a = r.metric,
                            "mean"_a = r.value.mean, "std"_a = r.value.std, "n"_a = r.value.n));
    }
    return out;
}

py::list run_and_write(const std::string& config_json, const std::optional<std::string>& out_dir,
                       bool backtest) {
    auto cfg = parse_config(config_json);
    sro::ExperimentResult result;
    {
        py::gil_scoped_release release;
        result = backtest ? sro::run_backtest(cfg) : sro::run_controlled(cfg);
        if (out_dir) sro::write_outputs(result, *out_dir);
    }
    std::vector<sro::MetricRow> metrics;
    std::vector<sro::DiagnosticRow> diagnostics;
    for (const auto& s : result.seeds) {
        if (s.excluded) continue;
        for (const auto& m : s.methods) metrics.push_back({s.seed, m.method, m.metrics});
        if (s.certificate) diagnostics.push_back({s.seed, s.rho, *s.certificate});
    }
    return aggregate_list(sro::aggregate_rows(metrics, diagnostics));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sampler-robust portfolio optimization core";

    py::register_exception<sro::ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<sro::UnsupportedExponent>(m, "UnsupportedExponent", PyExc_ValueError);
    py::register_exception<sro::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<sro::DataError>(m, "DataError", PyExc_RuntimeError);
    py::register_exception<sro::SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<sro::GeneratorSpec>(m, "Generator")
        .def(py::init([](const std::string& kind, sro::Index context_dim, sro::Index latent_dim,
                         sro::Index output_dim, const sro::Vector& theta, sro::Index hidden_dim,
                         std::optional<sro::Vector> mean, std::optional<sro::Vector> scale) {
                 std::optional<sro::Standardization> scaling;
                 if (mean || scale) {
                     if (!mean || !scale) throw sro::ConfigError("pass both mean and scale");
                     scaling = sro::Standardization{*mean, *scale};
                 }
                 return sro::GeneratorSpec(sro::generator_kind_from_string(kind),
                                           {context_dim, latent_dim, output_dim, hidden_dim},
                                           theta, scaling);
             }),
             "kind"_a, "context_dim"_a, "latent_dim"_a, "output_dim"_a, "theta"_a,
             "hidden_dim"_a = 0, "mean"_a = py::none(), "scale"_a = py::none())
        .def_property_readonly("kind",
                               [](const sro::GeneratorSpec& g) { return std::string(sro::to_string(g.kind())); })
        .def_property_readonly("theta", [](const sro::GeneratorSpec& g) { return g.theta(); })
        .def_property_readonly("context_dim", [](const sro::GeneratorSpec& g) { return g.dims().context_dim; })
        .def_property_readonly("latent_dim", [](const sro::GeneratorSpec& g) { return g.dims().latent_dim; })
        .def_property_readonly("output_dim", [](const sro::GeneratorSpec& g) { return g.dims().output_dim; })
        .def("with_theta", &sro::GeneratorSpec::with_theta, "theta"_a)
        .def("to_json", [](const sro::GeneratorSpec& g) { return sro::generator_to_json(g).dump(); })
        .def_static("from_json",
                    [](const std::string& s) { return sro::generator_from_json(nlohmann::json::parse(s)); })
        .def_static("load", &sro::load_generator, "path"_a)
        .def("save", [](const sro::GeneratorSpec& g, const std::filesystem::path& p) { sro::save_generator(g, p); },
             "path"_a);

    m.def("synthetic_affine_model", &sro::synthetic_affine_model, "assets"_a, "lookback"_a,
          "latent_dim"_a, "seed"_a);
    m.def("forward", &sro::forward, "generator"_a, "z"_a, "x"_a);
    m.def("forward_batch", &sro::forward_batch, "generator"_a, "draws"_a, "x"_a,
          "Rows of `draws` are latent vectors; returns one output row per draw.");
    m.def("vjp_theta", &sro::vjp_theta, "generator"_a, "z"_a, "x"_a, "upstream"_a);

    m.def("utility", &sro::utility, "pi"_a, "lam"_a);
    m.def("empirical_utility", &sro::empirical_utility, "w"_a, "scenarios"_a, "lam"_a);
    m.def("grad_w", &sro::grad_w, "w"_a, "scenarios"_a, "lam"_a);
    m.def("grad_y", &sro::grad_y, "w"_a, "y"_a, "lam"_a);

    m.def("lp_norm", &sro::lp_norm, "v"_a, "p"_a);
    m.def("project_simplex", &sro::project_simplex, "v"_a);
    m.def("project_ball",
          [](const sro::Vector& eps, double radius, double p) {
              return sro::project_ball(eps, {sro::Vector::Zero(eps.size()), radius, p});
          },
          "eps"_a, "radius"_a, "p"_a = 2.0);
    m.def("dual_norm_step",
          [](const sro::Vector& g, double radius, double p) {
              return sro::dual_norm_step(g, {sro::Vector::Zero(g.size()), radius, p}).eps;
          },
          "g"_a, "radius"_a, "p"_a = 2.0);

    py::class_<sro::RobustConfig>(m, "RobustConfig")
        .def(py::init<>())
        .def_readwrite("rho", &sro::RobustConfig::rho)
        .def_readwrite("p", &sro::RobustConfig::p)
        .def_readwrite("alpha_theta", &sro::RobustConfig::alpha_theta)
        .def_readwrite("alpha_omega", &sro::RobustConfig::alpha_omega)
        .def_readwrite("iterations", &sro::RobustConfig::iterations)
        .def_readwrite("batch_size", &sro::RobustConfig::batch_size)
        .def_readwrite("inner_iterations", &sro::RobustConfig::inner_iterations)
        .def_readwrite("snapshot_stride", &sro::RobustConfig::snapshot_stride)
        .def_readwrite("seed", &sro::RobustConfig::seed);

    py::class_<sro::SolveResult>(m, "SolveResult")
        .def_readonly("weights", &sro::SolveResult::weights)
        .def_property_readonly("objective",
                               [](const sro::SolveResult& r) { return r.trace.objective; })
        .def_property_readonly("theta_distance",
                               [](const sro::SolveResult& r) { return r.trace.theta_distance; });

    m.def("solve",
          [](const std::string& solver, const sro::GeneratorSpec& gen, const sro::Vector& x,
             const sro::RobustConfig& cfg, double lam) {
              const sro::DecisionProblem problem{gen.dims().output_dim, lam};
              py::gil_scoped_release release;
              return sro::solve(sro::solver_kind_from_string(solver), gen, x, problem, cfg);
          },
          "solver"_a, "generator"_a, "x"_a, "config"_a, "lam"_a = 10.0,
          "solver is 'nominal', 'first-order' or 'two-timescale'.");
    m.def("robust_objective",
          [](const sro::GeneratorSpec& gen, const sro::Vector& x, const sro::Vector& w,
             const sro::RobustConfig& cfg, double lam) {
              return sro::robust_objective(gen, x, {gen.dims().output_dim, lam}, w, cfg);
          },
          "generator"_a, "x"_a, "w"_a, "config"_a, "lam"_a = 10.0);
    m.def("nominal_objective",
          [](const sro::GeneratorSpec& gen, const sro::Vector& x, const sro::Vector& w,
             const sro::RobustConfig& cfg, double lam) {
              return sro::nominal_objective(gen, x, {gen.dims().output_dim, lam}, w, cfg);
          },
          "generator"_a, "x"_a, "w"_a, "config"_a, "lam"_a = 10.0);

    m.def("oracle_utility",
          [](const sro::GeneratorSpec& oracle, const sro::Vector& x, const sro::Vector& w,
             sro::Index n_oracle, std::uint64_t seed, double lam) {
              const auto est = sro::oracle_utility(oracle, x, {oracle.dims().output_dim, lam}, w,
                                                   n_oracle, seed);
              return py::make_tuple(est.mean, est.std_error);
          },
          "oracle"_a, "x"_a, "w"_a, "n_oracle"_a = sro::kDefaultOracleSamples, "seed"_a = 0,
          "lam"_a = 10.0, "Returns (mean, standard error).");
    m.def("slack_estimate",
          [](const sro::GeneratorSpec& oracle, const sro::GeneratorSpec& nominal,
             const sro::Vector& x, const sro::RobustConfig& cfg, sro::Index grid_size,
             sro::Index n_oracle, std::uint64_t seed, double lam) {
              sro::SlackOptions opt;
              opt.grid_size = grid_size;
              opt.grid_seed = seed;
              opt.n_oracle = n_oracle;
              opt.oracle_seed = seed + 1;
              const auto s = sro::slack_estimate(oracle, nominal, x,
                                                 {nominal.dims().output_dim, lam}, cfg, opt);
              return py::dict("mu_bar"_a = s.mu_bar, "std_error"_a = s.std_error,
                              "argmin"_a = s.argmin, "covered"_a = s.coverage.covered,
                              "distance"_a = s.coverage.distance);
          },
          "oracle"_a, "nominal"_a, "x"_a, "config"_a, "grid_size"_a = sro::kDefaultSlackGrid,
          "n_oracle"_a = sro::kDefaultOracleSamples, "seed"_a = 0, "lam"_a = 10.0);
    m.def("epsilon_n",
          [](const sro::GeneratorSpec& nominal, double lam, double return_bound, double rho,
             double p, double delta, sro::Index n) {
              return sro::certificate_constants(nominal, lam, return_bound, rho, p, delta, n)
                  .epsilon_n;
          },
          "nominal"_a, "lam"_a = 10.0, "return_bound"_a = sro::kDefaultReturnBound, "rho"_a,
          "p"_a = 2.0, "delta"_a = 0.05, "n"_a = 1000);
    m.def("classify_regime",
          [](double mu_bar, double eps, double tau) {
              return std::string(sro::to_string(sro::classify_regime(mu_bar, eps, tau)));
          },
          "mu_bar"_a, "epsilon_n"_a, "tau"_a = sro::kRegimeThreshold);

    m.def("compute_metrics",
          [](const std::vector<double>& r) {
              const auto mt = sro::compute_metrics(r);
              return py::dict("mean"_a = mt.mean, "std"_a = mt.std, "sharpe"_a = mt.sharpe,
                              "cvar5"_a = mt.cvar5, "mdd"_a = mt.mdd);
          },
          "returns"_a);

    m.def("run_controlled",
          [](const std::string& cfg, std::optional<std::string> out) {
              return run_and_write(cfg, out, false);
          },
          "config_json"_a, "out_dir"_a = py::none(),
          "Runs the controlled study; returns the aggregate rows and optionally writes all outputs.");
    m.def("run_backtest",
          [](const std::string& cfg, std::optional<std::string> out) {
              return run_and_write(cfg, out, true);
          },
          "config_json"_a, "out_dir"_a = py::none());
}
