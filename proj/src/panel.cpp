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

#include "sro/panel.hpp"

#include "sro/errors.hpp"
#include "sro/format.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>

namespace sro {
namespace {

constexpr std::array<const char*, 50> kUniverse = {
    "AAPL", "MSFT", "GOOGL", "AMZN", "META", "TSLA", "NVDA", "ADBE", "INTC", "CRM",
    "AMD",  "CSCO", "ORCL",  "IBM",  "QCOM", "JPM",  "BAC",  "WFC",  "C",    "GS",
    "MS",   "V",    "MA",    "AXP",  "BLK",  "JNJ",  "PFE",  "MRK",  "UNH",  "ABBV",
    "TMO",  "ABT",  "LLY",   "DHR",  "BMY",  "KO",   "PG",   "PEP",  "WMT",  "DIS",
    "HD",   "MCD",  "NKE",   "SBUX", "COST", "XOM",  "CVX",  "VZ",   "T",    "NFLX"};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_integer(std::string_view s, long long& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Negative when a < b. Integer dates compare numerically, others as text.
int compare_dates(const std::string& a, const std::string& b) {
    long long ia = 0;
    long long ib = 0;
    if (parse_integer(a, ia) && parse_integer(b, ib)) return ia < ib ? -1 : (ia > ib ? 1 : 0);
    return a.compare(b);
}

std::string day_label(Index i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "d%06ld", static_cast<long>(i));
    return buf;
}

}  // namespace

ReturnPanel ReturnPanel::select_assets(const std::vector<Index>& columns) const {
    ReturnPanel out;
    out.dates = dates;
    out.returns.resize(rows(), static_cast<Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const Index j = columns[k];
        if (j < 0 || j >= assets()) throw ShapeError("asset index out of range");
        out.tickers.push_back(tickers[static_cast<std::size_t>(j)]);
        out.returns.col(static_cast<Index>(k)) = returns.col(j);
    }
    return out;
}

ReturnPanel ReturnPanel::slice_rows(Index begin, Index end) const {
    if (begin < 0 || end > rows() || begin > end) throw ShapeError("row slice out of range");
    ReturnPanel out;
    out.dates.assign(dates.begin() + begin, dates.begin() + end);
    out.tickers = tickers;
    out.returns = returns.middleRows(begin, end - begin);
    return out;
}

ReturnPanel parse_csv(std::istream& in, Index min_rows) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV: missing header");
    const auto header = split(line);
    if (header.size() < 2 || header[0] != "date") {
        throw DataError("CSV header must be 'date,<ticker>,...'");
    }
    ReturnPanel panel;
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) throw DataError("CSV header has an empty ticker name");
        panel.tickers.emplace_back(header[j]);
    }
    const std::size_t d = panel.tickers.size();

    std::vector<double> values;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != d + 1) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(d + 1) + " cells, got " +
                            std::to_string(cells.size()));
        }
        if (cells[0].empty()) throw DataError("line " + std::to_string(line_no) + ": blank date");
        std::string date(cells[0]);
        if (!panel.dates.empty()) {
            const int cmp = compare_dates(panel.dates.back(), date);
            if (cmp == 0) {
                throw DataError("line " + std::to_string(line_no) + ": duplicate date " + date);
            }
            if (cmp > 0) {
                throw DataError("line " + std::to_string(line_no) + ": date " + date +
                                " is not after " + panel.dates.back());
            }
        }
        for (std::size_t j = 1; j <= d; ++j) {
            double v = 0.0;
            const auto cell = cells[j];
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
                !std::isfinite(v)) {
                throw DataError("line " + std::to_string(line_no) + ": missing or non-numeric " +
                                "value for " + panel.tickers[j - 1]);
            }
            values.push_back(v);
        }
        panel.dates.push_back(std::move(date));
    }
    const Index t = static_cast<Index>(panel.dates.size());
    if (t < min_rows) {
        throw DataError("panel has " + std::to_string(t) + " rows, need at least " +
                        std::to_string(min_rows));
    }
    panel.returns =
        Eigen::Map<const RowMatrix>(values.data(), t, static_cast<Index>(d));
    return panel;
}

ReturnPanel ingest_csv(const std::filesystem::path& path, Index min_rows) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    return parse_csv(in, min_rows);
}

void emit_csv(std::ostream& out, const ReturnPanel& panel) {
    out << "date";
    for (const auto& t : panel.tickers) out << ',' << t;
    out << '\n';
    for (Index i = 0; i < panel.rows(); ++i) {
        out << panel.dates[static_cast<std::size_t>(i)];
        for (Index j = 0; j < panel.assets(); ++j) out << ',' << format_double(panel.returns(i, j));
        out << '\n';
    }
}

void emit_csv(const std::filesystem::path& path, const ReturnPanel& panel) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    emit_csv(out, panel);
}

Matrix clip_returns(const Matrix& returns, double bound) {
    return returns.cwiseMax(-bound).cwiseMin(bound);
}

Standardization standardization_stats(const Matrix& returns, Index rows) {
    if (returns.rows() < rows || rows < 2) {
        throw DataError("standardization needs " + std::to_string(rows) + " rows, panel has " +
                        std::to_string(returns.rows()));
    }
    const auto head = returns.topRows(rows);
    Standardization s;
    s.mean = head.colwise().mean().transpose();
    const Matrix centered = head.rowwise() - s.mean.transpose();
    s.scale = (centered.colwise().squaredNorm().transpose() / static_cast<double>(rows - 1))
                  .cwiseSqrt()
                  .cwiseMax(kStdFloor);
    return s;
}

Preprocessed preprocess(const ReturnPanel& panel) {
    if (panel.rows() < kStandardizationRows) {
        throw DataError("preprocessing needs at least " + std::to_string(kStandardizationRows) +
                        " rows, panel has " + std::to_string(panel.rows()));
    }
    Preprocessed out;
    out.clipped = panel;
    out.clipped.returns = clip_returns(panel.returns);
    out.stats = standardization_stats(out.clipped.returns);
    return out;
}

Vector make_context(const Matrix& returns, Index t, Index lookback,
                    const Standardization& stats) {
    if (lookback < 1) throw ShapeError("lookback must be at least 1");
    if (t < lookback) {
        throw ShapeError("context at t = " + std::to_string(t) + " needs t >= lookback " +
                         std::to_string(lookback));
    }
    if (t > returns.rows()) throw ShapeError("context time beyond the end of the panel");
    const Index d = returns.cols();
    Vector x(lookback * d);
    for (Index l = 0; l < lookback; ++l) {
        const auto row = returns.row(t - lookback + l).transpose();
        x.segment(l * d, d) = ((row - stats.mean).array() / stats.scale.array()).matrix();
    }
    return x;
}

SupervisedRows supervised_rows(const Matrix& returns, Index begin, Index end, Index lookback,
                               const Standardization& stats) {
    if (begin < lookback || end > returns.rows() || begin >= end) {
        throw ShapeError("supervised rows need lookback <= begin < end <= T");
    }
    const Index n = end - begin;
    const Index d = returns.cols();
    SupervisedRows out;
    out.contexts.resize(n, lookback * d);
    out.targets.resize(n, d);
    for (Index i = 0; i < n; ++i) {
        const Index t = begin + i;
        out.contexts.row(i) = make_context(returns, t, lookback, stats).transpose();
        out.targets.row(i) = returns.row(t);
    }
    return out;
}

double realized_return(const Vector& w, const Vector& r_next) {
    if (w.size() != r_next.size()) throw ShapeError("realized return: weight/return size mismatch");
    return w.dot(r_next.array().exp().matrix()) - 1.0;
}

GeneratorSpec calibrate_conditional(const Matrix& clipped, Index begin, Index end,
                                    Index lookback, Index latent_dim,
                                    const Standardization& stats, bool* ridge_used) {
    auto rows = supervised_rows(clipped, begin, end, lookback, stats);
    const Matrix standardized =
        ((rows.targets.rowwise() - stats.mean.transpose()).array().rowwise() /
         stats.scale.transpose().array())
            .matrix();
    const auto fit = calibrate_affine(standardized, rows.contexts, latent_dim);
    if (ridge_used) *ridge_used = fit.ridge_used;
    return fit.params.to_spec(stats);
}

GeneratorSpec synthetic_affine_model(Index assets, Index lookback, Index latent_dim,
                                     std::uint64_t seed) {
    if (assets < 1 || lookback < 1 || latent_dim < 1) {
        throw ShapeError("synthetic model needs positive dimensions");
    }
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const Index f = lookback * assets;
    AffineGaussianParams p;
    p.A = Matrix::Zero(assets, f);
    for (Index j = 0; j < assets; ++j) {
        for (Index k = 0; k < f; ++k) p.A(j, k) = 0.01 * normal(engine);
        p.A(j, (lookback - 1) * assets + j) += 0.05;  // own first lag
    }
    Matrix corr = Matrix::Constant(assets, assets, 0.3);
    corr.diagonal().setOnes();
    p.B = Matrix::Zero(assets, latent_dim);
    if (latent_dim >= assets) {
        p.B.leftCols(assets) = corr.llt().matrixL();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(corr);
        for (Index k = 0; k < latent_dim; ++k) {
            const Index src = assets - 1 - k;
            p.B.col(k) = eig.eigenvectors().col(src) * std::sqrt(eig.eigenvalues()(src));
        }
    }
    p.c.resize(assets);
    for (Index j = 0; j < assets; ++j) p.c(j) = 0.03 + 0.04 * normal(engine);

    Standardization s;
    s.mean = Vector::Constant(assets, 2e-4);
    s.scale.resize(assets);
    for (Index j = 0; j < assets; ++j) s.scale(j) = 0.01 + 0.01 * uniform(engine);
    return p.to_spec(std::move(s));
}

Matrix simulate_path(const GeneratorSpec& gen, const Matrix& history, Index lookback,
                     Index steps, std::uint64_t seed) {
    const Index d = gen.dims().output_dim;
    if (history.cols() != d) throw ShapeError("history columns must match generator output");
    if (history.rows() < lookback) throw ShapeError("history shorter than the lookback");
    if (gen.dims().context_dim != lookback * d) {
        throw ShapeError("generator context dimension does not match lookback * assets");
    }
    const Standardization stats = gen.scaling().value_or(
        Standardization{Vector::Zero(d), Vector::Ones(d)});

    Matrix series(lookback + steps, d);
    series.topRows(lookback) = clip_returns(history.bottomRows(lookback));
    Matrix path(steps, d);
    const auto batch = sample_batch(seed, std::max<Index>(steps, 1), gen.dims().latent_dim);
    for (Index t = 0; t < steps; ++t) {
        const Vector x = make_context(series, lookback + t, lookback, stats);
        const Vector y = forward(gen, batch.draws.row(t).transpose(), x);
        path.row(t) = y.transpose();
        series.row(lookback + t) = clip_returns(y.transpose());
    }
    return path;
}

ReturnPanel synthesize_panel(const GeneratorSpec& gen, Index lookback, Index rows,
                             std::uint64_t seed) {
    constexpr Index kBurnIn = 200;
    const Index d = gen.dims().output_dim;
    const Matrix history = Matrix::Zero(lookback, d);
    const Matrix path = simulate_path(gen, history, lookback, kBurnIn + rows, seed);
    ReturnPanel panel;
    panel.returns = path.bottomRows(rows);
    for (Index i = 0; i < rows; ++i) panel.dates.push_back(day_label(i + 1));
    for (Index j = 0; j < d; ++j) {
        panel.tickers.push_back(j < static_cast<Index>(kUniverse.size())
                                    ? kUniverse[static_cast<std::size_t>(j)]
                                    : "S" + std::to_string(j));
    }
    return panel;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace sro
