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

// Return panels: CSV ingestion, preprocessing and rolling contexts.
#pragma once

#include "sro/generator.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sro {

inline constexpr Index kDefaultLookback = 10;
inline constexpr double kReturnClip = 0.1;
inline constexpr Index kStandardizationRows = 100;
inline constexpr double kStdFloor = 1e-8;

struct ReturnPanel {
    std::vector<std::string> dates;
    std::vector<std::string> tickers;
    Matrix returns;  ///< T x d log returns

    Index rows() const noexcept { return returns.rows(); }
    Index assets() const noexcept { return returns.cols(); }

    ReturnPanel select_assets(const std::vector<Index>& columns) const;
    ReturnPanel slice_rows(Index begin, Index end) const;
};

/// Parses "date,<ticker>,..." with one row per day. Rejects blank or
/// non-numeric cells (naming the line), duplicate or decreasing dates and
/// panels shorter than min_rows.
ReturnPanel parse_csv(std::istream& in, Index min_rows = kDefaultLookback + 2);
ReturnPanel ingest_csv(const std::filesystem::path& path, Index min_rows = kDefaultLookback + 2);

void emit_csv(std::ostream& out, const ReturnPanel& panel);
void emit_csv(const std::filesystem::path& path, const ReturnPanel& panel);

struct Preprocessed {
    ReturnPanel clipped;
    Standardization stats;  ///< from the first 100 clipped rows only
};

Matrix clip_returns(const Matrix& returns, double bound = kReturnClip);

/// Per-asset mean and sample std of the first `rows` rows; std floored at 1e-8.
Standardization standardization_stats(const Matrix& returns, Index rows = kStandardizationRows);

Preprocessed preprocess(const ReturnPanel& panel);

/// Rows t-L .. t-1 of `returns`, standardized and flattened time-major.
Vector make_context(const Matrix& returns, Index t, Index lookback, const Standardization& stats);

/// Contexts (T' x L*d) and next-row targets (T' x d) for every t in [begin, end).
struct SupervisedRows {
    Matrix contexts;
    Matrix targets;
};

SupervisedRows supervised_rows(const Matrix& returns, Index begin, Index end, Index lookback,
                               const Standardization& stats);

/// w^T exp(r_next) - 1 on raw log returns.
double realized_return(const Vector& w, const Vector& r_next);

/// Calibrated generator whose inputs and outputs share `stats`.
GeneratorSpec calibrate_conditional(const Matrix& clipped, Index begin, Index end,
                                    Index lookback, Index latent_dim,
                                    const Standardization& stats, bool* ridge_used = nullptr);

/// Synthetic AffineGaussian return model in standardized parameters:
/// weak own-lag predictability, a one-factor correlation structure and
/// daily-scale output standardization.
GeneratorSpec synthetic_affine_model(Index assets, Index lookback, Index latent_dim,
                                     std::uint64_t seed);

/// Autoregressive rollout: each step draws z, evaluates the generator on the
/// standardized (clipped) trailing window and appends the raw output.
/// `history` supplies at least `lookback` rows preceding the path.
Matrix simulate_path(const GeneratorSpec& gen, const Matrix& history, Index lookback,
                     Index steps, std::uint64_t seed);

/// Panel of `rows` simulated days (after burn-in) from a synthetic model.
ReturnPanel synthesize_panel(const GeneratorSpec& gen, Index lookback, Index rows,
                             std::uint64_t seed);

/// Deterministic sub-seed for (base, stream, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace sro
