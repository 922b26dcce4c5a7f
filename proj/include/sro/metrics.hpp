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

// Out-of-sample performance summaries.
#pragma once

#include <optional>
#include <span>
#include <vector>

namespace sro {

struct PerformanceMetrics {
    double mean = 0.0;
    double std = 0.0;              ///< sample standard deviation (T - 1)
    std::optional<double> sharpe;  ///< mean / std per period; missing when std == 0
    double cvar5 = 0.0;            ///< mean of the ceil(T/20) smallest returns (signed)
    double mdd = 0.0;              ///< largest fractional fall of compounded wealth from its peak
};

PerformanceMetrics compute_metrics(std::span<const double> returns);

/// Mean and sample std of per-seed values.
struct SeedAggregate {
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;
};

SeedAggregate aggregate(std::span<const double> values);

}  // namespace sro
