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

#include "sro/metrics.hpp"

#include "sro/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sro {

PerformanceMetrics compute_metrics(std::span<const double> returns) {
    const std::size_t n = returns.size();
    if (n < 2) throw ConfigError("metrics need at least two returns");
    PerformanceMetrics m;
    double sum = 0.0;
    for (double r : returns) sum += r;
    m.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double r : returns) ss += (r - m.mean) * (r - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(n - 1));
    if (m.std > 0.0) m.sharpe = m.mean / m.std;

    std::vector<double> sorted(returns.begin(), returns.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t tail = (n + 19) / 20;
    double tail_sum = 0.0;
    for (std::size_t i = 0; i < tail; ++i) tail_sum += sorted[i];
    m.cvar5 = tail_sum / static_cast<double>(tail);

    double wealth = 1.0;
    double peak = 1.0;
    for (double r : returns) {
        wealth *= 1.0 + r;
        peak = std::max(peak, wealth);
        m.mdd = std::max(m.mdd, (peak - wealth) / peak);
    }
    return m;
}

SeedAggregate aggregate(std::span<const double> values) {
    SeedAggregate a;
    a.n = values.size();
    if (a.n == 0) return a;
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(a.n);
    if (a.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.std = std::sqrt(ss / static_cast<double>(a.n - 1));
    }
    return a;
}

}  // namespace sro
