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

// Post-calibration validity screen: a moment-based collapse check comparing
// generated and observed returns over the training window.
#pragma once

#include "sro/generator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sro {

struct ScreenResult {
    bool passed = true;
    Vector generated_mean;
    Vector generated_std;
    Vector observed_mean;
    Vector observed_std;
    std::vector<std::string> failures;
};

/// Passes iff every generated std exceeds 10% of the observed std and every
/// |mean difference| is at most 5 observed stds.
ScreenResult screen_samples(const Matrix& generated, const Matrix& observed);

/// One generated draw per training context, compared with the observed rows.
ScreenResult validity_screen(const GeneratorSpec& gen, const Matrix& contexts,
                             const Matrix& observed, std::uint64_t seed);

}  // namespace sro
