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

#include "sro/screen.hpp"

#include "sro/errors.hpp"

#include <cmath>

namespace sro {
namespace {

void moments(const Matrix& m, Vector& mean, Vector& var) {
    mean = m.colwise().mean().transpose();
    const Matrix centered = m.rowwise() - mean.transpose();
    var = centered.colwise().squaredNorm().transpose() / static_cast<double>(m.rows() - 1);
}

}  // namespace

ScreenResult screen_samples(const Matrix& generated, const Matrix& observed) {
    if (generated.cols() != observed.cols()) {
        throw ShapeError("screen: generated and observed asset counts differ");
    }
    if (generated.rows() < 2 || observed.rows() < 2) {
        throw ShapeError("screen: need at least two rows of each sample");
    }
    ScreenResult r;
    Vector gen_var;
    Vector obs_var;
    moments(generated, r.generated_mean, gen_var);
    moments(observed, r.observed_mean, obs_var);
    r.generated_std = gen_var.cwiseSqrt();
    r.observed_std = obs_var.cwiseSqrt();
    for (Index j = 0; j < generated.cols(); ++j) {
        // std_gen > 0.1 std_obs, compared on variances
        if (!(100.0 * gen_var(j) > obs_var(j))) {
            r.passed = false;
            r.failures.push_back("asset " + std::to_string(j) +
                                 ": generated std not above 10% of observed");
        }
        if (std::abs(r.generated_mean(j) - r.observed_mean(j)) > 5.0 * r.observed_std(j)) {
            r.passed = false;
            r.failures.push_back("asset " + std::to_string(j) +
                                 ": mean differs by more than 5 observed stds");
        }
    }
    return r;
}

ScreenResult validity_screen(const GeneratorSpec& gen, const Matrix& contexts,
                             const Matrix& observed, std::uint64_t seed) {
    if (contexts.rows() != observed.rows()) {
        throw ShapeError("screen: context and observation row counts differ");
    }
    const auto batch = sample_batch(seed, contexts.rows(), gen.dims().latent_dim);
    Matrix generated(contexts.rows(), gen.dims().output_dim);
    for (Index i = 0; i < contexts.rows(); ++i) {
        generated.row(i) =
            forward(gen, batch.draws.row(i).transpose(), contexts.row(i).transpose()).transpose();
    }
    return screen_samples(generated, observed);
}

}  // namespace sro
