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

#pragma once

#include <stdexcept>
#include <string>

namespace sro {

/// Dimension mismatch between an input and the declared shape.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Norm exponent outside the support of the requested operation.
class UnsupportedExponent : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration value (step sizes, budgets, radii).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (CSV panels, JSON documents).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure inside an iterative solver.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, long iteration)
        : std::runtime_error(what + " at iteration " + std::to_string(iteration)),
          iteration_(iteration) {}

    long iteration() const noexcept { return iteration_; }

private:
    long iteration_;
};

}  // namespace sro
