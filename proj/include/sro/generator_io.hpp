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

#include "sro/generator.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace sro {

inline constexpr int kGeneratorSchemaVersion = 1;

/// {schema_version, kind, dims, theta, [scaling]} with theta in flattening order.
nlohmann::json generator_to_json(const GeneratorSpec& spec);
GeneratorSpec generator_from_json(const nlohmann::json& doc);

void save_generator(const GeneratorSpec& spec, const std::filesystem::path& path);
GeneratorSpec load_generator(const std::filesystem::path& path);

}  // namespace sro
