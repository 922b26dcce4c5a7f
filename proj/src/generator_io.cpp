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

#include "sro/generator_io.hpp"

#include "sro/errors.hpp"

#include <fstream>
#include <vector>

namespace sro {
namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

nlohmann::json generator_to_json(const GeneratorSpec& spec) {
    nlohmann::json doc;
    doc["schema_version"] = kGeneratorSchemaVersion;
    doc["kind"] = std::string(to_string(spec.kind()));
    const auto& dims = spec.dims();
    doc["dims"] = {{"context", dims.context_dim},
                   {"latent", dims.latent_dim},
                   {"output", dims.output_dim},
                   {"hidden", dims.hidden_dim}};
    doc["theta"] = to_std(spec.theta());
    if (const auto& s = spec.scaling()) {
        doc["scaling"] = {{"mean", to_std(s->mean)}, {"std", to_std(s->scale)}};
    }
    return doc;
}

GeneratorSpec generator_from_json(const nlohmann::json& doc) {
    try {
        const auto kind = generator_kind_from_string(doc.at("kind").get<std::string>());
        const auto& jd = doc.at("dims");
        GeneratorDims dims{jd.at("context").get<Index>(), jd.at("latent").get<Index>(),
                           jd.at("output").get<Index>(), jd.value("hidden", Index{0})};
        const auto theta = doc.at("theta").get<std::vector<double>>();
        const Index expected = parameter_count(kind, dims);
        if (static_cast<Index>(theta.size()) != expected) {
            throw DataError("generator theta has " + std::to_string(theta.size()) +
                            " entries, architecture declares " + std::to_string(expected));
        }
        std::optional<Standardization> scaling;
        if (doc.contains("scaling")) {
            scaling = Standardization{
                from_std(doc["scaling"].at("mean").get<std::vector<double>>()),
                from_std(doc["scaling"].at("std").get<std::vector<double>>())};
        }
        return GeneratorSpec(kind, dims, from_std(theta), std::move(scaling));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed generator document: ") + e.what());
    }
}

void save_generator(const GeneratorSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << generator_to_json(spec).dump(2) << '\n';
}

GeneratorSpec load_generator(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return generator_from_json(doc);
}

}  // namespace sro
