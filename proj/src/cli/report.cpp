/*
 * Copyright (c) 2026, The knnpr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "knnpr/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "knnpr/errors.hpp"

namespace knnpr {

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

void render_value(const ordered_json& v, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    switch (v.type()) {
        case ordered_json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, item] : v.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad + ordered_json(key).dump() + ": ";
                render_value(item, out, indent + 2);
            }
            out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "}";
            return;
        }
        case ordered_json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& item : v) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                render_value(item, out, indent + 2);
            }
            out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "]";
            return;
        }
        case ordered_json::value_t::number_float: {
            const double d = v.get<double>();
            if (std::isnan(d)) {
                out += "null";
            } else if (std::isinf(d)) {
                out += d > 0 ? "\"inf\"" : "\"-inf\"";
            } else {
                out += format_number(d);
            }
            return;
        }
        default:
            out += v.dump();
            return;
    }
}

std::string csv_cell(const ordered_json& v) {
    switch (v.type()) {
        case ordered_json::value_t::null:
            return "";
        case ordered_json::value_t::number_float: {
            const double d = v.get<double>();
            return std::isnan(d) ? "nan" : format_number(d);
        }
        case ordered_json::value_t::string: {
            const auto& s = v.get_ref<const std::string&>();
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string quoted = "\"";
            for (char c : s) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            return quoted + "\"";
        }
        default:
            return v.dump();
    }
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    throw ValidationError("unknown report format '" + name + "' (expected json or csv)");
}

std::string format_number(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%#.6g", value);
    return buf.data();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
    std::array<char, 1 << 16> chunk{};
    while (in) {
        in.read(chunk.data(), chunk.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), chunk.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

void RunManifest::add_input(const std::filesystem::path& path) { input_digests.emplace_back(path.string(), sha256_file(path)); }

ordered_json RunManifest::to_json() const {
    ordered_json j;
    j["command"] = command;
    j["parameters"] = parameters;
    ordered_json inputs = ordered_json::object();
    for (const auto& [path, digest] : input_digests) inputs[path] = "sha256:" + digest;
    j["inputs"] = inputs;
    j["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
    j["version"] = version;
    j["duration_seconds"] = duration_seconds;
    return j;
}

ordered_json to_json(const PrecisionRecallResult& r) {
    ordered_json j;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["k"] = r.k;
    j["n_real"] = r.n_real;
    j["n_gen"] = r.n_gen;
    j["precision_count"] = r.precision_count;
    j["recall_count"] = r.recall_count;
    j["provenance"] = r.provenance;
    return j;
}

ordered_json to_json(const InterpolationPathReport& r) {
    ordered_json j;
    j["num_paths"] = r.num_paths;
    j["num_steps"] = r.num_steps;
    j["strayed"] = r.strayed;
    j["stray_fraction"] = r.stray_fraction;
    j["realism_threshold"] = r.realism_threshold;
    j["fraction_threshold"] = r.fraction_threshold;
    return j;
}

ordered_json to_json(const SweepPoint& p) {
    ordered_json j;
    j["parameter"] = p.parameter;
    j["precision"] = p.metrics.precision;
    j["recall"] = p.metrics.recall;
    j["frechet"] = p.frechet;
    return j;
}

ordered_json to_json(const ScoredPoint& p) {
    ordered_json j;
    j["id"] = p.id;
    j["precision"] = p.precision;
    j["recall"] = p.recall;
    if (p.aux) j["aux"] = *p.aux;
    return j;
}

ordered_json realism_records(std::span<const RealismScore> scores) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        rows.push_back({{"index", i}, {"value", scores[i].value}});
    }
    return rows;
}

std::string render_json(const ordered_json& doc) {
    std::string out;
    render_value(doc, out, 0);
    out += '\n';
    return out;
}

std::string render_csv(const ordered_json& rows) {
    const ordered_json table = rows.is_array() ? rows : ordered_json::array({rows});
    if (table.empty()) return "";
    std::string out;
    std::vector<std::string> keys;
    for (const auto& [key, _] : table.front().items()) keys.push_back(key);
    for (std::size_t i = 0; i < keys.size(); ++i) out += (i ? "," : "") + keys[i];
    out += '\n';
    for (const auto& row : table) {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (i) out += ',';
            if (row.contains(keys[i])) out += csv_cell(row.at(keys[i]));
        }
        out += '\n';
    }
    return out;
}

void emit_report(const ordered_json& results, const RunManifest& manifest, ReportFormat format,
                 const std::string& path, std::ostream& stdout_sink) {
    const bool to_stdout = path.empty() || path == "-";
    if (format == ReportFormat::Json) {
        ordered_json doc;
        doc["results"] = results;
        doc["manifest"] = manifest.to_json();
        const std::string text = render_json(doc);
        if (to_stdout) {
            stdout_sink << text;
        } else {
            write_file(path, text);
        }
        return;
    }
    const std::string table = render_csv(results);
    if (to_stdout) {
        stdout_sink << table;
    } else {
        write_file(path, table);
        write_file(path + ".manifest.json", render_json(manifest.to_json()));
    }
}

}  // namespace knnpr
