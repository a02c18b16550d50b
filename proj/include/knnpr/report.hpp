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

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "knnpr/metric.hpp"
#include "knnpr/realism.hpp"
#include "knnpr/synthetic.hpp"

namespace knnpr {

using ordered_json = nlohmann::ordered_json;

enum class ReportFormat { Json, Csv };

ReportFormat parse_report_format(const std::string& name);

/// Six significant digits with trailing zeros kept ("0.500000"); +infinity
/// prints as "inf".
std::string format_number(double value);

/// Provenance written next to every output.
struct RunManifest {
    std::string command;
    ordered_json parameters = ordered_json::object();
    std::vector<std::pair<std::string, std::string>> input_digests;
    std::optional<std::uint64_t> seed;
    std::string version;
    double duration_seconds = 0.0;

    /// Records path -> SHA-256 of its bytes.
    void add_input(const std::filesystem::path& path);
    ordered_json to_json() const;
};

std::string sha256_file(const std::filesystem::path& path);

ordered_json to_json(const PrecisionRecallResult& r);
ordered_json to_json(const InterpolationPathReport& r);
ordered_json to_json(const SweepPoint& p);
ordered_json to_json(const ScoredPoint& p);
ordered_json realism_records(std::span<const RealismScore> scores);

/// Renders with stable key order and format_number for every float.
std::string render_json(const ordered_json& doc);

/// `rows` is an array of flat objects sharing the first row's keys (a single
/// object is one row). Header line first.
std::string render_csv(const ordered_json& rows);

/// JSON: {"results": <results>, "manifest": {...}}.
/// CSV: the results table, with the manifest in "<path>.manifest.json".
/// An empty path or "-" writes the primary document to `stdout_sink`.
void emit_report(const ordered_json& results, const RunManifest& manifest, ReportFormat format,
                 const std::string& path, std::ostream& stdout_sink);

}  // namespace knnpr
