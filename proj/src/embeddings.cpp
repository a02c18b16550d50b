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

#include "knnpr/embeddings.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include "knnpr/errors.hpp"

namespace knnpr {

namespace {

std::uint32_t load_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32_le(std::uint32_t v, unsigned char* p) {
    p[0] = static_cast<unsigned char>(v);
    p[1] = static_cast<unsigned char>(v >> 8);
    p[2] = static_cast<unsigned char>(v >> 16);
    p[3] = static_cast<unsigned char>(v >> 24);
}

std::string_view trim(std::string_view s) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::size_t rows, std::size_t dim, std::vector<float> values)
    : rows_(rows), dim_(dim), values_(std::move(values)) {
    if (rows_ == 0 || dim_ == 0) {
        throw ValidationError("embedding set must have at least one row and one column (got " +
                              std::to_string(rows_) + "x" + std::to_string(dim_) + ")");
    }
    if (values_.size() != rows_ * dim_) {
        throw ValidationError("embedding payload has " + std::to_string(values_.size()) +
                              " values, expected " + std::to_string(rows_ * dim_));
    }
    auto bad = std::find_if(values_.begin(), values_.end(), [](float v) { return !std::isfinite(v); });
    if (bad != values_.end()) {
        const auto flat = static_cast<std::size_t>(bad - values_.begin());
        throw ValidationError("non-finite value at row " + std::to_string(flat / dim_) + ", column " +
                              std::to_string(flat % dim_));
    }
}

EmbeddingSet EmbeddingSet::select(std::span<const std::size_t> indices) const {
    std::vector<float> out;
    out.reserve(indices.size() * dim_);
    for (std::size_t i : indices) {
        if (i >= rows_) throw ValidationError("row index " + std::to_string(i) + " out of range");
        auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return EmbeddingSet(indices.size(), dim_, std::move(out));
}

bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
    if (a.rows_ != b.rows_ || a.dim_ != b.dim_) return false;
    // Bitwise comparison: the I/O contract is bit-exactness, not numeric equality.
    return std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(float)) == 0;
}

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

    std::array<unsigned char, kEpr1HeaderBytes> header{};
    in.read(reinterpret_cast<char*>(header.data()), header.size());
    if (in.gcount() != static_cast<std::streamsize>(header.size())) {
        throw FormatError("'" + path.string() + "' is too short to hold an EPR1 header");
    }
    if (std::memcmp(header.data(), kEpr1Magic, 4) != 0) {
        throw FormatError("'" + path.string() + "' does not start with the EPR1 magic");
    }
    const std::uint32_t version = load_u32_le(header.data() + 4);
    if (version != kEpr1Version) {
        throw FormatError("'" + path.string() + "' has unsupported EPR1 version " + std::to_string(version));
    }
    const std::size_t rows = load_u32_le(header.data() + 8);
    const std::size_t dim = load_u32_le(header.data() + 12);
    if (rows == 0 || dim == 0) {
        throw ValidationError("'" + path.string() + "' declares an empty " + std::to_string(rows) + "x" +
                              std::to_string(dim) + " matrix");
    }

    const std::size_t count = rows * dim;
    std::vector<unsigned char> raw(count * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw CorruptionError("'" + path.string() + "' is truncated: expected " + std::to_string(raw.size()) +
                              " payload bytes, found " + std::to_string(in.gcount()));
    }

    std::vector<float> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        values[i] = std::bit_cast<float>(load_u32_le(raw.data() + 4 * i));
    }
    try {
        return EmbeddingSet(rows, dim, std::move(values));
    } catch (const ValidationError& e) {
        throw ValidationError("'" + path.string() + "': " + e.what());
    }
}

void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
    if (set.size() > UINT32_MAX || set.dim() > UINT32_MAX) {
        throw ValidationError("embedding set is too large for the EPR1 header");
    }
    std::vector<unsigned char> buf(kEpr1HeaderBytes + 4 * set.values().size());
    std::memcpy(buf.data(), kEpr1Magic, 4);
    store_u32_le(kEpr1Version, buf.data() + 4);
    store_u32_le(static_cast<std::uint32_t>(set.size()), buf.data() + 8);
    store_u32_le(static_cast<std::uint32_t>(set.dim()), buf.data() + 12);
    unsigned char* p = buf.data() + kEpr1HeaderBytes;
    for (float v : set.values()) {
        store_u32_le(std::bit_cast<std::uint32_t>(v), p);
        p += 4;
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

EmbeddingSet import_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

    std::vector<float> values;
    std::size_t dim = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view rest = trim(line);
        if (rest.empty()) continue;

        std::size_t width = 0;
        while (true) {
            const auto comma = rest.find(',');
            const std::string_view token = trim(rest.substr(0, comma));
            ++width;
            float v = 0.0f;
            const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
            if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
                throw ValidationError("'" + path.string() + "' line " + std::to_string(line_no) + ", column " +
                                      std::to_string(width) + ": cannot parse '" + std::string(token) + "'");
            }
            if (!std::isfinite(v)) {
                throw ValidationError("'" + path.string() + "' line " + std::to_string(line_no) + ", column " +
                                      std::to_string(width) + ": non-finite value");
            }
            values.push_back(v);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (rows == 0) {
            dim = width;
        } else if (width != dim) {
            throw ValidationError("'" + path.string() + "' line " + std::to_string(line_no) + ": ragged row with " +
                                  std::to_string(width) + " values, expected " + std::to_string(dim));
        }
        ++rows;
    }
    if (rows == 0) throw ValidationError("'" + path.string() + "' contains no rows");
    return EmbeddingSet(rows, dim, std::move(values));
}

void export_csv(const EmbeddingSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    // 9 significant digits round-trip every float exactly.
    out << std::setprecision(9);
    for (std::size_t i = 0; i < set.size(); ++i) {
        auto r = set.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) out << ',';
            out << r[j];
        }
        out << '\n';
    }
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace knnpr
