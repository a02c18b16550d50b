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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace knnpr {

/// An N x D row-major matrix of finite 32-bit feature vectors.
///
/// Row i is the feature vector of sample i. The set is immutable once
/// constructed and may be shared read-only across threads.
class EmbeddingSet {
public:
    /// Takes ownership of `values` (row-major, size rows * dim).
    /// Throws ValidationError on empty shape, size mismatch, or a non-finite
    /// value (the message names the offending row and column).
    EmbeddingSet(std::size_t rows, std::size_t dim, std::vector<float> values);

    std::size_t size() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const float> row(std::size_t i) const noexcept {
        return {values_.data() + i * dim_, dim_};
    }
    std::span<const float> values() const noexcept { return values_; }
    const float* data() const noexcept { return values_.data(); }

    /// New set holding the given rows, in the given order.
    EmbeddingSet select(std::span<const std::size_t> indices) const;

    friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b);

private:
    std::size_t rows_;
    std::size_t dim_;
    std::vector<float> values_;
};

/// Header layout of the EPR1 binary format.
inline constexpr char kEpr1Magic[4] = {'E', 'P', 'R', '1'};
inline constexpr std::uint32_t kEpr1Version = 1;
inline constexpr std::size_t kEpr1HeaderBytes = 16;

EmbeddingSet read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);

/// Parses one comma-separated row of decimal numbers per line.
EmbeddingSet import_csv(const std::filesystem::path& path);
void export_csv(const EmbeddingSet& set, const std::filesystem::path& path);

}  // namespace knnpr
