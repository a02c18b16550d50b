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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "knnpr/embeddings.hpp"

namespace knnpr {

namespace detail {
struct CenteredSet;
}

/// Tile sizes for the blocked distance kernel. A tile of
/// query_block x reference_block floats is the largest distance buffer
/// ever held in memory.
struct BlockConfig {
    std::size_t query_block = 10000;
    std::size_t reference_block = 10000;
};

struct MetricConfig {
    std::size_t k = 3;
    BlockConfig blocks{};
};

/// Sets the worker count used by every parallel kernel. 0 selects all cores.
void set_thread_count(int threads);
int thread_count();

/// Squared Euclidean distance evaluated directly in double precision,
/// summing coordinates in order. This is the reference value every blocked
/// kernel resolves its close calls against.
double exact_squared_distance(std::span<const float> a, std::span<const float> b);

/// Dense |A| x |B| Euclidean distance block, row-major.
struct DistanceBlock {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> values;

    float at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

/// Pairwise distances via the squared-norm expansion on a float matrix
/// product. Entries whose expansion is dominated by rounding (near-coincident
/// rows) are recomputed directly, so identical rows give exactly 0.
DistanceBlock pairwise_distance_block(const EmbeddingSet& a, const EmbeddingSet& b);

/// Distance from every row to its kth nearest neighbour in the same set,
/// the row itself excluded. Requires 1 <= k <= N-1.
std::vector<double> kth_nn_radii(const EmbeddingSet& set, std::size_t k, const BlockConfig& blocks = {});

/// Union of hyperspheres centred at each feature row with radius equal to
/// the row's kth-NN distance.
class ManifoldEstimate {
public:
    ManifoldEstimate(EmbeddingSet features, std::size_t k, const BlockConfig& blocks = {});
    ~ManifoldEstimate();
    ManifoldEstimate(const ManifoldEstimate&);
    ManifoldEstimate& operator=(const ManifoldEstimate&);
    ManifoldEstimate(ManifoldEstimate&&) noexcept;
    ManifoldEstimate& operator=(ManifoldEstimate&&) noexcept;

    const EmbeddingSet& features() const noexcept { return features_; }
    std::size_t k() const noexcept { return k_; }
    std::size_t size() const noexcept { return features_.size(); }
    std::size_t dim() const noexcept { return features_.dim(); }
    std::span<const double> radii() const noexcept { return radii_; }
    std::span<const double> squared_radii() const noexcept { return squared_radii_; }
    const BlockConfig& blocks() const noexcept { return blocks_; }

    const detail::CenteredSet& centered() const { return *centered_; }

private:
    EmbeddingSet features_;
    std::size_t k_;
    BlockConfig blocks_;
    std::vector<double> squared_radii_;
    std::vector<double> radii_;
    std::shared_ptr<const detail::CenteredSet> centered_;
};

/// True iff the query lies inside at least one hypersphere (boundary counts
/// as inside).
bool manifold_contains(const ManifoldEstimate& manifold, std::span<const float> query);

/// Blocked membership test for every query row; 1 = inside.
std::vector<std::uint8_t> manifold_membership(const ManifoldEstimate& manifold, const EmbeddingSet& queries);

struct PrecisionRecallResult {
    double precision = 0.0;
    double recall = 0.0;
    std::size_t k = 0;
    std::size_t n_real = 0;
    std::size_t n_gen = 0;
    /// Number of generated rows inside the real manifold.
    std::size_t precision_count = 0;
    /// Number of real rows inside the generated manifold.
    std::size_t recall_count = 0;
    std::string provenance;
};

/// precision = fraction of generated rows inside the real manifold,
/// recall = fraction of real rows inside the generated manifold.
PrecisionRecallResult precision_recall(const EmbeddingSet& real, const EmbeddingSet& gen,
                                       const MetricConfig& config = {});

}  // namespace knnpr
