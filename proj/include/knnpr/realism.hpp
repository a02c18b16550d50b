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
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "knnpr/embeddings.hpp"
#include "knnpr/metric.hpp"

namespace knnpr {

/// A manifold restricted to its ceil(N/2) smallest hyperspheres (ties go to
/// the lower row index). Built once per reference set and shared read-only.
class PrunedManifold {
public:
    /// With prune = false every hypersphere is kept.
    explicit PrunedManifold(ManifoldEstimate base, bool prune = true);
    ~PrunedManifold();
    PrunedManifold(const PrunedManifold&);
    PrunedManifold& operator=(const PrunedManifold&);
    PrunedManifold(PrunedManifold&&) noexcept;
    PrunedManifold& operator=(PrunedManifold&&) noexcept;

    const ManifoldEstimate& base() const noexcept { return base_; }
    std::size_t dim() const noexcept { return base_.dim(); }
    bool pruned() const noexcept { return pruned_; }

    /// Kept row indices into base().features(), ascending.
    std::span<const std::size_t> kept() const noexcept { return kept_; }

    const EmbeddingSet& kept_features() const noexcept { return *kept_features_; }
    std::span<const double> kept_radii() const noexcept { return kept_radii_; }
    const detail::CenteredSet& centered() const { return *centered_; }

private:
    ManifoldEstimate base_;
    bool pruned_;
    std::vector<std::size_t> kept_;
    std::vector<double> kept_radii_;
    std::shared_ptr<const EmbeddingSet> kept_features_;
    std::shared_ptr<const detail::CenteredSet> centered_;
};

/// Realism score: max over kept spheres of radius / distance. A query that
/// coincides with a kept row scores +infinity.
struct RealismScore {
    double value = 0.0;

    bool is_sentinel() const noexcept { return value == std::numeric_limits<double>::infinity(); }
    friend auto operator<=>(const RealismScore&, const RealismScore&) = default;
};

RealismScore realism_score(std::span<const float> query, const PrunedManifold& manifold);

/// Blocked evaluation; returns exactly the values realism_score would.
std::vector<RealismScore> realism_scores_batch(const EmbeddingSet& queries, const PrunedManifold& manifold);

struct EndpointPair {
    std::vector<float> a;
    std::vector<float> b;
};

struct InterpolationPathReport {
    std::size_t num_paths = 0;
    std::size_t num_steps = 0;
    std::size_t strayed = 0;
    double stray_fraction = 0.0;
    double realism_threshold = 0.9;
    double fraction_threshold = 0.25;
};

/// Scores `steps` evenly spaced points on each segment a -> b. A path strays
/// when strictly more than fraction_threshold of its interior points (the
/// endpoints are not counted) score below realism_threshold.
InterpolationPathReport interpolation_path_stats(std::span<const EndpointPair> endpoints, std::size_t steps,
                                                 const PrunedManifold& manifold, double realism_threshold = 0.9,
                                                 double fraction_threshold = 0.25);

}  // namespace knnpr
