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

#include "knnpr/realism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "knnpr/errors.hpp"
#include "tiling.hpp"

namespace knnpr {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
// Covers the sqrt and division roundings of the final ratio.
constexpr double kRatioSlack = 1e-12;
constexpr double kAbsoluteSlack = 1e-280;

double exact_ratio(std::span<const float> query, std::span<const float> center, double radius) {
    const double d2 = exact_squared_distance(query, center);
    if (d2 == 0.0) return kInfinity;
    return radius / std::sqrt(d2);
}

struct RatioCandidate {
    double upper;
    std::uint32_t index;
};

// Keeps every kept sphere whose squared ratio could still be the maximum.
class BestRatio {
public:
    void offer(double lower, double upper, std::uint32_t index) {
        if (upper * (1.0 + kRatioSlack) < best_lower_) return;
        cands_.push_back({upper, index});
        best_lower_ = std::max(best_lower_, lower);
        if (cands_.size() >= cap_) prune();
    }

    std::vector<RatioCandidate>& finish() {
        prune();
        return cands_;
    }

private:
    void prune() {
        std::erase_if(cands_, [this](const RatioCandidate& c) { return c.upper * (1.0 + kRatioSlack) < best_lower_; });
        if (cands_.size() * 2 > cap_) cap_ *= 2;
    }

    double best_lower_ = 0.0;
    std::size_t cap_ = 64;
    std::vector<RatioCandidate> cands_;
};

}  // namespace

PrunedManifold::PrunedManifold(ManifoldEstimate base, bool prune) : base_(std::move(base)), pruned_(prune) {
    const auto radii = base_.radii();
    std::vector<std::size_t> order(radii.size());
    std::iota(order.begin(), order.end(), 0);
    if (pruned_) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radii[a] < radii[b]; });
        order.resize((radii.size() + 1) / 2);
        std::sort(order.begin(), order.end());
    }
    kept_ = std::move(order);
    kept_radii_.reserve(kept_.size());
    for (std::size_t i : kept_) kept_radii_.push_back(radii[i]);
    auto features = std::make_shared<EmbeddingSet>(base_.features().select(kept_));
    centered_ = std::make_shared<detail::CenteredSet>(detail::center(*features, detail::column_mean(*features)));
    kept_features_ = std::move(features);
}

PrunedManifold::~PrunedManifold() = default;
PrunedManifold::PrunedManifold(const PrunedManifold&) = default;
PrunedManifold& PrunedManifold::operator=(const PrunedManifold&) = default;
PrunedManifold::PrunedManifold(PrunedManifold&&) noexcept = default;
PrunedManifold& PrunedManifold::operator=(PrunedManifold&&) noexcept = default;

RealismScore realism_score(std::span<const float> query, const PrunedManifold& manifold) {
    if (query.size() != manifold.dim()) {
        throw ValidationError("query dimension " + std::to_string(query.size()) + " does not match manifold dimension " +
                              std::to_string(manifold.dim()));
    }
    const auto& features = manifold.kept_features();
    const auto radii = manifold.kept_radii();
    double best = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        best = std::max(best, exact_ratio(query, features.row(i), radii[i]));
    }
    return {best};
}

std::vector<RealismScore> realism_scores_batch(const EmbeddingSet& queries, const PrunedManifold& manifold) {
    if (queries.dim() != manifold.dim()) {
        throw ValidationError("query dimension " + std::to_string(queries.dim()) +
                              " does not match manifold dimension " + std::to_string(manifold.dim()));
    }
    const auto& refs = manifold.centered();
    const auto cq = detail::center(queries, refs.offset);
    const double coeff = detail::rounding_band(queries.dim());
    const auto radii = manifold.kept_radii();

    std::vector<BestRatio> states(queries.size());
    detail::for_each_tile(cq, refs, manifold.base().blocks(),
                          [&](std::size_t q, std::size_t r0, std::span<const float> dots) {
                              const double qn = cq.squared_norms[q];
                              auto& state = states[q];
                              for (std::size_t j = 0; j < dots.size(); ++j) {
                                  const std::size_t r = r0 + j;
                                  const double r2 = radii[r] * radii[r];
                                  const double est = detail::squared_estimate(qn, refs.squared_norms[r], dots[j]);
                                  const double band = coeff * (qn + refs.squared_norms[r]) + kAbsoluteSlack;
                                  const double lo = est - band;
                                  const double upper = lo > 0.0 ? r2 / lo : kInfinity;
                                  const double lower = r2 / (est + band);
                                  state.offer(lower, upper, static_cast<std::uint32_t>(r));
                              }
                          });

    std::vector<RealismScore> out(queries.size());
    const auto& features = manifold.kept_features();
    const auto n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t qi = 0; qi < n; ++qi) {
        const auto q = static_cast<std::size_t>(qi);
        auto& cands = states[q].finish();
        double best = 0.0;
        for (const auto& c : cands) {
            best = std::max(best, exact_ratio(queries.row(q), features.row(c.index), radii[c.index]));
        }
        out[q] = {best};
        std::vector<RatioCandidate>().swap(cands);
    }
    return out;
}

InterpolationPathReport interpolation_path_stats(std::span<const EndpointPair> endpoints, std::size_t steps,
                                                 const PrunedManifold& manifold, double realism_threshold,
                                                 double fraction_threshold) {
    if (steps < 2) throw ValidationError("interpolation needs at least 2 steps per path");
    if (endpoints.empty()) throw ValidationError("interpolation needs at least one endpoint pair");
    const std::size_t dim = manifold.dim();
    for (const auto& p : endpoints) {
        if (p.a.size() != dim || p.b.size() != dim) {
            throw ValidationError("endpoint dimension does not match manifold dimension " + std::to_string(dim));
        }
    }

    InterpolationPathReport report;
    report.num_paths = endpoints.size();
    report.num_steps = steps;
    report.realism_threshold = realism_threshold;
    report.fraction_threshold = fraction_threshold;

    const std::size_t interior = steps - 2;
    if (interior > 0) {
        std::vector<float> points;
        points.reserve(endpoints.size() * interior * dim);
        for (const auto& p : endpoints) {
            for (std::size_t s = 1; s + 1 < steps; ++s) {
                const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
                for (std::size_t j = 0; j < dim; ++j) {
                    points.push_back(static_cast<float>((1.0 - t) * p.a[j] + t * p.b[j]));
                }
            }
        }
        const EmbeddingSet path_points(endpoints.size() * interior, dim, std::move(points));
        const auto scores = realism_scores_batch(path_points, manifold);
        for (std::size_t p = 0; p < endpoints.size(); ++p) {
            std::size_t low = 0;
            for (std::size_t s = 0; s < interior; ++s) {
                if (scores[p * interior + s].value < realism_threshold) ++low;
            }
            if (static_cast<double>(low) > fraction_threshold * static_cast<double>(interior)) ++report.strayed;
        }
    }
    report.stray_fraction = static_cast<double>(report.strayed) / static_cast<double>(report.num_paths);
    return report;
}

}  // namespace knnpr
