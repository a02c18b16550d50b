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

#include "knnpr/metric.hpp"

#include <omp.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "knnpr/errors.hpp"
#include "tiling.hpp"

namespace knnpr {

namespace detail {

std::vector<double> column_mean(const EmbeddingSet& set) {
    std::vector<double> mean(set.dim(), 0.0);
    for (std::size_t i = 0; i < set.size(); ++i) {
        auto r = set.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) mean[j] += r[j];
    }
    for (double& m : mean) m /= static_cast<double>(set.size());
    return mean;
}

CenteredSet center(const EmbeddingSet& set, std::span<const double> offset) {
    CenteredSet out;
    out.offset.assign(offset.begin(), offset.end());
    out.values.resize(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(set.dim()));
    out.squared_norms.resize(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        auto r = set.row(i);
        float* dst = out.values.row(static_cast<Eigen::Index>(i)).data();
        double norm = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) {
            dst[j] = static_cast<float>(static_cast<double>(r[j]) - offset[j]);
            norm += static_cast<double>(dst[j]) * static_cast<double>(dst[j]);
        }
        out.squared_norms[i] = norm;
    }
    out.max_squared_norm = *std::max_element(out.squared_norms.begin(), out.squared_norms.end());
    return out;
}

double rounding_band(std::size_t dim) {
    const double d = static_cast<double>(dim);
    const double u = std::ldexp(1.0, -24);
    const double gamma = d * u / (1.0 - d * u);
    return 1.001 * (gamma + 8.0 * u) + 8.0 * (d + 4.0) * std::ldexp(1.0, -53);
}

}  // namespace detail

namespace {

using detail::CenteredSet;

// Absolute slack so that all-zero centred rows still land in the band.
constexpr double kAbsoluteSlack = 1e-280;
// Relative slack separating "d2 > r2" from "sqrt(d2) > sqrt(r2)".
constexpr double kSqrtSlack = 1e-14;

struct Candidate {
    double estimate;
    std::uint32_t index;
};

// Running set of references that may still be among the k nearest.
class KthCandidates {
public:
    explicit KthCandidates(std::size_t k) : k_(k), cap_(4 * k + 64) {}

    void offer(double estimate, std::uint32_t index, double band) {
        band_ = band;
        if (estimate > threshold_) return;
        cands_.push_back({estimate, index});
        if (cands_.size() >= cap_) prune(band);
    }

    void prune(double band) {
        if (cands_.size() < k_) return;
        auto kth = cands_.begin() + static_cast<std::ptrdiff_t>(k_ - 1);
        std::nth_element(cands_.begin(), kth, cands_.end(),
                         [](const Candidate& a, const Candidate& b) { return a.estimate < b.estimate; });
        threshold_ = std::min(threshold_, kth->estimate + 2.0 * band);
        std::erase_if(cands_, [this](const Candidate& c) { return c.estimate > threshold_; });
        if (cands_.size() * 2 > cap_) cap_ *= 2;
    }

    std::vector<Candidate>& finish() {
        prune(band_);
        return cands_;
    }

private:
    std::size_t k_;
    double band_ = 0.0;
    std::size_t cap_;
    double threshold_ = std::numeric_limits<double>::infinity();
    std::vector<Candidate> cands_;
};

void check_k(std::size_t k, std::size_t n, const char* what) {
    if (k < 1 || k + 1 > n) {
        throw ValidationError(std::string("k=") + std::to_string(k) + " out of range for " + what + " of " +
                              std::to_string(n) + " rows (need 1 <= k <= N-1)");
    }
}

void check_dim(std::size_t got, std::size_t want) {
    if (got != want) {
        throw ValidationError("dimension mismatch: " + std::to_string(got) + " vs " + std::to_string(want));
    }
}

std::vector<double> squared_kth_distances(const EmbeddingSet& set, const CenteredSet& centered, std::size_t k,
                                          const BlockConfig& blocks) {
    const double coeff = detail::rounding_band(set.dim());
    std::vector<KthCandidates> states(set.size(), KthCandidates(k));

    detail::for_each_tile(centered, centered, blocks,
                          [&](std::size_t q, std::size_t r0, std::span<const float> dots) {
                              const double qn = centered.squared_norms[q];
                              const double band = coeff * (qn + centered.max_squared_norm) + kAbsoluteSlack;
                              auto& state = states[q];
                              for (std::size_t j = 0; j < dots.size(); ++j) {
                                  const std::size_t r = r0 + j;
                                  if (r == q) continue;
                                  state.offer(detail::squared_estimate(qn, centered.squared_norms[r], dots[j]),
                                              static_cast<std::uint32_t>(r), band);
                              }
                          });

    std::vector<double> out(set.size());
    const auto n = static_cast<std::ptrdiff_t>(set.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t qi = 0; qi < n; ++qi) {
        const auto q = static_cast<std::size_t>(qi);
        auto& cands = states[q].finish();
        std::vector<double> exact(cands.size());
        for (std::size_t c = 0; c < cands.size(); ++c) {
            exact[c] = exact_squared_distance(set.row(q), set.row(cands[c].index));
        }
        auto kth = exact.begin() + static_cast<std::ptrdiff_t>(k - 1);
        std::nth_element(exact.begin(), kth, exact.end());
        out[q] = *kth;
        std::vector<Candidate>().swap(cands);
    }
    return out;
}

}  // namespace

void set_thread_count(int threads) {
    const int n = threads > 0 ? threads : omp_get_num_procs();
    omp_set_num_threads(n);
    Eigen::setNbThreads(n);
}

int thread_count() { return omp_get_max_threads(); }

double exact_squared_distance(std::span<const float> a, std::span<const float> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += d * d;
    }
    return sum;
}

DistanceBlock pairwise_distance_block(const EmbeddingSet& a, const EmbeddingSet& b) {
    check_dim(a.dim(), b.dim());
    const auto offset = detail::column_mean(b);
    const CenteredSet ca = detail::center(a, offset);
    const CenteredSet cb = detail::center(b, offset);
    const double coeff = detail::rounding_band(a.dim());

    DistanceBlock out{a.size(), b.size(), std::vector<float>(a.size() * b.size())};
    BlockConfig blocks;
    detail::for_each_tile(ca, cb, blocks, [&](std::size_t q, std::size_t r0, std::span<const float> dots) {
        for (std::size_t j = 0; j < dots.size(); ++j) {
            const std::size_t r = r0 + j;
            const double norms = ca.squared_norms[q] + cb.squared_norms[r];
            double d2 = detail::squared_estimate(ca.squared_norms[q], cb.squared_norms[r], dots[j]);
            // A distance within 1e4 rounding bands of zero has lost too many
            // digits to cancellation; take it directly.
            if (d2 <= 1e4 * coeff * norms + kAbsoluteSlack) d2 = exact_squared_distance(a.row(q), b.row(r));
            out.values[q * out.cols + r] = static_cast<float>(std::sqrt(std::max(d2, 0.0)));
        }
    });
    return out;
}

std::vector<double> kth_nn_radii(const EmbeddingSet& set, std::size_t k, const BlockConfig& blocks) {
    check_k(k, set.size(), "an embedding set");
    const CenteredSet centered = detail::center(set, detail::column_mean(set));
    auto radii = squared_kth_distances(set, centered, k, blocks);
    for (double& r : radii) r = std::sqrt(r);
    return radii;
}

ManifoldEstimate::ManifoldEstimate(EmbeddingSet features, std::size_t k, const BlockConfig& blocks)
    : features_(std::move(features)), k_(k), blocks_(blocks) {
    check_k(k_, features_.size(), "a manifold");
    auto centered = std::make_shared<CenteredSet>(detail::center(features_, detail::column_mean(features_)));
    squared_radii_ = squared_kth_distances(features_, *centered, k_, blocks_);
    radii_.resize(squared_radii_.size());
    std::transform(squared_radii_.begin(), squared_radii_.end(), radii_.begin(), [](double r2) { return std::sqrt(r2); });
    centered_ = std::move(centered);
}

ManifoldEstimate::~ManifoldEstimate() = default;
ManifoldEstimate::ManifoldEstimate(const ManifoldEstimate&) = default;
ManifoldEstimate& ManifoldEstimate::operator=(const ManifoldEstimate&) = default;
ManifoldEstimate::ManifoldEstimate(ManifoldEstimate&&) noexcept = default;
ManifoldEstimate& ManifoldEstimate::operator=(ManifoldEstimate&&) noexcept = default;

bool manifold_contains(const ManifoldEstimate& manifold, std::span<const float> query) {
    check_dim(query.size(), manifold.dim());
    const auto radii = manifold.radii();
    for (std::size_t i = 0; i < manifold.size(); ++i) {
        if (std::sqrt(exact_squared_distance(query, manifold.features().row(i))) <= radii[i]) return true;
    }
    return false;
}

std::vector<std::uint8_t> manifold_membership(const ManifoldEstimate& manifold, const EmbeddingSet& queries) {
    check_dim(queries.dim(), manifold.dim());
    const CenteredSet& refs = manifold.centered();
    const CenteredSet cq = detail::center(queries, refs.offset);
    const double coeff = detail::rounding_band(queries.dim());
    const auto r2 = manifold.squared_radii();
    const auto radii = manifold.radii();

    std::vector<std::uint8_t> inside(queries.size(), 0);
    std::vector<std::vector<std::uint32_t>> close_calls(queries.size());

    detail::for_each_tile(cq, refs, manifold.blocks(), [&](std::size_t q, std::size_t r0, std::span<const float> dots) {
        if (inside[q]) return;
        const double qn = cq.squared_norms[q];
        auto& pending = close_calls[q];
        for (std::size_t j = 0; j < dots.size(); ++j) {
            const std::size_t r = r0 + j;
            const double est = detail::squared_estimate(qn, refs.squared_norms[r], dots[j]);
            const double band = coeff * (qn + refs.squared_norms[r]) + kSqrtSlack * r2[r] + kAbsoluteSlack;
            if (est + band < r2[r]) {
                inside[q] = 1;
                std::vector<std::uint32_t>().swap(pending);
                return;
            }
            if (est - band <= r2[r]) pending.push_back(static_cast<std::uint32_t>(r));
        }
    });

    const auto n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t qi = 0; qi < n; ++qi) {
        const auto q = static_cast<std::size_t>(qi);
        if (inside[q]) continue;
        for (std::uint32_t r : close_calls[q]) {
            if (std::sqrt(exact_squared_distance(queries.row(q), manifold.features().row(r))) <= radii[r]) {
                inside[q] = 1;
                break;
            }
        }
    }
    return inside;
}

PrecisionRecallResult precision_recall(const EmbeddingSet& real, const EmbeddingSet& gen, const MetricConfig& config) {
    check_dim(gen.dim(), real.dim());
    check_k(config.k, real.size(), "the real set");
    check_k(config.k, gen.size(), "the generated set");

    const ManifoldEstimate real_manifold(real, config.k, config.blocks);
    const ManifoldEstimate gen_manifold(gen, config.k, config.blocks);
    const auto gen_in_real = manifold_membership(real_manifold, gen);
    const auto real_in_gen = manifold_membership(gen_manifold, real);

    PrecisionRecallResult out;
    out.k = config.k;
    out.n_real = real.size();
    out.n_gen = gen.size();
    out.precision_count = static_cast<std::size_t>(std::count(gen_in_real.begin(), gen_in_real.end(), 1));
    out.recall_count = static_cast<std::size_t>(std::count(real_in_gen.begin(), real_in_gen.end(), 1));
    out.precision = static_cast<double>(out.precision_count) / static_cast<double>(out.n_gen);
    out.recall = static_cast<double>(out.recall_count) / static_cast<double>(out.n_real);
    out.provenance = "k=" + std::to_string(config.k) + " query_block=" + std::to_string(config.blocks.query_block) +
                     " reference_block=" + std::to_string(config.blocks.reference_block);
    return out;
}

}  // namespace knnpr
