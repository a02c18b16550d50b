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

#include <Eigen/SVD>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include "knnpr/errors.hpp"
#include "knnpr/synthetic.hpp"
#include "seeding.hpp"

namespace knnpr {

namespace {

Eigen::VectorXd to_vector(std::span<const float> r) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(r.size()));
    for (std::size_t j = 0; j < r.size(); ++j) v[static_cast<Eigen::Index>(j)] = r[j];
    return v;
}

void append(std::vector<float>& out, const Eigen::VectorXd& v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) out.push_back(static_cast<float>(v[j]));
}

// Rows for which keep(i) holds; throws when nothing survives.
template <class Keep>
EmbeddingSet filter_rows(const EmbeddingSet& latents, Keep keep) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < latents.size(); ++i) {
        if (keep(i)) kept.push_back(i);
    }
    if (kept.empty()) throw ValidationError("truncation rejected every latent vector");
    return latents.select(kept);
}

template <class Fn>
EmbeddingSet map_rows(const EmbeddingSet& latents, Fn fn) {
    std::vector<float> out;
    out.reserve(latents.values().size());
    for (std::size_t i = 0; i < latents.size(); ++i) append(out, fn(to_vector(latents.row(i))));
    return EmbeddingSet(latents.size(), latents.dim(), std::move(out));
}

}  // namespace

SyntheticMapping SyntheticMapping::from_seed(std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw ValidationError("mapping dimension must be positive");
    const auto d = static_cast<Eigen::Index>(dim);
    for (std::uint64_t attempt = 0;; ++attempt) {
        std::mt19937_64 rng(detail::derive_seed(seed, attempt));
        std::normal_distribution<double> normal(0.0, 1.0);
        SyntheticMapping m;
        m.matrix.resize(d, d);
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) m.matrix(i, j) = normal(rng) / std::sqrt(static_cast<double>(dim));
        }
        m.offset.resize(d);
        for (Eigen::Index i = 0; i < d; ++i) m.offset[i] = 0.1 * normal(rng);

        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.matrix);
        const auto& s = svd.singularValues();
        if (s[d - 1] > 0.0 && s[0] / s[d - 1] < 1e6) return m;
    }
}

EmbeddingSet SyntheticMapping::apply(const EmbeddingSet& z) const {
    if (z.dim() != dim()) throw ValidationError("mapping dimension does not match latent dimension");
    return map_rows(z, [this](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return matrix * v.array().tanh().matrix() + offset;
    });
}

TruncationStrategy TruncationStrategy::from_letter(char letter, double parameter) {
    static constexpr TruncationKind kinds[] = {
        TruncationKind::RejectDistance, TruncationKind::RejectDensity, TruncationKind::ClampEllipsoid,
        TruncationKind::InterpolateToMean, TruncationKind::InterpolateInZ, TruncationKind::AxisClampInZ,
        TruncationKind::RandomReplace,
    };
    const int idx = std::toupper(static_cast<unsigned char>(letter)) - 'A';
    if (idx < 0 || idx >= 7) throw ValidationError(std::string("unknown truncation strategy '") + letter + "'");
    return {kinds[idx], parameter};
}

char TruncationStrategy::letter() const { return static_cast<char>('A' + static_cast<int>(kind)); }

bool TruncationStrategy::needs_mapping() const {
    return kind == TruncationKind::InterpolateInZ || kind == TruncationKind::AxisClampInZ;
}

void TruncationStrategy::validate() const {
    const std::string name = std::string("strategy ") + letter();
    switch (kind) {
        case TruncationKind::RejectDistance:
        case TruncationKind::AxisClampInZ:
            if (std::isnan(parameter) || parameter <= 0.0) throw ValidationError(name + ": bound must be > 0");
            break;
        case TruncationKind::RejectDensity:
        case TruncationKind::ClampEllipsoid:
            if (!(parameter > 0.0) || parameter > 1.0) throw ValidationError(name + ": quantile must lie in (0, 1]");
            break;
        case TruncationKind::InterpolateToMean:
        case TruncationKind::InterpolateInZ:
            if (!(parameter >= 0.0) || parameter > 1.0) throw ValidationError(name + ": psi must lie in [0, 1]");
            break;
        case TruncationKind::RandomReplace:
            if (!(parameter >= 0.0) || parameter > 1.0) throw ValidationError(name + ": fraction must lie in [0, 1]");
            break;
    }
}

EmbeddingSet apply_truncation(const TruncationStrategy& strategy, const EmbeddingSet& latents,
                              const LatentGaussianSpec& spec, const SyntheticMapping* mapping, std::uint64_t seed) {
    strategy.validate();
    if (latents.dim() != spec.dim()) throw ValidationError("latent dimension does not match the Gaussian");
    if (strategy.needs_mapping()) {
        if (mapping == nullptr) {
            throw ValidationError(std::string("strategy ") + strategy.letter() + " needs a Z->W mapping");
        }
        if (mapping->dim() != latents.dim()) throw ValidationError("mapping dimension does not match latents");
    }
    const double p = strategy.parameter;
    const Eigen::VectorXd& mean = spec.mean;

    switch (strategy.kind) {
        case TruncationKind::RejectDistance:
            return filter_rows(latents, [&](std::size_t i) { return (to_vector(latents.row(i)) - mean).norm() <= p; });

        case TruncationKind::RejectDensity: {
            const double level = mahalanobis_level(spec.dim(), p);
            const auto m2 = squared_mahalanobis(spec, latents);
            return filter_rows(latents, [&](std::size_t i) { return m2[i] <= level; });
        }

        case TruncationKind::ClampEllipsoid: {
            const double level = mahalanobis_level(spec.dim(), p);
            const auto m2 = squared_mahalanobis(spec, latents);
            std::vector<float> out;
            out.reserve(latents.values().size());
            for (std::size_t i = 0; i < latents.size(); ++i) {
                const Eigen::VectorXd x = to_vector(latents.row(i));
                append(out, m2[i] > level ? closest_point_on_ellipsoid(x, mean, spec.covariance, level) : x);
            }
            return EmbeddingSet(latents.size(), latents.dim(), std::move(out));
        }

        case TruncationKind::InterpolateToMean:
            return map_rows(latents, [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return mean + p * (x - mean); });

        case TruncationKind::InterpolateInZ:
            // The Z prior is standard normal, so its mean is the origin.
            return mapping->apply(map_rows(latents, [&](const Eigen::VectorXd& z) -> Eigen::VectorXd { return p * z; }));

        case TruncationKind::AxisClampInZ:
            return mapping->apply(map_rows(latents, [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
                return z.cwiseMax(-p).cwiseMin(p);
            }));

        case TruncationKind::RandomReplace: {
            std::vector<std::size_t> order(latents.size());
            std::iota(order.begin(), order.end(), 0);
            std::mt19937_64 rng(seed);
            std::shuffle(order.begin(), order.end(), rng);
            const auto replaced = static_cast<std::size_t>(std::llround(p * static_cast<double>(latents.size())));
            std::vector<std::uint8_t> hit(latents.size(), 0);
            for (std::size_t i = 0; i < replaced; ++i) hit[order[i]] = 1;

            std::vector<float> out;
            out.reserve(latents.values().size());
            for (std::size_t i = 0; i < latents.size(); ++i) {
                if (hit[i]) {
                    append(out, mean);
                } else {
                    auto r = latents.row(i);
                    out.insert(out.end(), r.begin(), r.end());
                }
            }
            return EmbeddingSet(latents.size(), latents.dim(), std::move(out));
        }
    }
    throw ValidationError("unhandled truncation strategy");
}

std::vector<SweepPoint> truncation_sweep(const TruncationStrategy& strategy, std::span<const double> grid,
                                         const EmbeddingSet& real, const EmbeddingSet& gen_latents,
                                         const LatentGaussianSpec& spec, const SyntheticMapping* mapping,
                                         const MetricConfig& metric, std::uint64_t seed) {
    if (grid.empty()) throw ValidationError("truncation sweep needs a non-empty parameter grid");
    std::vector<double> params(grid.begin(), grid.end());
    std::stable_sort(params.begin(), params.end());

    const LatentGaussianSpec real_moments = estimate_moments(real);
    std::vector<SweepPoint> out;
    out.reserve(params.size());
    for (double p : params) {
        TruncationStrategy s = strategy;
        s.parameter = p;
        const EmbeddingSet truncated = apply_truncation(s, gen_latents, spec, mapping, seed);
        SweepPoint point;
        point.parameter = p;
        point.metrics = precision_recall(real, truncated, metric);
        point.metrics.provenance = std::string("strategy=") + s.letter() + " parameter=" + std::to_string(p) +
                                   " seed=" + std::to_string(seed) + " " + point.metrics.provenance;
        point.frechet = frechet_gaussian_distance(real_moments, estimate_moments(truncated));
        out.push_back(std::move(point));
    }
    return out;
}

}  // namespace knnpr
