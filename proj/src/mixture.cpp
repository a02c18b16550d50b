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

#include <cmath>
#include <numbers>
#include <random>

#include "knnpr/errors.hpp"
#include "knnpr/synthetic.hpp"
#include "seeding.hpp"

namespace knnpr {

void GaussianMixtureSpec::validate() const {
    if (components.empty()) throw ValidationError("mixture needs at least one component");
    const std::size_t d = dim();
    if (d == 0) throw ValidationError("mixture components need a non-empty mean");
    double total = 0.0;
    for (const auto& c : components) {
        if (c.mean.size() != d) throw ValidationError("mixture components have differing dimensions");
        if (!(c.stddev > 0.0) || !std::isfinite(c.stddev)) throw ValidationError("mixture stddev must be > 0");
        if (!(c.weight > 0.0)) throw ValidationError("mixture weights must be positive");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("mixture weights must sum to 1");
}

EmbeddingSet sample_mixture(const GaussianMixtureSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) throw ValidationError("sample count must be positive");
    const std::size_t d = spec.dim();

    std::vector<double> weights;
    for (const auto& c : spec.components) weights.push_back(c.weight);
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<float> values;
    values.reserve(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = spec.components[pick(rng)];
        for (std::size_t j = 0; j < d; ++j) values.push_back(static_cast<float>(c.mean[j] + c.stddev * normal(rng)));
    }
    return EmbeddingSet(n, d, std::move(values));
}

GaussianMixtureSpec circle_modes(std::size_t count, const ModeLayout& layout) {
    if (count < 1 || count > layout.total_modes) {
        throw ValidationError("mode count " + std::to_string(count) + " outside 1.." +
                              std::to_string(layout.total_modes));
    }
    GaussianMixtureSpec spec;
    for (std::size_t i = 0; i < count; ++i) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(layout.total_modes);
        spec.components.push_back({{layout.radius * std::cos(angle), layout.radius * std::sin(angle)},
                                   layout.stddev,
                                   1.0 / static_cast<double>(count)});
    }
    return spec;
}

PrecisionRecallResult mode_experiment(std::size_t num_gen_modes, std::size_t samples_per_side, std::size_t k,
                                      std::uint64_t seed, const ModeLayout& layout, const BlockConfig& blocks) {
    if (num_gen_modes < 1 || num_gen_modes > layout.total_modes) {
        throw ValidationError("num_gen_modes must be in 1.." + std::to_string(layout.total_modes));
    }
    const std::uint64_t real_seed = detail::derive_seed(seed, 0);
    const std::uint64_t gen_seed = detail::derive_seed(seed, 1);

    const EmbeddingSet real = sample_mixture(circle_modes(layout.real_modes, layout), samples_per_side, real_seed);
    const EmbeddingSet gen = sample_mixture(circle_modes(num_gen_modes, layout), samples_per_side, gen_seed);
    auto result = precision_recall(real, gen, MetricConfig{k, blocks});
    result.provenance = "mode_experiment gen_modes=" + std::to_string(num_gen_modes) +
                        " real_modes=" + std::to_string(layout.real_modes) + " n=" + std::to_string(samples_per_side) +
                        " seed=" + std::to_string(seed) + " " + result.provenance;
    return result;
}

}  // namespace knnpr
