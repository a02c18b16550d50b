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

// Test-only reference implementations. Everything here is written directly
// from the definitions with plain loops and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "knnpr/embeddings.hpp"

namespace knnpr::oracle {

inline double squared_distance(const EmbeddingSet& a, std::size_t i, const EmbeddingSet& b, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.dim(); ++c) {
        const double d = static_cast<double>(a.row(i)[c]) - static_cast<double>(b.row(j)[c]);
        s += d * d;
    }
    return s;
}

/// kth-NN distance of every row, self excluded, by sorting full rows.
inline std::vector<double> kth_radii(const EmbeddingSet& set, std::size_t k) {
    std::vector<double> radii(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        std::vector<double> d;
        for (std::size_t j = 0; j < set.size(); ++j) {
            if (j != i) d.push_back(std::sqrt(squared_distance(set, i, set, j)));
        }
        std::sort(d.begin(), d.end());
        radii[i] = d[k - 1];
    }
    return radii;
}

/// f(query, manifold) for every query row.
inline std::vector<std::uint8_t> membership(const EmbeddingSet& manifold, const std::vector<double>& radii,
                                            const EmbeddingSet& queries) {
    std::vector<std::uint8_t> out(queries.size(), 0);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (std::size_t i = 0; i < manifold.size(); ++i) {
            if (std::sqrt(squared_distance(queries, q, manifold, i)) <= radii[i]) {
                out[q] = 1;
                break;
            }
        }
    }
    return out;
}

inline EmbeddingSet random_set(std::size_t n, std::size_t dim, std::mt19937_64& rng, double scale = 1.0,
                               double shift = 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<float> v(n * dim);
    for (auto& x : v) x = static_cast<float>(shift + scale * normal(rng));
    return EmbeddingSet(n, dim, std::move(v));
}

struct Point2 {
    std::string id;
    double precision;
    double recall;
};

/// O(n^2) domination filter.
template <class P>
std::vector<P> naive_frontier(const std::vector<P>& pts) {
    std::vector<P> out;
    for (const auto& p : pts) {
        bool dominated = false;
        for (const auto& q : pts) {
            if (q.precision >= p.precision && q.recall >= p.recall &&
                (q.precision > p.precision || q.recall > p.recall)) {
                dominated = true;
                break;
            }
        }
        if (dominated) continue;
        auto dup = std::find_if(out.begin(), out.end(), [&](const P& o) {
            return o.precision == p.precision && o.recall == p.recall;
        });
        if (dup == out.end()) {
            out.push_back(p);
        } else if (p.id < dup->id) {
            *dup = p;
        }
    }
    return out;
}

/// Minimum distance from (px, py) to the axis-aligned ellipse with semi-axes
/// (a, b), by dense sampling of the boundary angle.
inline double ellipse_min_distance(double a, double b, double px, double py, std::size_t samples) {
    double best = INFINITY;
    for (std::size_t s = 0; s < samples; ++s) {
        const double t = 2.0 * M_PI * static_cast<double>(s) / static_cast<double>(samples);
        best = std::min(best, std::hypot(a * std::cos(t) - px, b * std::sin(t) - py));
    }
    return best;
}

}  // namespace knnpr::oracle
