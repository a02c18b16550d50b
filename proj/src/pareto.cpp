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

#include <algorithm>
#include <cmath>

#include "knnpr/errors.hpp"
#include "knnpr/synthetic.hpp"

namespace knnpr {

std::vector<ScoredPoint> pareto_frontier(std::span<const ScoredPoint> points) {
    if (points.empty()) throw ValidationError("Pareto frontier of an empty set");
    for (const auto& p : points) {
        if (!(p.precision >= 0.0 && p.precision <= 1.0) || !(p.recall >= 0.0 && p.recall <= 1.0)) {
            throw ValidationError("scored point '" + p.id + "' has precision/recall outside [0, 1]");
        }
    }

    std::vector<ScoredPoint> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(), [](const ScoredPoint& a, const ScoredPoint& b) {
        if (a.precision != b.precision) return a.precision > b.precision;
        if (a.recall != b.recall) return a.recall > b.recall;
        return a.id < b.id;
    });

    // Sweeping in descending precision, a point survives only if it beats
    // every earlier (higher-or-equal precision) point on recall.
    std::vector<ScoredPoint> frontier;
    double best_recall = -1.0;
    for (auto& p : sorted) {
        if (p.recall > best_recall) {
            best_recall = p.recall;
            frontier.push_back(std::move(p));
        }
    }
    return frontier;
}

}  // namespace knnpr
