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

// Blocked float distance kernel shared by the metric and realism modules.
//
// Distances are estimated as |q|^2 + |r|^2 - 2 q.r on float copies of the
// inputs that have been shifted by a common offset (the reference mean), so
// the norms in the expansion stay small. Every estimate comes with a rigorous
// rounding band; callers settle anything inside the band with
// exact_squared_distance on the original rows.

#include <Eigen/Core>
#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "knnpr/embeddings.hpp"
#include "knnpr/metric.hpp"

namespace knnpr::detail {

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct CenteredSet {
    RowMatrixF values;
    std::vector<double> squared_norms;
    double max_squared_norm = 0.0;
    std::vector<double> offset;
};

std::vector<double> column_mean(const EmbeddingSet& set);

CenteredSet center(const EmbeddingSet& set, std::span<const double> offset);

/// |estimate - exact| <= rounding_band(dim) * (|q|^2 + |r|^2), where the
/// norms are those of the centred float rows. Covers the float dot product
/// (any summation order), the float rounding of the centring shift and the
/// double rounding of the exact reference.
double rounding_band(std::size_t dim);

inline double squared_estimate(double query_norm, double ref_norm, float dot) {
    return query_norm + ref_norm - 2.0 * static_cast<double>(dot);
}

/// Runs row_fn(query_index, ref_begin, dots) for every row of every tile,
/// where dots[j] = <query, ref_begin + j> on the centred rows. Tiles are
/// visited in a fixed order; rows of one tile are handed out in parallel, so
/// row_fn must only touch per-query state.
template <class RowFn>
void for_each_tile(const CenteredSet& queries, const CenteredSet& refs, const BlockConfig& blocks, RowFn&& row_fn) {
    const auto nq = static_cast<std::ptrdiff_t>(queries.values.rows());
    const auto nr = static_cast<std::ptrdiff_t>(refs.values.rows());
    const auto qb = static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, blocks.query_block));
    const auto rb = static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, blocks.reference_block));

    RowMatrixF tile(std::min(qb, nq), std::min(rb, nr));
    for (std::ptrdiff_t q0 = 0; q0 < nq; q0 += qb) {
        const std::ptrdiff_t qn = std::min(qb, nq - q0);
        for (std::ptrdiff_t r0 = 0; r0 < nr; r0 += rb) {
            const std::ptrdiff_t rn = std::min(rb, nr - r0);
            auto out = tile.topLeftCorner(qn, rn);
            out.noalias() = queries.values.middleRows(q0, qn) * refs.values.middleRows(r0, rn).transpose();
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < qn; ++i) {
                row_fn(static_cast<std::size_t>(q0 + i), static_cast<std::size_t>(r0),
                       std::span<const float>(tile.row(i).data(), static_cast<std::size_t>(rn)));
            }
        }
    }
}

}  // namespace knnpr::detail
