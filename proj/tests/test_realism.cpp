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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "knnpr/errors.hpp"
#include "knnpr/realism.hpp"
#include "oracles.hpp"

using knnpr::EmbeddingSet;
using knnpr::ManifoldEstimate;
using knnpr::PrunedManifold;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Observed on the first reference run of the Gaussian path tests.
constexpr double kFrozenUnprunedStray = 0.0;
constexpr double kFrozenPrunedStray = 0.233;

PrunedManifold small_line() {
    return PrunedManifold(ManifoldEstimate(EmbeddingSet(4, 1, {0, 1, 3, 7}), 1));
}

double score(const PrunedManifold& m, std::initializer_list<float> q) {
    return knnpr::realism_score(std::vector<float>(q), m).value;
}

// Independent scalar realism over an explicit sphere list.
double oracle_realism(const EmbeddingSet& feats, const std::vector<double>& radii, const std::vector<std::size_t>& kept,
                      const EmbeddingSet& queries, std::size_t q) {
    double best = 0.0;
    for (std::size_t r : kept) {
        const double d = std::sqrt(knnpr::oracle::squared_distance(queries, q, feats, r));
        if (d == 0.0) return kInf;
        best = std::max(best, radii[r] / d);
    }
    return best;
}

}  // namespace

TEST(Pruning, KeepsHalfRoundedUpWithIndexTies) {
    const auto m = small_line();
    EXPECT_EQ(std::vector<std::size_t>(m.kept().begin(), m.kept().end()), (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(m.kept_features().size(), 2u);

    // Radii for {0,2,4,6,8} at k=1 are all 2; the three lowest indices win.
    const PrunedManifold ties(ManifoldEstimate(EmbeddingSet(5, 1, {0, 2, 4, 6, 8}), 1));
    EXPECT_EQ(std::vector<std::size_t>(ties.kept().begin(), ties.kept().end()), (std::vector<std::size_t>{0, 1, 2}));

    const PrunedManifold all(ManifoldEstimate(EmbeddingSet(5, 1, {0, 2, 4, 6, 8}), 1), false);
    EXPECT_EQ(all.kept().size(), 5u);
    EXPECT_FALSE(all.pruned());
}

TEST(RealismScore, HandComputedLine) {
    const auto m = small_line();
    EXPECT_EQ(score(m, {2}), 1.0);
    EXPECT_EQ(score(m, {1}), kInf);
    EXPECT_TRUE(knnpr::realism_score(std::vector<float>{1}, m).is_sentinel());
    EXPECT_NEAR(score(m, {10}), 1.0 / 9.0, 1e-15);
    EXPECT_THROW(score(m, {1, 2}), knnpr::ValidationError);
}

TEST(RealismScore, SentinelOrdersAboveFiniteScores) {
    EXPECT_LT(knnpr::RealismScore{1e300}, knnpr::RealismScore{kInf});
}

TEST(RealismBatch, MatchesScalarOnHandExample) {
    const auto m = small_line();
    const auto out = knnpr::realism_scores_batch(EmbeddingSet(3, 1, {2, 1, 10}), m);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].value, 1.0);
    EXPECT_TRUE(out[1].is_sentinel());
    EXPECT_NEAR(out[2].value, 1.0 / 9.0, 1e-15);
    EXPECT_THROW(knnpr::realism_scores_batch(EmbeddingSet(1, 2, {0, 0}), m), knnpr::ValidationError);
}

TEST(RealismBatch, EqualsScalarAndOracleOnRandomData) {
    std::mt19937_64 rng(17);
    for (bool prune : {true, false}) {
        const EmbeddingSet base = knnpr::oracle::random_set(400, 7, rng);
        EmbeddingSet queries = knnpr::oracle::random_set(300, 7, rng, 1.5);
        const PrunedManifold m(ManifoldEstimate(base, 3, knnpr::BlockConfig{33, 41}), prune);
        const auto batch = knnpr::realism_scores_batch(queries, m);
        const auto radii = knnpr::oracle::kth_radii(base, 3);
        const std::vector<std::size_t> kept(m.kept().begin(), m.kept().end());
        for (std::size_t q = 0; q < queries.size(); ++q) {
            EXPECT_EQ(batch[q], knnpr::realism_score(queries.row(q), m)) << "query " << q;
            EXPECT_GT(batch[q].value, 0.0);
            const double want = oracle_realism(base, radii, kept, queries, q);
            EXPECT_NEAR(batch[q].value, want, 1e-12 * want);
        }
    }
}

TEST(RealismBatch, PermutationInvariant) {
    std::mt19937_64 rng(2);
    const PrunedManifold m(ManifoldEstimate(knnpr::oracle::random_set(200, 3, rng), 3));
    const EmbeddingSet queries = knnpr::oracle::random_set(150, 3, rng);
    std::vector<std::size_t> perm(queries.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto direct = knnpr::realism_scores_batch(queries, m);
    const auto shuffled = knnpr::realism_scores_batch(queries.select(perm), m);
    for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(shuffled[i], direct[perm[i]]);
}

TEST(RealismConsistency, UnprunedIffAndPrunedImplies) {
    std::mt19937_64 rng(42);
    const EmbeddingSet base = knnpr::oracle::random_set(500, 4, rng);
    const EmbeddingSet queries = knnpr::oracle::random_set(2000, 4, rng, 1.6);
    const ManifoldEstimate est(base, 3);
    const auto f = knnpr::manifold_membership(est, queries);
    const auto full = knnpr::realism_scores_batch(queries, PrunedManifold(est, false));
    const auto half = knnpr::realism_scores_batch(queries, PrunedManifold(est, true));
    std::size_t inside = 0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        EXPECT_EQ(full[q].value >= 1.0, f[q] == 1) << "query " << q;
        if (half[q].value >= 1.0) {
            EXPECT_EQ(f[q], 1) << "query " << q;
        }
        inside += f[q];
    }
    // Both sides of the boundary are exercised.
    EXPECT_GT(inside, 200u);
    EXPECT_LT(inside, 1900u);
}

TEST(RealismConsistency, QueriesPlacedOnSphereBoundaries) {
    std::mt19937_64 rng(9);
    const EmbeddingSet base = knnpr::oracle::random_set(100, 3, rng);
    const ManifoldEstimate est(base, 2);
    std::vector<float> v;
    for (std::size_t i = 0; i < base.size(); ++i) {
        // Offset along the first axis by the radius, so f and R >= 1 sit on the tie.
        for (std::size_t c = 0; c < 3; ++c) {
            v.push_back(base.row(i)[c] + (c == 0 ? static_cast<float>(est.radii()[i]) : 0.0f));
        }
    }
    const EmbeddingSet queries(base.size(), 3, std::move(v));
    const auto f = knnpr::manifold_membership(est, queries);
    const auto r = knnpr::realism_scores_batch(queries, PrunedManifold(est, false));
    for (std::size_t q = 0; q < queries.size(); ++q) EXPECT_EQ(r[q].value >= 1.0, f[q] == 1) << "query " << q;
}

TEST(RealismScore, ScaleInvariant) {
    std::mt19937_64 rng(12);
    const EmbeddingSet base = knnpr::oracle::random_set(300, 5, rng);
    const EmbeddingSet queries = knnpr::oracle::random_set(200, 5, rng, 1.4);
    const auto scaled = [](const EmbeddingSet& s, float c) {
        std::vector<float> v(s.values().begin(), s.values().end());
        for (auto& x : v) x *= c;
        return EmbeddingSet(s.size(), s.dim(), std::move(v));
    };
    const PrunedManifold m(ManifoldEstimate(base, 3));
    const auto a = knnpr::realism_scores_batch(queries, m);
    for (float c : {0.01f, 3.7f, 250.0f}) {
        const PrunedManifold mc(ManifoldEstimate(scaled(base, c), 3));
        const auto b = knnpr::realism_scores_batch(scaled(queries, c), mc);
        for (std::size_t q = 0; q < queries.size(); ++q) EXPECT_NEAR(b[q].value, a[q].value, 1e-5 * a[q].value);
    }
}

TEST(RealismScore, DecreasesAlongRayFromIsolatedSphere) {
    // Two rows keep one sphere, centred at the origin.
    const PrunedManifold m(ManifoldEstimate(EmbeddingSet(2, 2, {0, 0, 5, 0}), 1));
    ASSERT_EQ(m.kept().size(), 1u);
    double prev = kInf;
    for (float t = -0.5f; t > -50.0f; t *= 1.5f) {
        const double r = knnpr::realism_score(std::vector<float>{t, 0.0f}, m).value;
        EXPECT_LT(r, prev);
        prev = r;
    }
}

TEST(InterpolationPaths, ConstantAndOnManifoldPaths) {
    const auto m = small_line();
    std::vector<knnpr::EndpointPair> constant(3, {{2.0f}, {2.0f}});
    const auto rep = knnpr::interpolation_path_stats(constant, 10, m);
    EXPECT_EQ(rep.num_paths, 3u);
    EXPECT_EQ(rep.num_steps, 10u);
    EXPECT_EQ(rep.strayed, 0u);
    EXPECT_EQ(rep.stray_fraction, 0.0);

    // 0 -> 1 with three steps puts the only intermediate point at 0.5 (R = 2).
    const std::vector<knnpr::EndpointPair> on{{{0.0f}, {1.0f}}};
    EXPECT_EQ(knnpr::interpolation_path_stats(on, 3, m).strayed, 0u);

    // 20 -> 40: every intermediate scores far below 0.9.
    const std::vector<knnpr::EndpointPair> off{{{20.0f}, {40.0f}}, {{2.0f}, {2.0f}}};
    const auto rep2 = knnpr::interpolation_path_stats(off, 5, m);
    EXPECT_EQ(rep2.strayed, 1u);
    EXPECT_EQ(rep2.stray_fraction, 0.5);
}

TEST(InterpolationPaths, Errors) {
    const auto m = small_line();
    const std::vector<knnpr::EndpointPair> one{{{0.0f}, {1.0f}}};
    EXPECT_THROW(knnpr::interpolation_path_stats(one, 1, m), knnpr::ValidationError);
    EXPECT_THROW(knnpr::interpolation_path_stats({}, 10, m), knnpr::ValidationError);
    const std::vector<knnpr::EndpointPair> bad{{{0.0f, 1.0f}, {1.0f, 1.0f}}};
    EXPECT_THROW(knnpr::interpolation_path_stats(bad, 10, m), knnpr::ValidationError);
}

// Endpoints are 1000 disjoint pairs of fresh draws with R >= 1.
knnpr::InterpolationPathReport gaussian_paths(bool prune) {
    std::mt19937_64 rng(2024);
    const PrunedManifold m(ManifoldEstimate(knnpr::oracle::random_set(10000, 2, rng), 3), prune);
    const EmbeddingSet candidates = knnpr::oracle::random_set(6000, 2, rng);
    const auto scores = knnpr::realism_scores_batch(candidates, m);
    std::vector<std::vector<float>> realistic;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (scores[i].value >= 1.0) realistic.emplace_back(candidates.row(i).begin(), candidates.row(i).end());
    }
    EXPECT_GE(realistic.size(), 2000u);
    std::vector<knnpr::EndpointPair> pairs;
    for (std::size_t p = 0; p + 1 < 2 * std::min<std::size_t>(1000, realistic.size() / 2); p += 2) {
        pairs.push_back({realistic[p], realistic[p + 1]});
    }
    return knnpr::interpolation_path_stats(pairs, 20, m, 0.9, 0.25);
}

TEST(InterpolationPaths, GaussianReferenceUnpruned) {
    const auto rep = gaussian_paths(false);
    EXPECT_EQ(rep.num_paths, 1000u);
    EXPECT_LT(rep.stray_fraction, 0.05);
    EXPECT_NEAR(rep.stray_fraction, kFrozenUnprunedStray, 0.02) << rep.strayed;
}

// The pruned manifold covers only the denser half of the spheres, so chords
// through its ragged outer shell stray far more often.
TEST(InterpolationPaths, GaussianReferencePruned) {
    const auto rep = gaussian_paths(true);
    EXPECT_EQ(rep.num_paths, 1000u);
    EXPECT_NEAR(rep.stray_fraction, kFrozenPrunedStray, 0.02) << rep.strayed;
}
