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

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "knnpr/embeddings.hpp"
#include "knnpr/metric.hpp"

namespace knnpr {

// ---------------------------------------------------------------------------
// Gaussian mixtures and the mode drop / invention experiment

struct MixtureComponent {
    std::vector<double> mean;
    double stddev = 1.0;
    double weight = 1.0;
};

/// Isotropic Gaussian mixture. Weights must be positive and sum to 1.
struct GaussianMixtureSpec {
    std::vector<MixtureComponent> components;

    std::size_t dim() const { return components.empty() ? 0 : components.front().mean.size(); }
    void validate() const;
};

/// n i.i.d. draws: pick a component by weight, then an isotropic normal draw.
EmbeddingSet sample_mixture(const GaussianMixtureSpec& spec, std::size_t n, std::uint64_t seed);

/// Geometry of the synthetic mode experiment: total_modes equal-weight 2-D
/// modes evenly spaced on a circle; the real distribution uses the first
/// real_modes of them.
struct ModeLayout {
    double radius = 10.0;
    double stddev = 0.3;
    std::size_t total_modes = 10;
    std::size_t real_modes = 5;
};

/// Equal-weight mixture over the first `count` modes of the layout.
GaussianMixtureSpec circle_modes(std::size_t count, const ModeLayout& layout = {});

/// Precision and recall of a generator covering the first num_gen_modes
/// modes (1..total_modes) against the real_modes-mode real distribution.
PrecisionRecallResult mode_experiment(std::size_t num_gen_modes, std::size_t samples_per_side, std::size_t k,
                                      std::uint64_t seed, const ModeLayout& layout = {},
                                      const BlockConfig& blocks = {});

// ---------------------------------------------------------------------------
// Latent Gaussians

struct LatentGaussianSpec {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
    /// Symmetric within 1e-6 and strictly positive definite.
    void validate() const;
};

/// Sample mean and unbiased covariance. Throws ValidationError when the
/// covariance is rank-deficient (including N < D + 1).
LatentGaussianSpec fit_gaussian(const EmbeddingSet& samples);

/// Same moments without the rank check; needs N >= 2.
LatentGaussianSpec estimate_moments(const EmbeddingSet& samples);

EmbeddingSet sample_gaussian(const LatentGaussianSpec& spec, std::size_t n, std::uint64_t seed);

/// Squared Mahalanobis distance (x - mean)^T cov^-1 (x - mean) of every row.
std::vector<double> squared_mahalanobis(const LatentGaussianSpec& spec, const EmbeddingSet& rows);

/// Level c whose ellipsoid {m^2 <= c} holds the given probability mass of the
/// Gaussian (chi-square inverse CDF with dim degrees of freedom). q = 1 maps to
/// +infinity.
double mahalanobis_level(std::size_t dim, double quantile);

/// Euclidean-closest point on {x : (x - center)^T cov^-1 (x - center) = level}
/// for a point strictly outside it.
Eigen::VectorXd closest_point_on_ellipsoid(const Eigen::VectorXd& point, const Eigen::VectorXd& center,
                                           const Eigen::MatrixXd& covariance, double level);

/// Closed-form Frechet (2-Wasserstein) distance between two Gaussians:
/// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)). Accepts symmetric
/// positive semi-definite covariances.
double frechet_gaussian_distance(const LatentGaussianSpec& a, const LatentGaussianSpec& b);

// ---------------------------------------------------------------------------
// Truncation

/// w = M tanh(z) + b: a fixed nonlinear map from a standard-normal input
/// space Z to the working latent space W.
struct SyntheticMapping {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd offset;

    /// Deterministic in (dim, seed); the matrix has condition number < 1e6.
    static SyntheticMapping from_seed(std::size_t dim, std::uint64_t seed);

    std::size_t dim() const { return static_cast<std::size_t>(offset.size()); }
    EmbeddingSet apply(const EmbeddingSet& z) const;
};

enum class TruncationKind {
    RejectDistance,     // A: drop rows farther than `parameter` from the mean
    RejectDensity,      // B: drop rows outside the `parameter`-quantile ellipsoid
    ClampEllipsoid,     // C: project rows outside that ellipsoid onto it
    InterpolateToMean,  // D: mean + psi (x - mean)
    InterpolateInZ,     // E: psi z in Z, then map
    AxisClampInZ,       // F: clamp each z coordinate to [-bound, bound], then map
    RandomReplace,      // G: replace a seeded fraction of rows with the mean
};

struct TruncationStrategy {
    TruncationKind kind = TruncationKind::InterpolateToMean;
    double parameter = 1.0;

    /// Letters A..G, case-insensitive.
    static TruncationStrategy from_letter(char letter, double parameter);
    char letter() const;
    bool needs_mapping() const;
    void validate() const;
};

/// Applies the strategy. A-D and G take W-space rows; E and F take Z-space
/// rows and require `mapping`. Output rows are in W.
EmbeddingSet apply_truncation(const TruncationStrategy& strategy, const EmbeddingSet& latents,
                              const LatentGaussianSpec& spec, const SyntheticMapping* mapping, std::uint64_t seed);

struct SweepPoint {
    double parameter = 0.0;
    PrecisionRecallResult metrics;
    double frechet = 0.0;
};

/// Evaluates the strategy at every grid value against `real`; the Frechet
/// column compares Gaussians fitted to `real` and to the truncated set.
/// Output is sorted by ascending parameter.
std::vector<SweepPoint> truncation_sweep(const TruncationStrategy& strategy, std::span<const double> grid,
                                         const EmbeddingSet& real, const EmbeddingSet& gen_latents,
                                         const LatentGaussianSpec& spec, const SyntheticMapping* mapping,
                                         const MetricConfig& metric, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Pareto frontier

struct ScoredPoint {
    std::string id;
    double precision = 0.0;
    double recall = 0.0;
    std::optional<double> aux;
};

/// Non-dominated subset under (precision, recall) maximisation, sorted by
/// descending precision. Exact coordinate duplicates collapse onto the
/// lexicographically smallest id.
std::vector<ScoredPoint> pareto_frontier(std::span<const ScoredPoint> points);

}  // namespace knnpr
