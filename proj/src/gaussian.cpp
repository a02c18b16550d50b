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

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "knnpr/errors.hpp"
#include "knnpr/synthetic.hpp"

namespace knnpr {

namespace {

constexpr double kSymmetryTolerance = 1e-6;

void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() != m.cols()) throw ValidationError(std::string(what) + " is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        throw ValidationError(std::string(what) + " is not symmetric");
    }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Eigenpairs of a symmetric PSD matrix; throws if clearly indefinite.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> psd_eigen(const Eigen::MatrixXd& m, const char* what) {
    check_symmetric(m, what);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(m));
    if (eig.info() != Eigen::Success) throw ValidationError(std::string(what) + ": eigendecomposition failed");
    const double top = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-8 * top) {
        throw ValidationError(std::string(what) + " is not positive semi-definite");
    }
    return eig;
}

Eigen::VectorXd row_vector(const EmbeddingSet& set, std::size_t i) {
    auto r = set.row(i);
    Eigen::VectorXd v(static_cast<Eigen::Index>(r.size()));
    for (std::size_t j = 0; j < r.size(); ++j) v[static_cast<Eigen::Index>(j)] = r[j];
    return v;
}

}  // namespace

void LatentGaussianSpec::validate() const {
    if (mean.size() == 0) throw ValidationError("latent Gaussian needs a non-empty mean");
    if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
        throw ValidationError("covariance shape does not match mean dimension");
    }
    check_symmetric(covariance, "covariance");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(covariance), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
        throw ValidationError("covariance is not positive definite");
    }
}

LatentGaussianSpec estimate_moments(const EmbeddingSet& samples) {
    if (samples.size() < 2) throw ValidationError("need at least two samples to estimate a covariance");
    const auto n = static_cast<Eigen::Index>(samples.size());
    const auto d = static_cast<Eigen::Index>(samples.dim());
    const Eigen::MatrixXd x =
        Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(samples.data(), n, d)
            .cast<double>();
    LatentGaussianSpec spec;
    spec.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - spec.mean.transpose();
    spec.covariance = symmetrized((centered.transpose() * centered) / static_cast<double>(n - 1));
    return spec;
}

LatentGaussianSpec fit_gaussian(const EmbeddingSet& samples) {
    if (samples.size() < samples.dim() + 1) {
        throw ValidationError("fit_gaussian needs at least D+1 = " + std::to_string(samples.dim() + 1) +
                              " samples for a full-rank covariance, got " + std::to_string(samples.size()) +
                              "; add samples or regularise the covariance");
    }
    LatentGaussianSpec spec = estimate_moments(samples);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.covariance, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0) || eig.eigenvalues().minCoeff() <= 1e-12 * top) {
        throw ValidationError("sample covariance is rank-deficient; add samples or regularise the covariance");
    }
    return spec;
}

EmbeddingSet sample_gaussian(const LatentGaussianSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) throw ValidationError("sample count must be positive");
    const Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(spec.covariance));
    const Eigen::MatrixXd lower = llt.matrixL();
    const auto d = spec.mean.size();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<float> values;
    values.reserve(n * static_cast<std::size_t>(d));
    Eigen::VectorXd z(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
        const Eigen::VectorXd x = spec.mean + lower * z;
        for (Eigen::Index j = 0; j < d; ++j) values.push_back(static_cast<float>(x[j]));
    }
    return EmbeddingSet(n, static_cast<std::size_t>(d), std::move(values));
}

std::vector<double> squared_mahalanobis(const LatentGaussianSpec& spec, const EmbeddingSet& rows) {
    spec.validate();
    if (rows.dim() != spec.dim()) throw ValidationError("row dimension does not match the Gaussian");
    const Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(spec.covariance));
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Eigen::VectorXd y = llt.matrixL().solve(row_vector(rows, i) - spec.mean);
        out[i] = y.squaredNorm();
    }
    return out;
}

double mahalanobis_level(std::size_t dim, double quantile) {
    if (dim == 0) throw ValidationError("dimension must be positive");
    if (!(quantile > 0.0) || quantile > 1.0) throw ValidationError("density quantile must lie in (0, 1]");
    if (quantile == 1.0) return std::numeric_limits<double>::infinity();
    const boost::math::chi_squared_distribution<double> chi2(static_cast<double>(dim));
    return boost::math::quantile(chi2, quantile);
}

Eigen::VectorXd closest_point_on_ellipsoid(const Eigen::VectorXd& point, const Eigen::VectorXd& center,
                                           const Eigen::MatrixXd& covariance, double level) {
    if (point.size() != center.size() || covariance.rows() != center.size()) {
        throw ValidationError("ellipsoid projection: dimension mismatch");
    }
    if (!(level > 0.0) || !std::isfinite(level)) throw ValidationError("ellipsoid level must be finite and > 0");
    check_symmetric(covariance, "covariance");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(covariance));
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
        throw ValidationError("covariance is not positive definite");
    }

    // Principal-axis frame: the surface is sum_i y_i^2 / e_i^2 = 1.
    const Eigen::VectorXd axes_sq = level * eig.eigenvalues();
    const Eigen::VectorXd y = eig.eigenvectors().transpose() * (point - center);
    const double inside = (y.array().square() / axes_sq.array()).sum();
    if (!(inside > 1.0)) throw ValidationError("point is not strictly outside the ellipsoid");

    // F(t) = sum_i (e_i y_i / (t + e_i^2))^2 - 1 falls monotonically from
    // F(0) > 0 to F(t_hi) <= 0 with t_hi = e_max |y|.
    const Eigen::ArrayXd ey = axes_sq.array().sqrt() * y.array();
    auto secular = [&](double t) { return (ey / (t + axes_sq.array())).square().sum() - 1.0; };

    double lo = 0.0;
    double hi = std::sqrt(axes_sq.maxCoeff()) * y.norm();
    double t = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        t = 0.5 * (lo + hi);
        const double f = secular(t);
        if (std::abs(f) < 1e-10 || t == lo || t == hi) break;
        (f > 0.0 ? lo : hi) = t;
    }
    const Eigen::VectorXd x = (axes_sq.array() * y.array() / (t + axes_sq.array())).matrix();
    return center + eig.eigenvectors() * x;
}

double frechet_gaussian_distance(const LatentGaussianSpec& a, const LatentGaussianSpec& b) {
    if (a.dim() != b.dim()) throw ValidationError("Frechet distance: dimension mismatch");
    if (a.covariance.rows() != a.mean.size() || b.covariance.rows() != b.mean.size()) {
        throw ValidationError("Frechet distance: covariance shape does not match mean");
    }
    const auto eig_a = psd_eigen(a.covariance, "first covariance");
    psd_eigen(b.covariance, "second covariance");

    // Tr (S_a S_b)^(1/2) = Tr (S_a^(1/2) S_b S_a^(1/2))^(1/2), a symmetric PSD product.
    const Eigen::VectorXd root_vals = eig_a.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd root_a = eig_a.eigenvectors() * root_vals.asDiagonal() * eig_a.eigenvectors().transpose();
    const Eigen::MatrixXd product = symmetrized(root_a * symmetrized(b.covariance) * root_a);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_p(product, Eigen::EigenvaluesOnly);
    const double trace_root = eig_p.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    const double d = (a.mean - b.mean).squaredNorm() + a.covariance.trace() + b.covariance.trace() - 2.0 * trace_root;
    return std::max(d, 0.0);
}

}  // namespace knnpr
