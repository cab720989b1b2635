#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library: determinants and inverses go through full-pivot LU on explicitly
// assembled matrices, never through the Cholesky paths the library uses.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "nostill/types.hpp"

namespace oracle {

using Index = std::vector<std::size_t>;

inline Eigen::MatrixXd sub(const Eigen::MatrixXd &m, const Index &rows, const Index &cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                m(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
        }
    }
    return out;
}

inline double logdet(const Eigen::MatrixXd &m) {
    if (m.rows() == 0) { return 0.0; }
    return std::log(m.fullPivLu().determinant());
}

inline Eigen::MatrixXd inverse(const Eigen::MatrixXd &m) { return m.fullPivLu().inverse(); }

inline double lml(const Eigen::MatrixXd &noisy_gram, const Eigen::VectorXd &y) {
    const double n = static_cast<double>(y.size());
    return -0.5 * y.dot(inverse(noisy_gram) * y) - 0.5 * logdet(noisy_gram) - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

/// Covariance of `keep` given readings at `given` with additive noise.
inline Eigen::MatrixXd schur(const Eigen::MatrixXd &cov, const Index &keep, const Index &given, double noise) {
    Eigen::MatrixXd out = sub(cov, keep, keep);
    if (given.empty()) { return out; }
    Eigen::MatrixXd gg = sub(cov, given, given);
    gg.diagonal().array() += noise;
    const Eigen::MatrixXd kg = sub(cov, keep, given);
    return out - kg * inverse(gg) * kg.transpose();
}

enum class Score { Entropy, MutualInformation, Krause };

/// Per-step exhaustive greedy: every candidate's score is recomputed from
/// scratch with explicit conditional covariances. Same relative jitter as
/// the selection rule (1e-8 * trace / n).
inline std::vector<std::size_t> greedy(const Eigen::MatrixXd &cov_in, std::size_t k, Score score, double noise = 0.0,
                                       const Index &observed = {}) {
    const auto n = static_cast<std::size_t>(cov_in.rows());
    Eigen::MatrixXd cov = cov_in;
    cov.diagonal().array() += 1e-8 * cov_in.trace() / static_cast<double>(n);
    Index chosen;
    Index conditioned = observed;
    while (chosen.size() < k) {
        Index remaining;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::find(conditioned.begin(), conditioned.end(), i) == conditioned.end()) { remaining.push_back(i); }
        }
        std::size_t best = n;
        double best_value = -std::numeric_limits<double>::infinity();
        for (auto c : remaining) {
            Index rest;
            for (auto r : remaining) {
                if (r != c) { rest.push_back(r); }
            }
            Index with_c = conditioned;
            with_c.push_back(c);
            const double h_after = logdet(schur(cov, rest, with_c, noise));
            double v = 0.0;
            switch (score) {
            case Score::Entropy: v = -h_after; break;
            case Score::MutualInformation: v = logdet(sub(cov, rest, rest)) - h_after; break;
            case Score::Krause: {
                const double reading = schur(cov, {c}, conditioned, noise)(0, 0) + noise;
                const double given_rest = schur(cov, {c}, rest, 0.0)(0, 0);
                v = std::log(reading) - std::log(given_rest);
                break;
            }
            }
            // Scores within a relative 1e-9 count as tied; the lowest index wins.
            if (best == n || v > best_value + 1e-9 * std::max(1.0, std::abs(best_value))) {
                best = c;
                best_value = v;
            }
        }
        chosen.push_back(best);
        conditioned.push_back(best);
    }
    return chosen;
}

inline double ch1(double h, double u, double sigma_f, int p) {
    return sigma_f * sigma_f / std::pow(u * u + 1.0, (p - 1) / 2.0) * std::exp(-h * h / (u * u + 1.0));
}

inline double ch2(double h, double u, double sigma_f, int p) {
    const double a = u * u + 1.0;
    return (sigma_f * sigma_f * u * u + 1.0) / std::pow(a * a + h * h, p / 2.0);
}

using Base = std::function<double(double h, double u)>;

/// One non-stationary entry in matrix form: local kernel matrices are built
/// as full 3x3 diagonals and combined with determinants and an inverse.
inline double ns_entry(const nostill::SpaceTimePoint &a, const nostill::SpaceTimePoint &b,
                       const std::array<double, 3> &la, const std::array<double, 3> &lb, const Base &base) {
    Eigen::Matrix3d sa = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d sb = Eigen::Matrix3d::Zero();
    for (int d = 0; d < 3; ++d) {
        sa(d, d) = la[static_cast<std::size_t>(d)] * la[static_cast<std::size_t>(d)];
        sb(d, d) = lb[static_cast<std::size_t>(d)] * lb[static_cast<std::size_t>(d)];
    }
    const Eigen::Matrix3d avg = 0.5 * (sa + sb);
    const double pref = std::pow(sa.determinant(), 0.25) * std::pow(sb.determinant(), 0.25) / std::sqrt(avg.determinant());
    const Eigen::Vector2d ds(a.x - b.x, a.y - b.y);
    const double q_s = ds.dot(avg.topLeftCorner<2, 2>().inverse() * ds);
    const double dt = a.t - b.t;
    const double q_t = dt * dt / avg(2, 2);
    return pref * base(std::sqrt(q_s), std::sqrt(q_t));
}

inline std::vector<nostill::SpaceTimePoint> random_points(std::mt19937_64 &rng, std::size_t n, double extent = 5.0) {
    std::uniform_real_distribution<double> u(0.0, extent);
    std::vector<nostill::SpaceTimePoint> out;
    for (std::size_t i = 0; i < n; ++i) { out.push_back({u(rng), u(rng), u(rng)}); }
    return out;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64 &rng, std::size_t n) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n) + 2);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) { a(i, j) = z(rng); }
    }
    return a * a.transpose() / static_cast<double>(a.cols());
}

}  // namespace oracle
