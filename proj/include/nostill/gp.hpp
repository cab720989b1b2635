#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nostill/types.hpp"

namespace nostill {

/// Anything that can produce a prior covariance between two point sets.
class Covariance {
public:
    virtual ~Covariance() = default;
    [[nodiscard]] virtual Eigen::MatrixXd gram(std::span<const SpaceTimePoint> a,
                                               std::span<const SpaceTimePoint> b) const = 0;
    [[nodiscard]] virtual Eigen::MatrixXd gram(std::span<const SpaceTimePoint> a) const { return gram(a, a); }
};

/// Cholesky factor of a symmetric PD matrix with the jitter actually used.
struct JitteredCholesky {
    Eigen::MatrixXd lower;
    double jitter = 0.0;

    [[nodiscard]] double log_det() const { return 2.0 * lower.diagonal().array().log().sum(); }
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd &rhs) const;
    [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd &rhs) const;
};

/// Factor `m + jitter * I`. Tries jitter 0 first, then 1e-10 * trace/n
/// escalating x10 up to 1e-4 * trace/n. Throws NumericalError when every level fails.
JitteredCholesky jittered_cholesky(const Eigen::MatrixXd &m);

struct Prediction {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // raw posterior covariance, may carry tiny negative diagonal noise

    /// Diagonal clamped at zero, for reporting.
    [[nodiscard]] Eigen::VectorXd variance() const { return cov.diagonal().cwiseMax(0.0); }
};

/// Exact GP regression over a fixed training set with a cached factor of
/// K(X, X) + noise_var * I.
class GPModel {
public:
    GPModel(std::vector<SpaceTimePoint> points, Eigen::VectorXd values, std::shared_ptr<const Covariance> kernel,
            double noise_var);
    /// Uses a precomputed prior gram instead of calling a kernel.
    GPModel(std::vector<SpaceTimePoint> points, Eigen::VectorXd values, const Eigen::MatrixXd &prior_gram,
            double noise_var);

    [[nodiscard]] double log_marginal_likelihood() const;

    /// Requires the kernel-backed constructor.
    [[nodiscard]] Prediction predict(std::span<const SpaceTimePoint> targets) const;
    /// Prediction from precomputed K(X*, X) and K(X*, X*).
    [[nodiscard]] Prediction predict(const Eigen::MatrixXd &cross, const Eigen::MatrixXd &target_prior) const;

    [[nodiscard]] const std::vector<SpaceTimePoint> &points() const { return points_; }
    [[nodiscard]] const Eigen::VectorXd &values() const { return values_; }
    [[nodiscard]] double noise_var() const { return noise_var_; }
    [[nodiscard]] const JitteredCholesky &factor() const { return factor_; }
    /// K_y^-1 y.
    [[nodiscard]] const Eigen::VectorXd &alpha() const { return alpha_; }

private:
    void factorize(const Eigen::MatrixXd &prior_gram);

    std::vector<SpaceTimePoint> points_;
    Eigen::VectorXd values_;
    std::shared_ptr<const Covariance> kernel_;
    double noise_var_ = 0.0;
    JitteredCholesky factor_;
    Eigen::VectorXd alpha_;
};

/// -1/2 y^T K^-1 y - 1/2 log|K| - n/2 log(2 pi) for an already noisy K.
double gaussian_log_likelihood(const Eigen::MatrixXd &noisy_gram, const Eigen::VectorXd &values);

/// Covariance of `cov` rows/cols `keep` after conditioning on `given`, where
/// the conditioned entries are observed with additive noise `noise_var`.
Eigen::MatrixXd conditional_covariance(const Eigen::MatrixXd &cov, const std::vector<std::size_t> &keep,
                                       const std::vector<std::size_t> &given, double noise_var);

/// log det of a covariance matrix through the jitter policy.
double log_det(const Eigen::MatrixXd &cov);

/// log det of the posterior covariance of `remaining` given noisy
/// observations at `conditioned_on`. Empty conditioning gives the prior term.
double posterior_entropy(const Covariance &kernel, std::span<const SpaceTimePoint> remaining,
                         std::span<const SpaceTimePoint> conditioned_on, double noise_var);

}  // namespace nostill
