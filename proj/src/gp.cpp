#include "nostill/gp.hpp"

#include <cmath>
#include <numbers>

namespace nostill {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterStop = 1e-4;

Eigen::MatrixXd select(const Eigen::MatrixXd &m, const std::vector<std::size_t> &rows,
                       const std::vector<std::size_t> &cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                m(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
        }
    }
    return out;
}

}  // namespace

Eigen::VectorXd JitteredCholesky::solve(const Eigen::VectorXd &rhs) const {
    const auto l = lower.triangularView<Eigen::Lower>();
    return l.transpose().solve(l.solve(rhs));
}

Eigen::MatrixXd JitteredCholesky::solve(const Eigen::MatrixXd &rhs) const {
    const auto l = lower.triangularView<Eigen::Lower>();
    return l.transpose().solve(l.solve(rhs));
}

JitteredCholesky jittered_cholesky(const Eigen::MatrixXd &m) {
    const auto n = m.rows();
    if (n == 0) { return {Eigen::MatrixXd(0, 0), 0.0}; }
    if (!m.allFinite()) { throw NumericalError("cholesky: matrix has non-finite entries"); }
    double scale = m.trace() / static_cast<double>(n);
    if (!(scale > 0.0)) { scale = 1.0; }
    // A plain factorization is tried first; the ladder only kicks in on failure.
    for (double rel = 0.0; rel <= kJitterStop * 1.000001; rel = rel == 0.0 ? kJitterStart : rel * 10.0) {
        const double jitter = rel * scale;
        Eigen::MatrixXd shifted = m;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0) {
            return {llt.matrixL(), jitter};
        }
    }
    throw NumericalError("cholesky failed after jitter escalation to " + std::to_string(kJitterStop) + " * trace/n");
}

GPModel::GPModel(std::vector<SpaceTimePoint> points, Eigen::VectorXd values, std::shared_ptr<const Covariance> kernel,
                 double noise_var)
    : points_(std::move(points)), values_(std::move(values)), kernel_(std::move(kernel)), noise_var_(noise_var) {
    if (!kernel_) { throw std::invalid_argument("GPModel needs a kernel"); }
    factorize(kernel_->gram(points_));
}

GPModel::GPModel(std::vector<SpaceTimePoint> points, Eigen::VectorXd values, const Eigen::MatrixXd &prior_gram,
                 double noise_var)
    : points_(std::move(points)), values_(std::move(values)), noise_var_(noise_var) {
    factorize(prior_gram);
}

void GPModel::factorize(const Eigen::MatrixXd &prior_gram) {
    if (!(noise_var_ >= 0.0)) { throw std::invalid_argument("noise variance must be >= 0"); }
    const auto n = static_cast<Eigen::Index>(points_.size());
    if (values_.size() != n || prior_gram.rows() != n || prior_gram.cols() != n) {
        throw std::invalid_argument("GPModel: points, values and gram sizes differ");
    }
    Eigen::MatrixXd ky = prior_gram;
    ky.diagonal().array() += noise_var_;
    factor_ = jittered_cholesky(ky);
    alpha_ = factor_.solve(values_);
}

double GPModel::log_marginal_likelihood() const {
    const double n = static_cast<double>(values_.size());
    return -0.5 * values_.dot(alpha_) - 0.5 * factor_.log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

Prediction GPModel::predict(std::span<const SpaceTimePoint> targets) const {
    if (!kernel_) { throw std::logic_error("GPModel::predict: model was built from a precomputed gram"); }
    return predict(kernel_->gram(targets, points_), kernel_->gram(targets));
}

Prediction GPModel::predict(const Eigen::MatrixXd &cross, const Eigen::MatrixXd &target_prior) const {
    Prediction out;
    out.mean = cross * alpha_;
    const Eigen::MatrixXd v = factor_.lower.triangularView<Eigen::Lower>().solve(cross.transpose());
    out.cov = target_prior - v.transpose() * v;
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

double gaussian_log_likelihood(const Eigen::MatrixXd &noisy_gram, const Eigen::VectorXd &values) {
    const auto chol = jittered_cholesky(noisy_gram);
    const double n = static_cast<double>(values.size());
    return -0.5 * values.dot(chol.solve(values)) - 0.5 * chol.log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

Eigen::MatrixXd conditional_covariance(const Eigen::MatrixXd &cov, const std::vector<std::size_t> &keep,
                                       const std::vector<std::size_t> &given, double noise_var) {
    Eigen::MatrixXd out = select(cov, keep, keep);
    if (given.empty()) { return out; }
    Eigen::MatrixXd gg = select(cov, given, given);
    gg.diagonal().array() += noise_var;
    const auto chol = jittered_cholesky(gg);
    const Eigen::MatrixXd v = chol.lower.triangularView<Eigen::Lower>().solve(select(cov, given, keep));
    out -= v.transpose() * v;
    return 0.5 * (out + out.transpose());
}

double log_det(const Eigen::MatrixXd &cov) {
    if (cov.rows() == 0) { return 0.0; }
    return jittered_cholesky(cov).log_det();
}

double posterior_entropy(const Covariance &kernel, std::span<const SpaceTimePoint> remaining,
                         std::span<const SpaceTimePoint> conditioned_on, double noise_var) {
    std::vector<SpaceTimePoint> all(remaining.begin(), remaining.end());
    all.insert(all.end(), conditioned_on.begin(), conditioned_on.end());
    const Eigen::MatrixXd joint = kernel.gram(all);
    std::vector<std::size_t> keep(remaining.size());
    std::vector<std::size_t> given(conditioned_on.size());
    for (std::size_t i = 0; i < keep.size(); ++i) { keep[i] = i; }
    for (std::size_t i = 0; i < given.size(); ++i) { given[i] = remaining.size() + i; }
    return log_det(conditional_covariance(joint, keep, given, noise_var));
}

}  // namespace nostill
