#include "nostill/stationary_model.hpp"

#include <cmath>
#include <limits>

namespace nostill {

StationaryModel::StationaryModel(StationaryParams params, Dataset train)
    : params_(std::move(params)),
      train_(std::move(train)),
      gp_(train_.points(), train_.values(), gram_stationary(train_.points(), params_.kernel), params_.noise_var) {}

Eigen::MatrixXd StationaryModel::gram(std::span<const SpaceTimePoint> a, std::span<const SpaceTimePoint> b) const {
    return gram_stationary(a, b, params_.kernel);
}

Normalization StationaryModel::normalization() const { return train_.normalization().value_or(Normalization{}); }

Prediction StationaryModel::predict(std::span<const SpaceTimePoint> targets) const {
    const auto pts = train_.points();
    auto out = gp_.predict(gram(targets, pts), gram(targets));
    const auto norm = normalization();
    out.mean = (out.mean.array() * norm.stddev + norm.mean).matrix();
    out.cov *= norm.stddev * norm.stddev;
    return out;
}

Eigen::VectorXd pack_stationary(const StationaryParams &params) {
    Eigen::VectorXd theta(5);
    theta << std::log(params.kernel.sigma_f), std::log(params.noise_var), std::log(params.kernel.length_scales[0]),
        std::log(params.kernel.length_scales[1]), std::log(params.kernel.length_scales[2]);
    return theta;
}

StationaryParams unpack_stationary(const Eigen::VectorXd &theta, const KernelSpec &like) {
    StationaryParams p;
    p.kernel = like;
    p.kernel.sigma_f = std::exp(theta[0]);
    p.noise_var = std::exp(theta[1]);
    p.kernel.length_scales = {std::exp(theta[2]), std::exp(theta[3]), std::exp(theta[4])};
    return p;
}

std::optional<ObjectiveValue> stationary_objective(const Eigen::VectorXd &theta, const KernelSpec &like,
                                                   std::span<const SpaceTimePoint> points,
                                                   const Eigen::VectorXd &values) {
    try {
        const auto params = unpack_stationary(theta, like);
        params.kernel.validate();
        const auto &l = params.kernel.length_scales;
        const auto n = static_cast<Eigen::Index>(points.size());

        Eigen::MatrixXd k(n, n);
        Eigen::MatrixXd dk_sigma(n, n);
        Eigen::MatrixXd dk_lx(n, n);
        Eigen::MatrixXd dk_ly(n, n);
        Eigen::MatrixXd dk_lt(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) {
                const auto &a = points[static_cast<std::size_t>(i)];
                const auto &b = points[static_cast<std::size_t>(j)];
                const double sx = (a.x - b.x) / l[0];
                const double sy = (a.y - b.y) / l[1];
                const double st = (a.t - b.t) / l[2];
                const auto kp = detail::space_time_partials(sx * sx + sy * sy, st * st, params.kernel);
                k(i, j) = k(j, i) = kp.value;
                dk_sigma(i, j) = dk_sigma(j, i) = kp.d_log_sigma_f;
                dk_lx(i, j) = dk_lx(j, i) = -2.0 * sx * sx * kp.d_H;
                dk_ly(i, j) = dk_ly(j, i) = -2.0 * sy * sy * kp.d_H;
                dk_lt(i, j) = dk_lt(j, i) = -2.0 * st * st * kp.d_U;
            }
        }
        const GPModel gp(std::vector<SpaceTimePoint>(points.begin(), points.end()), values, k, params.noise_var);
        const Eigen::MatrixXd kinv = gp.factor().solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)));
        const Eigen::MatrixXd w = gp.alpha() * gp.alpha().transpose() - kinv;

        ObjectiveValue out;
        out.value = gp.log_marginal_likelihood();
        out.gradient.resize(5);
        out.gradient[0] = 0.5 * w.cwiseProduct(dk_sigma).sum();
        out.gradient[1] = 0.5 * params.noise_var * w.trace();
        out.gradient[2] = 0.5 * w.cwiseProduct(dk_lx).sum();
        out.gradient[3] = 0.5 * w.cwiseProduct(dk_ly).sum();
        out.gradient[4] = 0.5 * w.cwiseProduct(dk_lt).sum();
        if (!std::isfinite(out.value)) { return std::nullopt; }
        return out;
    } catch (const NumericalError &) {
        return std::nullopt;
    } catch (const std::domain_error &) {
        return std::nullopt;
    }
}

StationaryParams initial_stationary_params(const Dataset &data, KernelFamily family, bool ch2_overall_variance,
                                           int spatial_dim_p) {
    const auto pts = data.points();
    const auto spacing = median_spacing(pts);
    StationaryParams p;
    p.kernel.family = family;
    p.kernel.sigma_f = 1.0;
    p.kernel.ch2_overall_variance = ch2_overall_variance;
    p.kernel.spatial_dim_p = spatial_dim_p;
    p.kernel.length_scales = {spacing[0], spacing[1], spacing[2]};
    p.noise_var = 0.1;
    return p;
}

StationaryFit train_stationary(const Dataset &data, KernelFamily family, const TrainConfig &config,
                               bool ch2_overall_variance, int spatial_dim_p) {
    const auto init = initial_stationary_params(data, family, ch2_overall_variance, spatial_dim_p);
    const auto pts = data.points();
    const Eigen::VectorXd y = data.values();
    const Objective objective = [&](const Eigen::VectorXd &theta) {
        return stationary_objective(theta, init.kernel, pts, y);
    };
    auto result = maximize(objective, pack_stationary(init), config, uniform_restarts(config.restart_spread));
    auto params = unpack_stationary(result.x, init.kernel);
    return {StationaryModel(std::move(params), data), std::move(result)};
}

}  // namespace nostill
