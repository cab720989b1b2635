#include "nostill/nostill_model.hpp"

#include <cmath>
#include <limits>

namespace nostill {

namespace {

constexpr int kLatentScaleCount = 3;

// Latent GP for one dimension, evaluated at a fixed target set.
struct LatentFit {
    Eigen::MatrixXd cross;      // K(targets, latent)
    JitteredCholesky factor;    // of K(latent, latent) + latent noise
    double prior_mean = 0.0;
    Eigen::VectorXd beta;       // factor^-1 (lbar - prior_mean)
    Eigen::VectorXd log_scale;  // prior_mean + cross * beta
};

LatentFit fit_latent(const KernelSpec &theta, const std::vector<SpaceTimePoint> &latent, const Eigen::VectorXd &lbar,
                     double noise, std::span<const SpaceTimePoint> targets) {
    LatentFit fit;
    Eigen::MatrixXd k = gram_stationary(latent, theta);
    k.diagonal().array() += noise;
    fit.factor = jittered_cholesky(k);
    fit.prior_mean = lbar.mean();
    fit.beta = fit.factor.solve(Eigen::VectorXd(lbar.array() - fit.prior_mean));
    fit.cross = gram_stationary(targets, latent, theta);
    fit.log_scale = (fit.cross * fit.beta).array() + fit.prior_mean;
    return fit;
}

// d k / d log(length scale e) for every pair, for a stationary latent kernel.
Eigen::MatrixXd latent_kernel_derivative(std::span<const SpaceTimePoint> a, std::span<const SpaceTimePoint> b,
                                         const KernelSpec &theta, int e) {
    const auto &l = theta.length_scales;
    Eigen::MatrixXd d(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double sx = (a[i].x - b[j].x) / l[0];
            const double sy = (a[i].y - b[j].y) / l[1];
            const double st = (a[i].t - b[j].t) / l[2];
            const auto kp = detail::space_time_partials(sx * sx + sy * sy, st * st, theta);
            double v = 0.0;
            if (e == 0) { v = -2.0 * sx * sx * kp.d_H; }
            if (e == 1) { v = -2.0 * sy * sy * kp.d_H; }
            if (e == 2) { v = -2.0 * st * st * kp.d_U; }
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return d;
}

const Eigen::VectorXd &lbar_of(const NostillParams &p, int d) {
    return d == 0 ? p.log_lbar_x : (d == 1 ? p.log_lbar_y : p.log_lbar_t);
}

const KernelSpec &theta_of(const NostillParams &p, int d) {
    return d == 0 ? p.theta_lx : (d == 1 ? p.theta_ly : p.theta_lt);
}

void validate_latent_kernel(const KernelSpec &theta, const char *name) {
    theta.validate();
    if (theta.length_scales.size() != kLatentScaleCount) {
        throw std::domain_error(std::string(name) + " needs 3 length scales");
    }
}

}  // namespace

void NostillParams::validate() const {
    const auto m = static_cast<Eigen::Index>(latent_points.size());
    if (m < 1) { throw std::domain_error("NOSTILL model needs at least one latent location"); }
    if (log_lbar_x.size() != m || log_lbar_y.size() != m || log_lbar_t.size() != m) {
        throw std::domain_error("latent log length vectors must have one entry per latent location");
    }
    for (const auto *v : {&log_lbar_x, &log_lbar_y, &log_lbar_t}) {
        const Eigen::ArrayXd e = v->array().exp();
        if (!e.allFinite() || (e <= 0.0).any()) { throw std::domain_error("latent length scales must be finite"); }
    }
    if (base_family != KernelFamily::CH1 && base_family != KernelFamily::CH2) {
        throw std::domain_error("NOSTILL base kernel must be CH1 or CH2");
    }
    if (!(sigma_f > 0.0) || !std::isfinite(sigma_f)) { throw std::domain_error("sigma_f must be positive"); }
    if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) { throw std::domain_error("noise variance must be >= 0"); }
    if (!(latent_noise_var >= 0.0)) { throw std::domain_error("latent noise must be >= 0"); }
    validate_latent_kernel(theta_lx, "theta_lx");
    validate_latent_kernel(theta_ly, "theta_ly");
    validate_latent_kernel(theta_lt, "theta_lt");
}

KernelSpec NostillParams::base_kernel() const {
    KernelSpec k;
    k.family = base_family;
    k.sigma_f = sigma_f;
    k.spatial_dim_p = spatial_dim_p;
    k.ch2_overall_variance = ch2_overall_variance;
    return k;
}

std::size_t parameter_count(const NostillParams &params) {
    return 2 + 3 * params.latent_count() + 3 * kLatentScaleCount;
}

Eigen::VectorXd pack_nostill(const NostillParams &params) {
    const auto m = static_cast<Eigen::Index>(params.latent_count());
    Eigen::VectorXd theta(static_cast<Eigen::Index>(parameter_count(params)));
    theta[0] = std::log(params.sigma_f);
    theta[1] = std::log(params.noise_var);
    theta.segment(2, m) = params.log_lbar_x;
    theta.segment(2 + m, m) = params.log_lbar_y;
    theta.segment(2 + 2 * m, m) = params.log_lbar_t;
    Eigen::Index at = 2 + 3 * m;
    for (int d = 0; d < 3; ++d) {
        for (double l : theta_of(params, d).length_scales) { theta[at++] = std::log(l); }
    }
    return theta;
}

NostillParams unpack_nostill(const Eigen::VectorXd &theta, const NostillParams &like) {
    NostillParams p = like;
    const auto m = static_cast<Eigen::Index>(like.latent_count());
    if (theta.size() != static_cast<Eigen::Index>(parameter_count(like))) {
        throw std::invalid_argument("parameter vector has the wrong length");
    }
    p.sigma_f = std::exp(theta[0]);
    p.noise_var = std::exp(theta[1]);
    p.log_lbar_x = theta.segment(2, m);
    p.log_lbar_y = theta.segment(2 + m, m);
    p.log_lbar_t = theta.segment(2 + 2 * m, m);
    Eigen::Index at = 2 + 3 * m;
    for (auto *spec : {&p.theta_lx, &p.theta_ly, &p.theta_lt}) {
        for (auto &l : spec->length_scales) { l = std::exp(theta[at++]); }
    }
    return p;
}

LatentLengthField infer_latent_field(const NostillParams &params, std::span<const SpaceTimePoint> targets) {
    params.validate();
    std::array<std::vector<double>, 3> scales;
    for (int d = 0; d < 3; ++d) {
        const auto fit = fit_latent(theta_of(params, d), params.latent_points, lbar_of(params, d),
                                    params.latent_noise_var, targets);
        const Eigen::VectorXd s = fit.log_scale.array().exp();
        scales[static_cast<std::size_t>(d)].assign(s.data(), s.data() + s.size());
    }
    return LatentLengthField(std::vector<SpaceTimePoint>(targets.begin(), targets.end()), std::move(scales[0]),
                             std::move(scales[1]), std::move(scales[2]));
}

double nostill_lml(const NostillParams &params, const Dataset &data) {
    try {
        const auto pts = data.points();
        const auto field = infer_latent_field(params, pts);
        const Eigen::MatrixXd k = gram_nonstationary(field, params.base_kernel(), params.sparse);
        const GPModel gp(pts, data.values(), k, params.noise_var);
        const double value = gp.log_marginal_likelihood();
        return std::isfinite(value) ? value : -std::numeric_limits<double>::infinity();
    } catch (const NumericalError &) {
        return -std::numeric_limits<double>::infinity();
    } catch (const std::domain_error &) {
        return -std::numeric_limits<double>::infinity();
    }
}

std::optional<ObjectiveValue> nostill_objective(const NostillParams &params, std::span<const SpaceTimePoint> points,
                                                const Eigen::VectorXd &values) {
    try {
        params.validate();
        const auto n = static_cast<Eigen::Index>(points.size());
        const auto m = static_cast<Eigen::Index>(params.latent_count());

        std::array<LatentFit, 3> latent;
        std::array<Eigen::ArrayXd, 3> scale;
        for (int d = 0; d < 3; ++d) {
            latent[static_cast<std::size_t>(d)] = fit_latent(theta_of(params, d), params.latent_points,
                                                             lbar_of(params, d), params.latent_noise_var, points);
            scale[static_cast<std::size_t>(d)] = latent[static_cast<std::size_t>(d)].log_scale.array().exp();
            if (!scale[static_cast<std::size_t>(d)].allFinite() || (scale[static_cast<std::size_t>(d)] <= 0.0).any()) {
                return std::nullopt;
            }
        }
        const auto &lx = scale[0];
        const auto &ly = scale[1];
        const auto &lt = scale[2];
        const KernelSpec base = params.base_kernel();

        // Gram plus the per-entry partials needed for the gradient. For the
        // pair (i, j), dk_*_i is d k_ij / d log l_*(i) and dk_*_j the same
        // with respect to point j.
        Eigen::MatrixXd k(n, n);
        Eigen::MatrixXd dk_sigma(n, n);
        Eigen::MatrixXd dx_i = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXd dy_i = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXd dt_i = Eigen::MatrixXd::Zero(n, n);
        const auto origin = detail::space_time_partials(0.0, 0.0, base);
        for (Eigen::Index i = 0; i < n; ++i) {
            k(i, i) = origin.value;
            dk_sigma(i, i) = origin.d_log_sigma_f;
            const auto &pi = points[static_cast<std::size_t>(i)];
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const auto &pj = points[static_cast<std::size_t>(j)];
                const double ax = lx[i] * lx[i], bx = lx[j] * lx[j];
                const double ay = ly[i] * ly[i], by = ly[j] * ly[j];
                const double at = lt[i] * lt[i], bt = lt[j] * lt[j];
                const double ddx = pi.x - pj.x, ddy = pi.y - pj.y, ddt = pi.t - pj.t;
                const double qx = 2.0 * ddx * ddx / (ax + bx);
                const double qy = 2.0 * ddy * ddy / (ay + by);
                const double qt = 2.0 * ddt * ddt / (at + bt);
                const double pref = std::sqrt(2.0 * lx[i] * lx[j] / (ax + bx)) *
                                    std::sqrt(2.0 * ly[i] * ly[j] / (ay + by)) *
                                    std::sqrt(2.0 * lt[i] * lt[j] / (at + bt));
                const auto kp = detail::space_time_partials(qx + qy, qt, base);
                detail::TaperPartials taper{1.0, 0.0};
                if (params.sparse) { taper = detail::esgp_taper(qx + qy + qt); }
                const double kij = pref * kp.value * taper.value;
                k(i, j) = k(j, i) = kij;
                dk_sigma(i, j) = dk_sigma(j, i) = pref * taper.value * kp.d_log_sigma_f;

                // d k / d H and d k / d U at fixed prefactor.
                const double gh = pref * (taper.value * kp.d_H + kp.value * taper.d_Q);
                const double gu = pref * (taper.value * kp.d_U + kp.value * taper.d_Q);
                dx_i(i, j) = kij * (bx - ax) / (2.0 * (ax + bx)) - gh * qx * 2.0 * ax / (ax + bx);
                dx_i(j, i) = kij * (ax - bx) / (2.0 * (ax + bx)) - gh * qx * 2.0 * bx / (ax + bx);
                dy_i(i, j) = kij * (by - ay) / (2.0 * (ay + by)) - gh * qy * 2.0 * ay / (ay + by);
                dy_i(j, i) = kij * (ay - by) / (2.0 * (ay + by)) - gh * qy * 2.0 * by / (ay + by);
                dt_i(i, j) = kij * (bt - at) / (2.0 * (at + bt)) - gu * qt * 2.0 * at / (at + bt);
                dt_i(j, i) = kij * (at - bt) / (2.0 * (at + bt)) - gu * qt * 2.0 * bt / (at + bt);
            }
        }

        const GPModel gp(std::vector<SpaceTimePoint>(points.begin(), points.end()), values, k, params.noise_var);
        const Eigen::MatrixXd kinv = gp.factor().solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)));
        const Eigen::MatrixXd w = gp.alpha() * gp.alpha().transpose() - kinv;

        ObjectiveValue out;
        out.value = gp.log_marginal_likelihood();
        if (!std::isfinite(out.value)) { return std::nullopt; }
        out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count(params)));
        out.gradient[0] = 0.5 * w.cwiseProduct(dk_sigma).sum();
        out.gradient[1] = 0.5 * params.noise_var * w.trace();

        // d lml / d log l_d(x_i) = sum_j W_ij d k_ij / d log l_d(x_i).
        const std::array<const Eigen::MatrixXd *, 3> partial{&dx_i, &dy_i, &dt_i};
        Eigen::Index at = 2 + 3 * m;
        for (int d = 0; d < 3; ++d) {
            const auto du = static_cast<std::size_t>(d);
            const Eigen::VectorXd g = w.cwiseProduct(*partial[du]).rowwise().sum();
            const auto &fit = latent[du];

            // log l(x) = mean(lbar) + K_*m K_m^-1 (lbar - mean(lbar)).
            const Eigen::VectorXd ctg = fit.factor.solve(Eigen::VectorXd(fit.cross.transpose() * g));
            const double inv_m = 1.0 / static_cast<double>(m);
            out.gradient.segment(2 + d * m, m) =
                (ctg.array() + inv_m * (g.sum() - ctg.sum())).matrix();

            const auto &theta = theta_of(params, d);
            for (int e = 0; e < kLatentScaleCount; ++e) {
                const Eigen::MatrixXd d_cross = latent_kernel_derivative(points, params.latent_points, theta, e);
                const Eigen::MatrixXd d_latent =
                    latent_kernel_derivative(params.latent_points, params.latent_points, theta, e);
                const Eigen::VectorXd v = fit.factor.solve(Eigen::VectorXd(d_latent * fit.beta));
                const Eigen::VectorXd d_log_scale = d_cross * fit.beta - fit.cross * v;
                out.gradient[at++] = g.dot(d_log_scale);
            }
        }
        if (!out.gradient.allFinite()) { return std::nullopt; }
        return out;
    } catch (const NumericalError &) {
        return std::nullopt;
    } catch (const std::domain_error &) {
        return std::nullopt;
    }
}

NostillModel::NostillModel(NostillParams params, Dataset train)
    : params_(std::move(params)),
      train_(std::move(train)),
      train_field_(infer_latent_field(params_, train_.points())),
      gp_(train_.points(), train_.values(), gram_nonstationary(train_field_, params_.base_kernel(), params_.sparse),
          params_.noise_var) {}

LatentLengthField NostillModel::field_at(std::span<const SpaceTimePoint> points) const {
    return infer_latent_field(params_, points);
}

Eigen::MatrixXd NostillModel::gram(std::span<const SpaceTimePoint> a, std::span<const SpaceTimePoint> b) const {
    const auto fa = field_at(a);
    if (a.data() == b.data() && a.size() == b.size()) {
        return gram_nonstationary(fa, params_.base_kernel(), params_.sparse);
    }
    const auto fb = field_at(b);
    return gram_nonstationary(a, b, fa, fb, params_.base_kernel(), params_.sparse);
}

Normalization NostillModel::normalization() const { return train_.normalization().value_or(Normalization{}); }

Prediction NostillModel::predict(std::span<const SpaceTimePoint> targets) const {
    const auto target_field = field_at(targets);
    const auto &train_pts = train_field_.points();
    const Eigen::MatrixXd cross =
        gram_nonstationary(targets, train_pts, target_field, train_field_, params_.base_kernel(), params_.sparse);
    auto out = gp_.predict(cross, gram_nonstationary(target_field, params_.base_kernel(), params_.sparse));
    const auto norm = normalization();
    out.mean = (out.mean.array() * norm.stddev + norm.mean).matrix();
    out.cov *= norm.stddev * norm.stddev;
    return out;
}

NostillParams initial_nostill_params(const Dataset &data, std::vector<SpaceTimePoint> latent_points,
                                     const NostillOptions &options) {
    const auto pts = data.points();
    const auto spacing = median_spacing(pts);
    const auto extent = domain_extent(pts);
    NostillParams p;
    p.base_family = options.base_family;
    p.sparse = options.sparse;
    p.ch2_overall_variance = options.ch2_overall_variance;
    p.spatial_dim_p = options.spatial_dim_p;
    p.sigma_f = 1.0;
    p.noise_var = 0.1;
    p.latent_noise_var = options.latent_noise_var;
    const auto m = static_cast<Eigen::Index>(latent_points.size());
    p.latent_points = std::move(latent_points);
    p.log_lbar_x = Eigen::VectorXd::Constant(m, std::log(spacing[0]));
    p.log_lbar_y = Eigen::VectorXd::Constant(m, std::log(spacing[1]));
    p.log_lbar_t = Eigen::VectorXd::Constant(m, std::log(spacing[2]));
    KernelSpec latent;
    latent.family = options.latent_family;
    latent.sigma_f = 1.0;
    latent.length_scales.resize(3);
    for (std::size_t d = 0; d < 3; ++d) { latent.length_scales[d] = extent[d] > 0.0 ? 0.5 * extent[d] : 1.0; }
    p.theta_lx = p.theta_ly = p.theta_lt = latent;
    return p;
}

NostillFit train_nostill(const Dataset &data, std::vector<SpaceTimePoint> latent_points, const NostillOptions &options,
                         const TrainConfig &config) {
    const auto init = initial_nostill_params(data, std::move(latent_points), options);
    init.validate();
    const auto pts = data.points();
    const Eigen::VectorXd y = data.values();
    const Objective objective = [&](const Eigen::VectorXd &theta) -> std::optional<ObjectiveValue> {
        try {
            return nostill_objective(unpack_nostill(theta, init), pts, y);
        } catch (const std::invalid_argument &) {
            return std::nullopt;
        }
    };
    auto result = maximize(objective, pack_nostill(init), config, uniform_restarts(config.restart_spread));
    auto params = unpack_nostill(result.x, init);
    return {NostillModel(std::move(params), data), std::move(result)};
}

}  // namespace nostill
