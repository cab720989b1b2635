#include "nostill/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nostill {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_separation(double v, const char *name) {
    if (!std::isfinite(v) || v < 0.0) {
        throw std::domain_error(std::string(name) + " must be finite and non-negative");
    }
}

void require_family(const KernelSpec &spec, KernelFamily family) {
    if (spec.family != family) { throw std::domain_error("kernel family mismatch: expected " + to_string(family)); }
}

double ch1_unchecked(double h, double u, const KernelSpec &spec) {
    const double a = u * u + 1.0;
    return spec.sigma_f * spec.sigma_f * std::pow(a, -0.5 * (spec.spatial_dim_p - 1)) * std::exp(-h * h / a);
}

double ch2_unchecked(double h, double u, const KernelSpec &spec) {
    const double s = spec.sigma_f * spec.sigma_f;
    const double a = u * u + 1.0;
    const double value = (s * u * u + 1.0) / std::pow(a * a + h * h, 0.5 * spec.spatial_dim_p);
    return spec.ch2_overall_variance ? s * value : value;
}

}  // namespace

std::string to_string(KernelFamily family) {
    switch (family) {
    case KernelFamily::CH1: return "CH1";
    case KernelFamily::CH2: return "CH2";
    case KernelFamily::ESGP: return "ESGP";
    case KernelFamily::SqExp: return "SqExp";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
    if (name == "CH1") { return KernelFamily::CH1; }
    if (name == "CH2") { return KernelFamily::CH2; }
    if (name == "ESGP") { return KernelFamily::ESGP; }
    if (name == "SqExp") { return KernelFamily::SqExp; }
    throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
    if (!(sigma_f > 0.0) || !std::isfinite(sigma_f)) { throw std::domain_error("sigma_f must be positive"); }
    if (spatial_dim_p < 1) { throw std::domain_error("spatial_dim_p must be >= 1"); }
    for (double l : length_scales) {
        if (!(l > 0.0) || !std::isfinite(l)) { throw std::domain_error("length scales must be positive"); }
    }
}

double KernelSpec::variance() const {
    const double s = sigma_f * sigma_f;
    if (family == KernelFamily::CH2) { return ch2_overall_variance ? s : 1.0; }
    return s;
}

double eval_ch1(double h, double u, const KernelSpec &spec) {
    require_family(spec, KernelFamily::CH1);
    require_separation(h, "h");
    require_separation(u, "u");
    return ch1_unchecked(h, u, spec);
}

double eval_ch2(double h, double u, const KernelSpec &spec) {
    require_family(spec, KernelFamily::CH2);
    require_separation(h, "h");
    require_separation(u, "u");
    return ch2_unchecked(h, u, spec);
}

double detail::esgp_unit(double tau) {
    if (tau >= 1.0) { return 0.0; }
    return (2.0 + std::cos(kTwoPi * tau)) / 3.0 * (1.0 - tau) + std::sin(kTwoPi * tau) / kTwoPi;
}

double detail::esgp_unit_dtau(double tau) {
    if (tau >= 1.0) { return 0.0; }
    const double c = std::cos(kTwoPi * tau);
    const double s = std::sin(kTwoPi * tau);
    return 2.0 / 3.0 * (c - 1.0 - std::numbers::pi * (1.0 - tau) * s);
}

double eval_esgp(double tau, const KernelSpec &spec) {
    require_family(spec, KernelFamily::ESGP);
    require_separation(tau, "tau");
    return spec.sigma_f * spec.sigma_f * detail::esgp_unit(tau);
}

double eval_sqexp(double tau, const KernelSpec &spec) {
    require_family(spec, KernelFamily::SqExp);
    require_separation(tau, "tau");
    return spec.sigma_f * spec.sigma_f * std::exp(-tau * tau);
}

double eval_space_time(double h, double u, const KernelSpec &spec) {
    return detail::space_time_partials(h * h, u * u, spec).value;
}

ScaledSeparation scaled_separation(const SpaceTimePoint &a, const SpaceTimePoint &b, const KernelSpec &spec) {
    const auto &l = spec.length_scales;
    const double dx = (a.x - b.x) / l[0];
    const double dy = (a.y - b.y) / l[1];
    const double dt = (a.t - b.t) / l[2];
    return {std::sqrt(dx * dx + dy * dy), std::abs(dt)};
}

Eigen::MatrixXd gram_stationary(std::span<const SpaceTimePoint> a, std::span<const SpaceTimePoint> b,
                                const KernelSpec &spec) {
    spec.validate();
    if (spec.length_scales.size() != 3) {
        throw std::domain_error("stationary gram needs 3 length scales (x, y, t), got " +
                                std::to_string(spec.length_scales.size()));
    }
    const auto na = static_cast<Eigen::Index>(a.size());
    const auto nb = static_cast<Eigen::Index>(b.size());
    Eigen::MatrixXd k(na, nb);
    const bool same = a.data() == b.data() && a.size() == b.size();
    for (Eigen::Index i = 0; i < na; ++i) {
        const Eigen::Index j0 = same ? i : 0;
        for (Eigen::Index j = j0; j < nb; ++j) {
            const auto sep = scaled_separation(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)], spec);
            k(i, j) = detail::space_time_partials(sep.h * sep.h, sep.u * sep.u, spec).value;
            if (same) { k(j, i) = k(i, j); }
        }
    }
    return k;
}

Eigen::MatrixXd gram_stationary(std::span<const SpaceTimePoint> a, const KernelSpec &spec) {
    return gram_stationary(a, a, spec);
}

detail::TaperPartials detail::esgp_taper(double Q) {
    if (Q >= 1.0) { return {0.0, 0.0}; }
    const double tau = std::sqrt(Q);
    if (tau < 1e-6) { return {esgp_unit(tau), -2.0 * std::numbers::pi * std::numbers::pi / 3.0}; }
    return {esgp_unit(tau), esgp_unit_dtau(tau) / (2.0 * tau)};
}

detail::KernelPartials detail::space_time_partials(double H, double U, const KernelSpec &spec) {
    const double s = spec.sigma_f * spec.sigma_f;
    const double p = spec.spatial_dim_p;
    KernelPartials out;
    switch (spec.family) {
    case KernelFamily::CH1: {
        const double a = U + 1.0;
        const double b = s * std::pow(a, -0.5 * (p - 1.0)) * std::exp(-H / a);
        out.value = b;
        out.d_H = -b / a;
        out.d_U = b * (-0.5 * (p - 1.0) / a + H / (a * a));
        out.d_log_sigma_f = 2.0 * b;
        break;
    }
    case KernelFamily::CH2: {
        const double a = U + 1.0;
        const double d = a * a + H;
        const double dp = std::pow(d, -0.5 * p);
        const double c = spec.ch2_overall_variance ? s : 1.0;
        const double b = c * (s * U + 1.0) * dp;
        out.value = b;
        out.d_H = -0.5 * p * b / d;
        out.d_U = c * s * dp - p * b * a / d;
        out.d_log_sigma_f = c * 2.0 * s * U * dp + (spec.ch2_overall_variance ? 2.0 * b : 0.0);
        break;
    }
    case KernelFamily::ESGP: {
        const auto taper = esgp_taper(H + U);
        out.value = s * taper.value;
        out.d_H = s * taper.d_Q;
        out.d_U = s * taper.d_Q;
        out.d_log_sigma_f = 2.0 * out.value;
        break;
    }
    case KernelFamily::SqExp: {
        const double b = s * std::exp(-(H + U));
        out.value = b;
        out.d_H = -b;
        out.d_U = -b;
        out.d_log_sigma_f = 2.0 * b;
        break;
    }
    }
    return out;
}

}  // namespace nostill
