#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nostill/types.hpp"

namespace nostill {

enum class KernelFamily {
    CH1,   // sigma_f^2 / (u^2+1)^((p-1)/2) * exp(-h^2 / (u^2+1))
    CH2,   // (sigma_f^2 u^2 + 1) / ((u^2+1)^2 + h^2)^(p/2)
    ESGP,  // compactly supported, exact zero beyond unit scaled distance
    SqExp,
};

std::string to_string(KernelFamily family);
/// Accepts the names produced by `to_string`; throws ConfigError otherwise.
KernelFamily kernel_family_from_string(std::string_view name);

/// Stationary base kernel and its hyperparameters.
///
/// `length_scales` holds {l_x, l_y, l_t}. It is only read by the standalone
/// gram builders; the non-stationary kernel supplies its own scaled distances.
struct KernelSpec {
    KernelFamily family = KernelFamily::CH1;
    double sigma_f = 1.0;
    int spatial_dim_p = 2;
    std::vector<double> length_scales;
    // CH2 as printed is not scaled by sigma_f^2 at the origin; this opts into an overall factor.
    bool ch2_overall_variance = false;

    void validate() const;
    /// k(0, 0) for the family.
    [[nodiscard]] double variance() const;
};

double eval_ch1(double h, double u, const KernelSpec &spec);
double eval_ch2(double h, double u, const KernelSpec &spec);
double eval_esgp(double tau, const KernelSpec &spec);
double eval_sqexp(double tau, const KernelSpec &spec);

/// Space-time evaluation for any family. ESGP and SqExp use tau = sqrt(h^2 + u^2).
double eval_space_time(double h, double u, const KernelSpec &spec);

/// Scaled separations between two points under the spec's length scales.
struct ScaledSeparation {
    double h = 0.0;
    double u = 0.0;
};
ScaledSeparation scaled_separation(const SpaceTimePoint &a, const SpaceTimePoint &b, const KernelSpec &spec);

Eigen::MatrixXd gram_stationary(std::span<const SpaceTimePoint> a, std::span<const SpaceTimePoint> b,
                                const KernelSpec &spec);
Eigen::MatrixXd gram_stationary(std::span<const SpaceTimePoint> a, const KernelSpec &spec);

namespace detail {

// Kernel value and partials with respect to H = h^2 and U = u^2, used by the
// analytic likelihood gradients. `d_log_sigma_f` is d k / d log(sigma_f).
struct KernelPartials {
    double value = 0.0;
    double d_H = 0.0;
    double d_U = 0.0;
    double d_log_sigma_f = 0.0;
};
KernelPartials space_time_partials(double H, double U, const KernelSpec &spec);

// Unit-amplitude ESGP taper as a function of Q = tau^2, and dT/dQ.
struct TaperPartials {
    double value = 0.0;
    double d_Q = 0.0;
};
TaperPartials esgp_taper(double Q);

// Derivative of the unit-amplitude ESGP profile with respect to tau.
double esgp_unit_dtau(double tau);
double esgp_unit(double tau);

}  // namespace detail

}  // namespace nostill
