#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nostill/kernels.hpp"
#include "nostill/types.hpp"

namespace nostill {

/// Latent length scales at one location. The local kernel matrix is
/// diag(lx^2, ly^2, lt^2), split into a spatial block and a temporal entry.
struct LatentScales {
    double lx = 1.0;
    double ly = 1.0;
    double lt = 1.0;
};

/// Latent length scales evaluated at a list of points.
class LatentLengthField {
public:
    LatentLengthField() = default;
    LatentLengthField(std::vector<SpaceTimePoint> points, std::vector<double> lx, std::vector<double> ly,
                      std::vector<double> lt);

    /// Same scales at every point.
    static LatentLengthField constant(std::vector<SpaceTimePoint> points, LatentScales scales);

    [[nodiscard]] std::size_t size() const { return points_.size(); }
    [[nodiscard]] const std::vector<SpaceTimePoint> &points() const { return points_; }
    [[nodiscard]] LatentScales at(std::size_t i) const { return {lx_[i], ly_[i], lt_[i]}; }
    [[nodiscard]] const std::vector<double> &lx() const { return lx_; }
    [[nodiscard]] const std::vector<double> &ly() const { return ly_; }
    [[nodiscard]] const std::vector<double> &lt() const { return lt_; }

private:
    std::vector<SpaceTimePoint> points_;
    std::vector<double> lx_;
    std::vector<double> ly_;
    std::vector<double> lt_;
};

/// |S_i|^(1/4) |S_j|^(1/4) |(S_i + S_j)/2|^(-1/2) for diagonal local kernel
/// matrices. Lies in (0, 1] and equals 1 iff the scales agree per dimension.
double prefactor(const LatentScales &i, const LatentScales &j);

struct ScaledSqDists {
    double q_s = 0.0;  // spatial
    double q_t = 0.0;  // temporal
};

/// Squared separations scaled by the averaged local kernel matrices.
ScaledSqDists scaled_sq_dists(const SpaceTimePoint &p_i, const SpaceTimePoint &p_j, const LatentScales &i,
                              const LatentScales &j);

/// Non-stationary space-time covariance between two point sets.
///
/// Entry (i, j) is prefactor(i, j) * base(sqrt(q_s), sqrt(q_t)). With `sparse`,
/// each entry is also multiplied by the unit-amplitude ESGP profile at
/// sqrt(q_s + q_t), so pairs beyond that neighbourhood are exactly zero.
/// The base family must be CH1 or CH2; `field_a` must carry exactly `a`.
Eigen::MatrixXd gram_nonstationary(std::span<const SpaceTimePoint> a, std::span<const SpaceTimePoint> b,
                                   const LatentLengthField &field_a, const LatentLengthField &field_b,
                                   const KernelSpec &base, bool sparse);

/// Symmetric case over the points carried by `field`.
Eigen::MatrixXd gram_nonstationary(const LatentLengthField &field, const KernelSpec &base, bool sparse);

}  // namespace nostill
