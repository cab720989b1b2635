#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nostill/dataset.hpp"
#include "nostill/gp.hpp"
#include "nostill/types.hpp"

namespace nostill {

/// A trained model as seen by planning: a prior covariance in normalized
/// units, an observation noise, and the value normalization.
class SpaceTimeModel : public Covariance {
public:
    [[nodiscard]] virtual double noise_var() const = 0;
    [[nodiscard]] virtual Normalization normalization() const = 0;

    /// Posterior mean (raw units) at `targets` given raw-unit observations.
    [[nodiscard]] virtual Eigen::VectorXd predict_mean(std::span<const SpaceTimePoint> observed,
                                                       const Eigen::VectorXd &observed_values,
                                                       std::span<const SpaceTimePoint> targets) const;
};

/// Per-dimension median gap between consecutive distinct coordinates;
/// dimensions with a single distinct value get 1.
std::array<double, 3> median_spacing(std::span<const SpaceTimePoint> points);

/// max - min per dimension.
std::array<double, 3> domain_extent(std::span<const SpaceTimePoint> points);

}  // namespace nostill
