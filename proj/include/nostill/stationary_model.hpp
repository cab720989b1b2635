#pragma once

#include <optional>
#include <span>

#include "nostill/dataset.hpp"
#include "nostill/gp.hpp"
#include "nostill/kernels.hpp"
#include "nostill/optimizer.hpp"
#include "nostill/space_time_model.hpp"

namespace nostill {

struct StationaryParams {
    KernelSpec kernel;  // length_scales = {l_x, l_y, l_t}
    double noise_var = 0.1;
};

/// Stationary space-time GP (the "S" baseline and the selection prior).
class StationaryModel final : public SpaceTimeModel {
public:
    StationaryModel(StationaryParams params, Dataset train);

    [[nodiscard]] const StationaryParams &params() const { return params_; }
    [[nodiscard]] const Dataset &train_data() const { return train_; }

    using Covariance::gram;
    [[nodiscard]] Eigen::MatrixXd gram(std::span<const SpaceTimePoint> a,
                                       std::span<const SpaceTimePoint> b) const override;
    [[nodiscard]] double noise_var() const override { return params_.noise_var; }
    [[nodiscard]] Normalization normalization() const override;

    [[nodiscard]] double log_marginal_likelihood() const { return gp_.log_marginal_likelihood(); }
    /// Predictive mean and covariance in raw units.
    [[nodiscard]] Prediction predict(std::span<const SpaceTimePoint> targets) const;

private:
    StationaryParams params_;
    Dataset train_;
    GPModel gp_;
};

/// Log-space parameter vector: [log sigma_f, log noise_var, log l_x, log l_y, log l_t].
Eigen::VectorXd pack_stationary(const StationaryParams &params);
StationaryParams unpack_stationary(const Eigen::VectorXd &theta, const KernelSpec &like);

/// lml and its gradient in the packed parametrization; nullopt on numerical failure.
std::optional<ObjectiveValue> stationary_objective(const Eigen::VectorXd &theta, const KernelSpec &like,
                                                   std::span<const SpaceTimePoint> points,
                                                   const Eigen::VectorXd &values);

/// sigma_f = 1, noise 0.1, length scales at the median coordinate spacing.
StationaryParams initial_stationary_params(const Dataset &data, KernelFamily family, bool ch2_overall_variance = false,
                                           int spatial_dim_p = 2);

struct StationaryFit {
    StationaryModel model;
    OptimizationResult optimization;
};

StationaryFit train_stationary(const Dataset &data, KernelFamily family, const TrainConfig &config,
                               bool ch2_overall_variance = false, int spatial_dim_p = 2);

}  // namespace nostill
