#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nostill/dataset.hpp"
#include "nostill/gp.hpp"
#include "nostill/kernels.hpp"
#include "nostill/nonstationary.hpp"
#include "nostill/optimizer.hpp"
#include "nostill/space_time_model.hpp"

namespace nostill {

/// Parameters of the four-GP model: the observation GP (base kernel, noise)
/// and three latent GPs over log length scales, conditioned on values at m
/// latent locations.
struct NostillParams {
    KernelFamily base_family = KernelFamily::CH1;
    double sigma_f = 1.0;
    double noise_var = 0.1;
    int spatial_dim_p = 2;
    bool ch2_overall_variance = false;
    bool sparse = false;

    std::vector<SpaceTimePoint> latent_points;
    Eigen::VectorXd log_lbar_x;
    Eigen::VectorXd log_lbar_y;
    Eigen::VectorXd log_lbar_t;

    // Latent GP kernels; only their length scales are trained.
    KernelSpec theta_lx;
    KernelSpec theta_ly;
    KernelSpec theta_lt;
    double latent_noise_var = 1e-6;

    void validate() const;
    [[nodiscard]] std::size_t latent_count() const { return latent_points.size(); }
    [[nodiscard]] KernelSpec base_kernel() const;
};

/// Number of trained scalars: 3m + 2 + 9 (three length scales per latent GP).
std::size_t parameter_count(const NostillParams &params);

/// Log-space vector [log sigma_f, log noise, lbar_x, lbar_y, lbar_t,
/// log theta_lx scales, log theta_ly scales, log theta_lt scales].
Eigen::VectorXd pack_nostill(const NostillParams &params);
NostillParams unpack_nostill(const Eigen::VectorXd &theta, const NostillParams &like);

/// exp of the latent GP posterior means at `targets`. Each latent GP has a
/// constant prior mean equal to the average of its latent log values.
LatentLengthField infer_latent_field(const NostillParams &params, std::span<const SpaceTimePoint> targets);

/// Approximate lml with latent length scales fixed at their predictive means.
/// Returns -infinity when the covariance cannot be factorized.
double nostill_lml(const NostillParams &params, const Dataset &data);

/// lml with its analytic gradient over `pack_nostill`; nullopt on failure.
std::optional<ObjectiveValue> nostill_objective(const NostillParams &params, std::span<const SpaceTimePoint> points,
                                                const Eigen::VectorXd &values);

/// Trained non-stationary model, immutable.
class NostillModel final : public SpaceTimeModel {
public:
    NostillModel(NostillParams params, Dataset train);

    [[nodiscard]] const NostillParams &params() const { return params_; }
    [[nodiscard]] const Dataset &train_data() const { return train_; }
    [[nodiscard]] const LatentLengthField &train_field() const { return train_field_; }

    [[nodiscard]] LatentLengthField field_at(std::span<const SpaceTimePoint> points) const;

    using Covariance::gram;
    [[nodiscard]] Eigen::MatrixXd gram(std::span<const SpaceTimePoint> a,
                                       std::span<const SpaceTimePoint> b) const override;
    [[nodiscard]] double noise_var() const override { return params_.noise_var; }
    [[nodiscard]] Normalization normalization() const override;

    [[nodiscard]] double log_marginal_likelihood() const { return gp_.log_marginal_likelihood(); }
    /// Predictive mean and covariance in raw units.
    [[nodiscard]] Prediction predict(std::span<const SpaceTimePoint> targets) const;

private:
    NostillParams params_;
    Dataset train_;
    LatentLengthField train_field_;
    GPModel gp_;
};

struct NostillOptions {
    KernelFamily base_family = KernelFamily::CH1;
    bool sparse = false;
    bool ch2_overall_variance = false;
    int spatial_dim_p = 2;
    KernelFamily latent_family = KernelFamily::ESGP;
    double latent_noise_var = 1e-6;
};

/// sigma_f = 1, noise 0.1, every latent log scale at log(median coordinate
/// spacing), latent GP scales at half the domain extent per dimension.
NostillParams initial_nostill_params(const Dataset &data, std::vector<SpaceTimePoint> latent_points,
                                     const NostillOptions &options);

struct NostillFit {
    NostillModel model;
    OptimizationResult optimization;
};

/// Joint maximization of the approximate lml over all four GPs.
NostillFit train_nostill(const Dataset &data, std::vector<SpaceTimePoint> latent_points, const NostillOptions &options,
                         const TrainConfig &config);

}  // namespace nostill
