#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nostill/dataset.hpp"
#include "nostill/optimizer.hpp"
#include "nostill/stationary_model.hpp"

namespace nostill {

enum class CovarianceAxis { Space, Time };

/// Sample covariance (divisor N - 1). Space gives stations x stations with
/// timesteps as samples; Time gives timesteps x timesteps with stations as
/// samples. Throws DataError with fewer than two samples.
Eigen::MatrixXd empirical_covariance(const StationGrid &grid, CovarianceAxis axis);
Eigen::MatrixXd empirical_covariance(const Dataset &data, CovarianceAxis axis);

enum class GreedyCriterion {
    Entropy,            // minimize log det of the unselected posterior covariance
    MutualInformation,  // prior minus posterior entropy of the unselected set
    MutualInformationKrause,  // H(c | selected) - H(c | remaining candidates)
};

/// Greedy sequential selection of `k` indices from the candidates of `cov`.
///
/// `cov` is shifted by 1e-8 * trace/n before use. Picks, and the indices in
/// `observed`, are seen with additive noise `noise_var`; observed indices are
/// conditioned on but never candidates. Ties within a relative 1e-9 go to
/// the lowest index. Throws std::invalid_argument unless 1 <= k < |A|, and
/// NumericalError when the shifted matrix is not positive definite.
std::vector<std::size_t> greedy_select(const Eigen::MatrixXd &cov, std::size_t k, GreedyCriterion criterion,
                                       double noise_var = 0.0, const std::vector<std::size_t> &observed = {});

enum class SelectionMethod {
    GreedyEntropy,
    GreedyMI,
    GreedyEntropyEmpirical,
    GreedyMIEmpirical,
    PseudoInput,
    Uniform,
};

std::string to_string(SelectionMethod method);
/// Short labels (GE, GMI, GE-emp, GMI-emp, PI, U); throws ConfigError otherwise.
SelectionMethod selection_method_from_string(std::string_view name);

struct SelectionPlan {
    SelectionMethod method = SelectionMethod::GreedyEntropy;
    std::optional<int> m_space;
    std::optional<int> m_time;
    std::optional<int> m_total;
    bool krause_mi = false;  // use the Krause variant for the MI methods

    [[nodiscard]] bool separable() const;
    /// Throws ConfigError when the counts do not match the method.
    void validate() const;
    /// Number of latent locations the plan produces.
    [[nodiscard]] int count() const;
};

/// Latent locations for `plan`. Stationary-covariance and pseudo-input
/// methods need `stationary`; only pseudo inputs read `config`.
std::vector<SpaceTimePoint> select_latents(const Dataset &data, const SelectionPlan &plan,
                                           const StationaryParams *stationary, const TrainConfig &config);

/// K_nm K_m^-1 K_mn + diag(K_n - K_nm K_m^-1 K_mn), without noise.
Eigen::MatrixXd fitc_gram(const KernelSpec &spec, std::span<const SpaceTimePoint> points,
                          std::span<const SpaceTimePoint> pseudo);

/// lml of `values` under fitc_gram + noise_var * I, in O(n m^2).
double fitc_lml(const StationaryParams &params, std::span<const SpaceTimePoint> points, const Eigen::VectorXd &values,
                std::span<const SpaceTimePoint> pseudo);

/// Farthest-point traversal in length-scale units, starting from the
/// training point nearest the centroid.
std::vector<SpaceTimePoint> pseudo_input_init(const Dataset &data, std::size_t m, const KernelSpec &spec);

/// Optimizes the 3m pseudo-input coordinates with hyperparameters frozen;
/// the result is clamped to the bounding box of the training points.
std::vector<SpaceTimePoint> learn_pseudo_inputs(const Dataset &data, std::size_t m, const StationaryParams &stationary,
                                                const TrainConfig &config);

void export_latents_csv(std::span<const SpaceTimePoint> latents, const std::filesystem::path &path);
/// Reads the x,y,t format written by export_latents_csv.
std::vector<SpaceTimePoint> import_latents_csv(const std::filesystem::path &path);

}  // namespace nostill
