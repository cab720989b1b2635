#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace nostill {

struct TrainConfig {
    int restarts = 3;
    int max_iterations = 200;
    double tolerance = 1e-6;    // stop on relative objective change below this
    std::uint64_t seed = 0;
    double restart_spread = 1.0;  // restarts draw each coordinate from init +- spread
};

struct ObjectiveValue {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// Returns std::nullopt where the objective is undefined (e.g. a failed
/// factorization); the line search then backs off instead of aborting.
using Objective = std::function<std::optional<ObjectiveValue>(const Eigen::VectorXd &)>;

/// Draws a restart starting point from the initial vector.
using RestartSampler = std::function<Eigen::VectorXd(const Eigen::VectorXd &, std::mt19937_64 &)>;

struct OptimizationLogEntry {
    int restart = 0;
    int iteration = 0;
    double objective = 0.0;
};

struct OptimizationResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double initial_value = 0.0;  // objective at the unperturbed initial vector
    int best_restart = 0;
    std::vector<OptimizationLogEntry> log;  // accepted iterates, per restart
};

/// Uniform perturbation of every coordinate; log-uniform for log-space parameters.
RestartSampler uniform_restarts(double spread);

/// L-BFGS maximization with restarts. Restart 0 starts from `initial`, the
/// others from `sampler` seeded with config.seed + restart index. The best
/// restart wins, lowest index on ties. A zero iteration budget returns the
/// initial vector unchanged.
OptimizationResult maximize(const Objective &objective, const Eigen::VectorXd &initial, const TrainConfig &config,
                            const RestartSampler &sampler);

}  // namespace nostill
