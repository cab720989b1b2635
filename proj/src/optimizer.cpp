#include "nostill/optimizer.hpp"

#include <cmath>
#include <limits>

#include <ceres/ceres.h>

#include "nostill/types.hpp"

namespace nostill {

namespace {

// Ceres minimizes, so the objective is negated on the way in and out.
class NegatedObjective final : public ceres::FirstOrderFunction {
public:
    NegatedObjective(const Objective &objective, int size) : objective_(objective), size_(size) {}

    bool Evaluate(const double *parameters, double *cost, double *gradient) const override {
        const Eigen::Map<const Eigen::VectorXd> x(parameters, size_);
        const auto result = objective_(x);
        if (!result || !std::isfinite(result->value) || !result->gradient.allFinite()) { return false; }
        *cost = -result->value;
        if (*cost < best_cost_) {
            best_cost_ = *cost;
            best_x_ = x;
        }
        if (gradient != nullptr) { Eigen::Map<Eigen::VectorXd>(gradient, size_) = -result->gradient; }
        return true;
    }

    int NumParameters() const override { return size_; }

    // Best point evaluated so far; Ceres can return its starting point when
    // the line search fails, discarding earlier progress.
    [[nodiscard]] const Eigen::VectorXd &best_x() const { return best_x_; }
    [[nodiscard]] double best_value() const { return -best_cost_; }

private:
    const Objective &objective_;
    int size_;
    mutable double best_cost_ = std::numeric_limits<double>::infinity();
    mutable Eigen::VectorXd best_x_;
};

class LogCallback final : public ceres::IterationCallback {
public:
    LogCallback(int restart, int offset, std::vector<OptimizationLogEntry> &log)
        : restart_(restart), offset_(offset), log_(log) {}

    ceres::CallbackReturnType operator()(const ceres::IterationSummary &summary) override {
        // Iteration 0 of a warm restart repeats the point the last segment ended on.
        if (summary.step_is_successful && (summary.iteration > 0 || offset_ == 0)) {
            log_.push_back({restart_, offset_ + summary.iteration, -summary.cost});
        }
        return ceres::SOLVER_CONTINUE;
    }

private:
    int restart_;
    int offset_;
    std::vector<OptimizationLogEntry> &log_;
};

}  // namespace

RestartSampler uniform_restarts(double spread) {
    return [spread](const Eigen::VectorXd &init, std::mt19937_64 &rng) {
        std::uniform_real_distribution<double> offset(-spread, spread);
        Eigen::VectorXd x = init;
        for (Eigen::Index i = 0; i < x.size(); ++i) { x[i] += offset(rng); }
        return x;
    };
}

OptimizationResult maximize(const Objective &objective, const Eigen::VectorXd &initial, const TrainConfig &config,
                            const RestartSampler &sampler) {
    OptimizationResult best;
    best.x = initial;
    best.value = -std::numeric_limits<double>::infinity();
    const auto at_init = objective(initial);
    best.initial_value = at_init ? at_init->value : -std::numeric_limits<double>::infinity();

    if (config.max_iterations <= 0) {
        best.value = best.initial_value;
        if (at_init) { best.log.push_back({0, 0, at_init->value}); }
        return best;
    }

    const int size = static_cast<int>(initial.size());
    const int restarts = std::max(1, config.restarts);
    bool any = false;
    for (int r = 0; r < restarts; ++r) {
        Eigen::VectorXd x = initial;
        if (r > 0) {
            std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(r));
            x = sampler(initial, rng);
        }
        const auto start = objective(x);
        if (!start || !std::isfinite(start->value)) { continue; }

        // The line search gives up when it steps into a region where the
        // objective is undefined. Restart L-BFGS from the last accepted point
        // (with fresh curvature memory) while that keeps improving.
        auto *negated = new NegatedObjective(objective, size);
        ceres::GradientProblem problem(negated);
        int used = 0;
        double current = start->value;
        while (used < config.max_iterations) {
            ceres::GradientProblemSolver::Options options;
            options.line_search_direction_type = ceres::LBFGS;
            options.max_num_iterations = config.max_iterations - used;
            options.function_tolerance = config.tolerance;
            options.logging_type = ceres::SILENT;
            options.minimizer_progress_to_stdout = false;
            LogCallback callback(r, used, best.log);
            options.callbacks.push_back(&callback);
            ceres::GradientProblemSolver::Summary summary;
            Eigen::VectorXd trial = x;
            ceres::Solve(options, problem, trial.data(), &summary);
            if (negated->best_x().size() == size && negated->best_value() > current) {
                const auto returned = objective(trial);
                if (!returned || returned->value < negated->best_value()) { trial = negated->best_x(); }
            }
            used += std::max(1, static_cast<int>(summary.iterations.size()) - 1);

            const auto reached = objective(trial);
            if (!reached || !std::isfinite(reached->value) || reached->value < current) { break; }
            const double gain = reached->value - current;
            x = trial;
            current = reached->value;
            if (summary.termination_type == ceres::CONVERGENCE &&
                summary.message.find("Function tolerance") != std::string::npos) {
                break;
            }
            if (summary.termination_type == ceres::NO_CONVERGENCE) { break; }
            if (gain <= config.tolerance * std::max(1.0, std::abs(current))) { break; }
        }

        const auto final_value = objective(x);
        if (!final_value || !std::isfinite(final_value->value)) { continue; }
        any = true;
        if (final_value->value > best.value) {
            best.value = final_value->value;
            best.x = x;
            best.best_restart = r;
        }
    }
    if (!any) { throw NumericalError("optimizer: every restart failed to produce a valid objective"); }
    return best;
}

}  // namespace nostill
