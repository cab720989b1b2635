#include <doctest.h>

#include <cmath>

#include "nostill/optimizer.hpp"

using namespace nostill;

namespace {

// Concave quadratic with its peak at (1, -2, 0.5).
std::optional<ObjectiveValue> bowl(const Eigen::VectorXd &x) {
    Eigen::VectorXd peak(3);
    peak << 1.0, -2.0, 0.5;
    const Eigen::VectorXd w = Eigen::Vector3d(1.0, 4.0, 0.25);
    const Eigen::VectorXd d = x - peak;
    return ObjectiveValue{-0.5 * d.cwiseProduct(w).dot(d), -w.cwiseProduct(d)};
}

TrainConfig config(int restarts, int iterations, std::uint64_t seed = 5) {
    TrainConfig c;
    c.restarts = restarts;
    c.max_iterations = iterations;
    c.seed = seed;
    c.tolerance = 1e-12;
    return c;
}

}  // namespace

TEST_CASE("finds the peak of a concave quadratic") {
    const auto r = maximize(bowl, Eigen::VectorXd::Zero(3), config(2, 200), uniform_restarts(1.0));
    CHECK(std::abs(r.x[0] - 1.0) < 1e-5);
    CHECK(std::abs(r.x[1] + 2.0) < 1e-5);
    CHECK(std::abs(r.x[2] - 0.5) < 1e-5);
    CHECK(r.value >= r.initial_value);
}

TEST_CASE("zero iterations return the initial vector") {
    Eigen::VectorXd init(3);
    init << 0.3, 0.1, -4.0;
    const auto r = maximize(bowl, init, config(3, 0), uniform_restarts(1.0));
    CHECK(r.x == init);
    CHECK(r.value == bowl(init)->value);
}

TEST_CASE("same seed gives a bit-identical log") {
    auto rosen = [](const Eigen::VectorXd &x) -> std::optional<ObjectiveValue> {
        const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
        Eigen::VectorXd g(2);
        g << 2.0 * a + 400.0 * x[0] * b, -200.0 * b;
        return ObjectiveValue{-(a * a + 100.0 * b * b), g};
    };
    const Eigen::VectorXd init = Eigen::Vector2d(-1.2, 1.0);
    const auto a = maximize(rosen, init, config(3, 50, 9), uniform_restarts(0.5));
    const auto b = maximize(rosen, init, config(3, 50, 9), uniform_restarts(0.5));
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].restart == b.log[i].restart);
        CHECK(a.log[i].iteration == b.log[i].iteration);
        CHECK(a.log[i].objective == b.log[i].objective);
    }
    CHECK(a.x == b.x);
}

TEST_CASE("accepted iterates never decrease within a restart") {
    auto rosen = [](const Eigen::VectorXd &x) -> std::optional<ObjectiveValue> {
        const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
        Eigen::VectorXd g(2);
        g << 2.0 * a + 400.0 * x[0] * b, -200.0 * b;
        return ObjectiveValue{-(a * a + 100.0 * b * b), g};
    };
    const auto r = maximize(rosen, Eigen::Vector2d(-1.2, 1.0), config(3, 100), uniform_restarts(0.5));
    for (std::size_t i = 1; i < r.log.size(); ++i) {
        if (r.log[i].restart == r.log[i - 1].restart) { CHECK(r.log[i].objective >= r.log[i - 1].objective); }
    }
}

TEST_CASE("undefined regions are avoided rather than fatal") {
    // Only defined for x > 0; the peak sits at x = 2.
    auto guarded = [](const Eigen::VectorXd &x) -> std::optional<ObjectiveValue> {
        if (x[0] <= 0.0) { return std::nullopt; }
        return ObjectiveValue{2.0 * std::log(x[0]) - x[0], Eigen::VectorXd::Constant(1, 2.0 / x[0] - 1.0)};
    };
    const auto r = maximize(guarded, Eigen::VectorXd::Constant(1, 0.1), config(1, 200), uniform_restarts(0.05));
    CHECK(std::abs(r.x[0] - 2.0) < 1e-4);
}
