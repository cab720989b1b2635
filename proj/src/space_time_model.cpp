#include "nostill/space_time_model.hpp"

#include <algorithm>

namespace nostill {

Eigen::VectorXd SpaceTimeModel::predict_mean(std::span<const SpaceTimePoint> observed,
                                             const Eigen::VectorXd &observed_values,
                                             std::span<const SpaceTimePoint> targets) const {
    const auto norm = normalization();
    if (observed.empty()) { return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(targets.size()), norm.mean); }
    Eigen::VectorXd y = (observed_values.array() - norm.mean) / norm.stddev;
    const std::vector<SpaceTimePoint> obs(observed.begin(), observed.end());
    const GPModel gp(obs, y, gram(observed), noise_var());
    const Eigen::VectorXd mean = gram(targets, observed) * gp.alpha();
    return (mean.array() * norm.stddev + norm.mean).matrix();
}

std::array<double, 3> median_spacing(std::span<const SpaceTimePoint> points) {
    std::array<double, 3> out{1.0, 1.0, 1.0};
    for (int d = 0; d < 3; ++d) {
        std::vector<double> coords;
        coords.reserve(points.size());
        for (const auto &p : points) { coords.push_back(d == 0 ? p.x : (d == 1 ? p.y : p.t)); }
        std::sort(coords.begin(), coords.end());
        coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
        if (coords.size() < 2) { continue; }
        std::vector<double> gaps;
        for (std::size_t i = 1; i < coords.size(); ++i) { gaps.push_back(coords[i] - coords[i - 1]); }
        const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
        std::nth_element(gaps.begin(), mid, gaps.end());
        double median = *mid;
        if (gaps.size() % 2 == 0) { median = 0.5 * (median + *std::max_element(gaps.begin(), mid)); }
        out[static_cast<std::size_t>(d)] = median;
    }
    return out;
}

std::array<double, 3> domain_extent(std::span<const SpaceTimePoint> points) {
    std::array<double, 3> lo{points[0].x, points[0].y, points[0].t};
    std::array<double, 3> hi = lo;
    for (const auto &p : points) {
        const std::array<double, 3> c{p.x, p.y, p.t};
        for (std::size_t d = 0; d < 3; ++d) {
            lo[d] = std::min(lo[d], c[d]);
            hi[d] = std::max(hi[d], c[d]);
        }
    }
    return {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]};
}

}  // namespace nostill
