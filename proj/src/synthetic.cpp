#include "nostill/synthetic.hpp"

#include <cmath>
#include <random>

#include "nostill/gp.hpp"

namespace nostill {

LatentScales two_regime_scales(double x, const TwoRegimeConfig &config) {
    const double w = 1.0 / (1.0 + std::exp(-(x - 0.5 * config.domain) / config.transition_width));
    auto blend = [w](double lo, double hi) { return std::exp((1.0 - w) * std::log(lo) + w * std::log(hi)); };
    return {blend(config.short_lx, config.long_lx), 1.0, blend(config.short_lt, config.long_lt)};
}

Dataset generate_two_regime(const TwoRegimeConfig &config) {
    if (config.stations < 2 || config.timesteps < 2) { throw ConfigError("generator needs >= 2 stations and steps"); }
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double spacing = config.domain / static_cast<double>(config.stations - 1);
    std::vector<double> sites(config.stations);
    for (std::size_t s = 0; s < config.stations; ++s) {
        sites[s] = static_cast<double>(s) * spacing + config.site_jitter * spacing * unit(rng);
    }

    std::vector<SpaceTimePoint> points;
    std::vector<long> ids;
    std::vector<double> lx, ly, lt;
    for (std::size_t s = 0; s < config.stations; ++s) {
        const auto scales = two_regime_scales(sites[s], config);
        for (std::size_t k = 0; k < config.timesteps; ++k) {
            points.push_back({sites[s], 0.0, static_cast<double>(k)});
            ids.push_back(static_cast<long>(s));
            lx.push_back(scales.lx);
            ly.push_back(scales.ly);
            lt.push_back(scales.lt);
        }
    }
    const LatentLengthField field(points, lx, ly, lt);
    KernelSpec base;
    base.family = KernelFamily::CH1;
    base.sigma_f = config.sigma_f;
    Eigen::MatrixXd k = gram_nonstationary(field, base, false);
    k.diagonal().array() += config.noise_sd * config.noise_sd;
    const auto factor = jittered_cholesky(k);

    Eigen::VectorXd z(k.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) { z[i] = normal(rng); }
    const Eigen::VectorXd y = factor.lower * z;

    std::vector<Observation> obs;
    for (std::size_t i = 0; i < points.size(); ++i) { obs.push_back({points[i], y[static_cast<Eigen::Index>(i)]}); }
    return Dataset(std::move(obs), std::move(ids));
}

std::pair<Dataset, Dataset> interleaved_time_split(const Dataset &data) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto t = static_cast<long>(std::llround(data[i].point.t));
        (t % 2 == 0 ? train : test).push_back(i);
    }
    return {data.subset(train), data.subset(test)};
}

}  // namespace nostill
