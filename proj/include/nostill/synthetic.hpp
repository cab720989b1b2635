#pragma once

#include <cstdint>
#include <utility>

#include "nostill/dataset.hpp"
#include "nostill/nonstationary.hpp"

namespace nostill {

/// 1-D space x time field with two length-scale regimes: short scales on the
/// left half of the domain, long scales on the right, joined by a smooth
/// logistic transition. Values are drawn from the non-stationary CH1 prior
/// plus white noise. All stations sit at y = 0.
struct TwoRegimeConfig {
    std::size_t stations = 12;
    std::size_t timesteps = 30;
    double domain = 10.0;
    double site_jitter = 0.25;  // fraction of the station spacing
    double short_lx = 2.0;
    double short_lt = 3.0;
    double long_lx = 15.0;
    double long_lt = 20.0;
    double transition_width = 0.5;
    double sigma_f = 1.0;
    double noise_sd = 0.05;
    std::uint64_t seed = 0;
};

LatentScales two_regime_scales(double x, const TwoRegimeConfig &config);

/// Station ids are 0..stations-1 from left to right; timesteps are 0..T-1.
Dataset generate_two_regime(const TwoRegimeConfig &config);

/// Even timesteps train, odd timesteps test.
std::pair<Dataset, Dataset> interleaved_time_split(const Dataset &data);

}  // namespace nostill
