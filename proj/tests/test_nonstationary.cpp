#include <doctest.h>

#include <cmath>
#include <random>

#include "nostill/nonstationary.hpp"
#include "oracles.hpp"

using namespace nostill;

namespace {

KernelSpec base(KernelFamily f, double sigma_f) {
    KernelSpec s;
    s.family = f;
    s.sigma_f = sigma_f;
    return s;
}

}  // namespace

TEST_CASE("prefactor") {
    CHECK(prefactor({1.5, 0.7, 3.0}, {1.5, 0.7, 3.0}) == doctest::Approx(1.0).epsilon(1e-15));
    // One dimension differs: l_i^2 = 1, l_j^2 = 4.
    CHECK(std::abs(prefactor({1.0, 1.0, 1.0}, {2.0, 1.0, 1.0}) - 0.89442719099991586) < 1e-12);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> l(0.01, 50.0);
    for (int i = 0; i < 500; ++i) {
        const double p = prefactor({l(rng), l(rng), l(rng)}, {l(rng), l(rng), l(rng)});
        CHECK(p > 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("scaled squared distances") {
    const LatentScales unit{1, 1, 1};
    auto q = scaled_sq_dists({2, 3, 4}, {2, 3, 4}, unit, unit);
    CHECK(q.q_s == 0.0);
    CHECK(q.q_t == 0.0);
    q = scaled_sq_dists({0, 0, 0}, {1, 0, 0}, unit, unit);
    CHECK(q.q_s == doctest::Approx(1.0));
    CHECK(q.q_t == 0.0);
    q = scaled_sq_dists({0, 0, 0}, {1, 0, 0}, {1.0, 1, 1}, {std::sqrt(3.0), 1, 1});
    CHECK(std::abs(q.q_s - 0.5) < 1e-14);
}

TEST_CASE("constant field reduces to the stationary gram") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> l(0.3, 4.0);
    for (auto f : {KernelFamily::CH1, KernelFamily::CH2}) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto pts = oracle::random_points(rng, 15);
            const LatentScales sc{l(rng), l(rng), l(rng)};
            auto st = base(f, 0.8);
            st.length_scales = {sc.lx, sc.ly, sc.lt};
            const auto field = LatentLengthField::constant(pts, sc);
            const auto diff = (gram_nonstationary(field, base(f, 0.8), false) - gram_stationary(pts, st)).cwiseAbs();
            CHECK(diff.maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("entries match the matrix-form composition") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> l(0.2, 5.0);
    const auto a = oracle::random_points(rng, 6);
    const auto b = oracle::random_points(rng, 4);
    std::vector<double> ax, ay, at, bx, by, bt;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ax.push_back(l(rng));
        ay.push_back(l(rng));
        at.push_back(l(rng));
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        bx.push_back(l(rng));
        by.push_back(l(rng));
        bt.push_back(l(rng));
    }
    const LatentLengthField fa(a, ax, ay, at), fb(b, bx, by, bt);
    for (auto f : {KernelFamily::CH1, KernelFamily::CH2}) {
        const double sf = 0.9;
        const oracle::Base ref = [&](double h, double u) {
            return f == KernelFamily::CH1 ? oracle::ch1(h, u, sf, 2) : oracle::ch2(h, u, sf, 2);
        };
        const auto k = gram_nonstationary(a, b, fa, fb, base(f, sf), false);
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                const double expect = oracle::ns_entry(a[i], b[j], {ax[i], ay[i], at[i]}, {bx[j], by[j], bt[j]}, ref);
                CHECK(std::abs(k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - expect) < 1e-12);
            }
        }
    }
}

TEST_CASE("sparse mode tapers by the unit ESGP profile") {
    const std::vector<SpaceTimePoint> pts{{0, 0, 0}, {0.3, 0, 0.2}, {10, 0, 0}, {0, 10, 0}, {0, 0, 10}};
    const auto field = LatentLengthField::constant(pts, {0.5, 0.5, 0.5});
    const auto k = gram_nonstationary(field, base(KernelFamily::CH1, 1.0), true);
    const auto dense = gram_nonstationary(field, base(KernelFamily::CH1, 1.0), false);
    for (Eigen::Index i = 0; i < 5; ++i) {
        CHECK(k(i, i) == doctest::Approx(1.0));
        for (Eigen::Index j = 2; j < 5; ++j) {
            if (i != j) { CHECK(k(i, j) == 0.0); }
        }
    }
    const double q = (0.3 * 0.3 + 0.2 * 0.2) / 0.25;
    const double tau = std::sqrt(q);
    const double taper = (2.0 + std::cos(2 * std::numbers::pi * tau)) / 3.0 * (1 - tau) +
                         std::sin(2 * std::numbers::pi * tau) / (2 * std::numbers::pi);
    CHECK(std::abs(k(0, 1) - dense(0, 1) * taper) < 1e-14);
}

TEST_CASE("symmetric gram is exactly symmetric") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> l(0.2, 5.0);
    const auto pts = oracle::random_points(rng, 20);
    std::vector<double> lx, ly, lt;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        lx.push_back(l(rng));
        ly.push_back(l(rng));
        lt.push_back(l(rng));
    }
    const LatentLengthField field(pts, lx, ly, lt);
    for (bool sparse : {false, true}) {
        const auto k = gram_nonstationary(field, base(KernelFamily::CH2, 0.7), sparse);
        CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("field validation") {
    const std::vector<SpaceTimePoint> pts{{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS(LatentLengthField(pts, {1.0}, {1.0, 1.0}, {1.0, 1.0}));
    CHECK_THROWS(LatentLengthField(pts, {1.0, -1.0}, {1.0, 1.0}, {1.0, 1.0}));
    const auto field = LatentLengthField::constant(pts, {1, 1, 1});
    CHECK_THROWS(gram_nonstationary(field, base(KernelFamily::ESGP, 1.0), false));
}
