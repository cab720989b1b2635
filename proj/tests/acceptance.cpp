// Acceptance checks. Prints one line per criterion; tolerances are fixed here.
//
//   acceptance [--known-failures 1,6,7]
//
// Exit status is 0 when the failing criteria are exactly the listed ones
// (none by default), 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "nostill/config.hpp"
#include "nostill/experiment.hpp"
#include "nostill/nostill_model.hpp"
#include "nostill/planner.hpp"
#include "nostill/selection.hpp"
#include "nostill/stationary_model.hpp"
#include "nostill/synthetic.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace nostill;

namespace {

// Pinned tolerances.
constexpr double kPsdFloor = -1e-8;
constexpr double kGramReduction = 1e-12;
constexpr double kLmlReduction = 1e-8;
constexpr double kScalar = 1e-10;
constexpr double kFitcIdentity = 1e-8;
constexpr double kFdStep = 1e-5;
constexpr double kFdAgreement = 1e-4;
constexpr double kRmsRatio = 0.9;
constexpr int kSeedsNeeded = 8;
constexpr double kInversionAllowance = 0.05;

enum class Outcome { Pass, Fail, Skip };

struct Result {
    Outcome outcome = Outcome::Fail;
    std::string detail;
    std::vector<std::string> notes;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

double min_eig(const Eigen::MatrixXd &m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Kernel validity

// Latent fields are drawn the way the model produces them: random log scales
// at a few latent locations, interpolated by the latent GPs.
LatentLengthField model_field(std::mt19937_64 &rng, const std::vector<SpaceTimePoint> &pts) {
    std::uniform_int_distribution<int> count(2, 8);
    std::uniform_real_distribution<double> level(std::log(0.5), std::log(3.0));
    std::uniform_real_distribution<double> reach(1.0, 5.0);
    std::normal_distribution<double> spread(0.0, 0.5);
    NostillParams p;
    const int m = count(rng);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    for (int i = 0; i < m; ++i) { p.latent_points.push_back(pts[pick(rng)]); }
    std::sort(p.latent_points.begin(), p.latent_points.end());
    p.latent_points.erase(std::unique(p.latent_points.begin(), p.latent_points.end()), p.latent_points.end());
    const auto k = static_cast<Eigen::Index>(p.latent_points.size());
    for (auto *v : {&p.log_lbar_x, &p.log_lbar_y, &p.log_lbar_t}) {
        const double base = level(rng);
        v->resize(k);
        for (auto &e : *v) { e = base + spread(rng); }
    }
    for (auto *spec : {&p.theta_lx, &p.theta_ly, &p.theta_lt}) {
        spec->family = KernelFamily::ESGP;
        spec->length_scales = {reach(rng), reach(rng), reach(rng)};
    }
    return infer_latent_field(p, pts);
}

struct PsdTally {
    int trials = 0;
    int failures = 0;
    double worst = 0.0;

    void add(double eig) {
        ++trials;
        if (eig < kPsdFloor) { ++failures; }
        worst = std::min(worst, eig);
    }
    [[nodiscard]] std::string text() const {
        return std::to_string(trials - failures) + "/" + std::to_string(trials) + " ok, worst " + fmt(worst);
    }
};

Result kernel_validity() {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> size(5, 40);
    std::uniform_real_distribution<double> amp(0.2, 1.0);
    std::map<std::string, PsdTally> by_case;
    PsdTally all, transect, constant, ch1_p3;
    for (int trial = 0; trial < 500; ++trial) {
        const auto family = trial % 2 == 0 ? KernelFamily::CH1 : KernelFamily::CH2;
        const bool sparse = (trial / 2) % 2 == 1;
        const auto pts = oracle::random_points(rng, size(rng));
        KernelSpec base;
        base.family = family;
        base.sigma_f = amp(rng);
        const auto field = model_field(rng, pts);
        const double e = min_eig(gram_nonstationary(field, base, sparse));
        all.add(e);
        by_case[to_string(family) + (sparse ? " sparse" : " dense")].add(e);

        // Diagnostics: the same draw on a 1-D transect, and a constant field in the plane.
        auto line = pts;
        for (auto &q : line) { q.y = 0.0; }
        transect.add(min_eig(gram_nonstationary(LatentLengthField(line, field.lx(), field.ly(), field.lt()), base,
                                                sparse)));
        constant.add(min_eig(gram_nonstationary(LatentLengthField::constant(pts, field.at(0)), base, sparse)));
        if (family == KernelFamily::CH1) {
            auto p3 = base;
            p3.spatial_dim_p = 3;
            ch1_p3.add(min_eig(gram_nonstationary(field, p3, sparse)));
        }
    }
    Result r;
    r.outcome = all.failures == 0 ? Outcome::Pass : Outcome::Fail;
    r.detail = all.text() + " (floor " + fmt(kPsdFloor) + ")";
    for (const auto &[name, t] : by_case) { r.notes.push_back(name + ": " + t.text()); }
    r.notes.push_back("same fields on a 1-D transect: " + transect.text());
    r.notes.push_back("constant fields in the plane: " + constant.text());
    r.notes.push_back("CH1 draws with exponent p = 3: " + ch1_p3.text());
    return r;
}

// ---------------------------------------------------------------------------
// 2. Stationary reduction

Result stationary_reduction() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> scale(0.3, 3.0), amp(0.2, 1.0);
    std::normal_distribution<double> z;
    double gram_err = 0.0, lml_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto pts = oracle::random_points(rng, 25);
        KernelSpec base;
        base.family = trial % 2 == 0 ? KernelFamily::CH1 : KernelFamily::CH2;
        base.sigma_f = amp(rng);
        const LatentScales s{scale(rng), scale(rng), scale(rng)};
        KernelSpec stationary = base;
        stationary.length_scales = {s.lx, s.ly, s.lt};
        const auto ns = gram_nonstationary(LatentLengthField::constant(pts, s), base, false);
        gram_err = std::max(gram_err, (ns - gram_stationary(pts, stationary)).cwiseAbs().maxCoeff());

        std::vector<Observation> obs;
        for (const auto &p : pts) { obs.push_back({p, z(rng)}); }
        const Dataset data(obs);
        NostillParams p;
        p.base_family = base.family;
        p.sigma_f = base.sigma_f;
        p.noise_var = 0.1;
        p.latent_points = {pts[0]};
        p.log_lbar_x = Eigen::VectorXd::Constant(1, std::log(s.lx));
        p.log_lbar_y = Eigen::VectorXd::Constant(1, std::log(s.ly));
        p.log_lbar_t = Eigen::VectorXd::Constant(1, std::log(s.lt));
        p.theta_lx.family = p.theta_ly.family = p.theta_lt.family = KernelFamily::ESGP;
        p.theta_lx.length_scales = p.theta_ly.length_scales = p.theta_lt.length_scales = {2.0, 2.0, 2.0};
        StationaryParams sp;
        sp.kernel = stationary;
        sp.noise_var = p.noise_var;
        lml_err = std::max(lml_err, std::abs(nostill_lml(p, data) - StationaryModel(sp, data).log_marginal_likelihood()));
    }
    Result r;
    r.outcome = gram_err <= kGramReduction && lml_err <= kLmlReduction ? Outcome::Pass : Outcome::Fail;
    r.detail = "max gram diff " + fmt(gram_err) + " (<= " + fmt(kGramReduction) + "), max lml diff " + fmt(lml_err) +
               " (<= " + fmt(kLmlReduction) + ")";
    return r;
}

// ---------------------------------------------------------------------------
// 3. Scalar oracles

Result scalar_oracles() {
    auto spec = [](KernelFamily f, double sigma_f) {
        KernelSpec s;
        s.family = f;
        s.sigma_f = sigma_f;
        return s;
    };
    const double pi = std::numbers::pi;
    const struct {
        const char *name;
        double got;
        double expect;
    } cases[] = {
        {"ch1(0,0)", eval_ch1(0, 0, spec(KernelFamily::CH1, 1)), 1.0},
        {"ch1(1,0)", eval_ch1(1, 0, spec(KernelFamily::CH1, 1)), std::exp(-1.0)},
        {"ch1(0,1)", eval_ch1(0, 1, spec(KernelFamily::CH1, 1)), 1.0 / std::sqrt(2.0)},
        {"ch2(0,0)", eval_ch2(0, 0, spec(KernelFamily::CH2, 1.7)), 1.0},
        {"ch2(0,1)", eval_ch2(0, 1, spec(KernelFamily::CH2, 1)), 0.5},
        {"ch2(1,0)", eval_ch2(1, 0, spec(KernelFamily::CH2, 2)), 0.5},
        {"esgp(0)", eval_esgp(0, spec(KernelFamily::ESGP, 1)), 1.0},
        {"esgp(1)", eval_esgp(1, spec(KernelFamily::ESGP, 3)), 0.0},
        {"esgp(0.5)", eval_esgp(0.5, spec(KernelFamily::ESGP, 1)), 1.0 / 6.0},
        {"esgp(0.25)", eval_esgp(0.25, spec(KernelFamily::ESGP, 1)), 2.0 / 3.0 * 0.75 + 1.0 / (2.0 * pi)},
    };
    double scalar_err = 0.0;
    std::string worst;
    for (const auto &c : cases) {
        const double e = std::abs(c.got - c.expect);
        if (e >= scalar_err) {
            scalar_err = e;
            worst = c.name;
        }
    }

    std::mt19937_64 rng(303);
    std::normal_distribution<double> z;
    double fitc_err = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto pts = oracle::random_points(rng, 20);
        Eigen::VectorXd y(20);
        for (auto &v : y) { v = z(rng); }
        StationaryParams p;
        // CH1 needs exponent 3 to be a covariance on planar points.
        p.kernel.family = trial % 2 == 0 ? KernelFamily::CH1 : KernelFamily::CH2;
        p.kernel.spatial_dim_p = trial % 2 == 0 ? 3 : 2;
        p.kernel.length_scales = {1.0 + 0.1 * trial, 1.5, 2.0};
        p.noise_var = 0.1;
        Eigen::MatrixXd k = gram_stationary(pts, p.kernel);
        k.diagonal().array() += p.noise_var;
        fitc_err = std::max(fitc_err, std::abs(fitc_lml(p, pts, y, pts) - oracle::lml(k, y)));
    }
    Result r;
    r.outcome = scalar_err <= kScalar && fitc_err <= kFitcIdentity ? Outcome::Pass : Outcome::Fail;
    r.detail = std::to_string(std::size(cases)) + " scalar values, max diff " + fmt(scalar_err) + " at " + worst +
               " (<= " + fmt(kScalar) + "); FITC m = n max lml diff " + fmt(fitc_err) + " (<= " + fmt(kFitcIdentity) +
               ")";
    return r;
}

// ---------------------------------------------------------------------------
// 4. Greedy oracle equivalence

Result greedy_equivalence() {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<std::size_t> size(2, 8);
    int mismatches = 0, runs = 0;
    for (int instance = 0; instance < 200; ++instance) {
        const std::size_t n = size(rng);
        const auto cov = oracle::random_spd(rng, n);
        const std::size_t k = 1 + static_cast<std::size_t>(instance) % std::min<std::size_t>(3, n - 1);
        for (const auto &[crit, score] : {std::pair{GreedyCriterion::Entropy, oracle::Score::Entropy},
                                          std::pair{GreedyCriterion::MutualInformation, oracle::Score::MutualInformation}}) {
            ++runs;
            if (greedy_select(cov, k, crit) != oracle::greedy(cov, k, score)) { ++mismatches; }
        }
    }
    Result r;
    r.outcome = mismatches == 0 ? Outcome::Pass : Outcome::Fail;
    r.detail = std::to_string(runs - mismatches) + "/" + std::to_string(runs) +
               " entropy and MI selections identical to the exhaustive oracle";
    return r;
}

// ---------------------------------------------------------------------------
// 6, 7. Synthetic benchmark

struct SyntheticRun {
    double stationary_rms = 0.0;
    double nostill_rms = 0.0;
};

class SyntheticBench {
public:
    SyntheticRun run(std::uint64_t seed, int m) {
        auto &state = seed_state(seed);
        SelectionPlan plan;
        plan.method = SelectionMethod::GreedyEntropy;
        plan.m_total = m;
        const auto latents = select_latents(*state.train, plan, &state.stationary->params(), config(seed));
        auto fit = train_nostill(*state.train, latents, NostillOptions{}, config(seed));
        logs.push_back(fit.optimization);
        const auto trace = plan_and_evaluate(fit.model, *state.test, kBudget);
        return {state.stationary_rms, trace.mean_rms};
    }

    std::vector<OptimizationResult> logs;

private:
    static constexpr std::size_t kBudget = 4;

    struct SeedState {
        std::optional<Dataset> train;
        std::optional<Dataset> test;
        std::optional<StationaryModel> stationary;
        double stationary_rms = 0.0;
    };

    static TrainConfig config(std::uint64_t seed) {
        TrainConfig c;
        c.seed = seed;
        return c;
    }

    SeedState &seed_state(std::uint64_t seed) {
        auto it = states_.find(seed);
        if (it != states_.end()) { return it->second; }
        TwoRegimeConfig g;
        g.seed = seed;
        auto [train, test] = interleaved_time_split(generate_two_regime(g));
        SeedState s;
        s.train = normalize(train);
        s.test = test;
        auto fit = train_stationary(*s.train, KernelFamily::CH1, config(seed));
        logs.push_back(fit.optimization);
        s.stationary.emplace(std::move(fit.model));
        s.stationary_rms = plan_and_evaluate(*s.stationary, *s.test, kBudget).mean_rms;
        return states_.emplace(seed, std::move(s)).first->second;
    }

    std::map<std::uint64_t, SeedState> states_;
};

constexpr int kSeeds = 10;

Result table_analogue(SyntheticBench &bench, std::map<int, std::vector<double>> &ns_by_m) {
    const auto t0 = std::chrono::steady_clock::now();
    int wins = 0;
    Result r;
    for (int seed = 0; seed < kSeeds; ++seed) {
        const auto run = bench.run(static_cast<std::uint64_t>(seed), 12);
        ns_by_m[12].push_back(run.nostill_rms);
        const double ratio = run.nostill_rms / run.stationary_rms;
        if (ratio <= kRmsRatio) { ++wins; }
        r.notes.push_back("seed " + std::to_string(seed) + ": S " + fmt(run.stationary_rms) + ", NS-GE " +
                          fmt(run.nostill_rms) + ", ratio " + fmt(ratio, 3));
    }
    const double secs = seconds_since(t0);

    // Not gating: a second block of generator seeds, to show the seed spread.
    int other_wins = 0;
    for (int seed = 100; seed < 100 + kSeeds; ++seed) {
        const auto run = bench.run(static_cast<std::uint64_t>(seed), 12);
        if (run.nostill_rms / run.stationary_rms <= kRmsRatio) { ++other_wins; }
    }
    r.notes.push_back("seeds 100-109 (not gating): " + std::to_string(other_wins) + "/" + std::to_string(kSeeds));

    r.outcome = wins >= kSeedsNeeded && secs < 600.0 ? Outcome::Pass : Outcome::Fail;
    r.detail = std::to_string(wins) + "/" + std::to_string(kSeeds) + " seeds with NS-GE <= " + fmt(kRmsRatio) +
               " x S (need " + std::to_string(kSeedsNeeded) + "), " + fmt(secs, 3) + " s";
    return r;
}

Result m_sweep(SyntheticBench &bench, std::map<int, std::vector<double>> &ns_by_m) {
    for (int m : {2, 6}) {
        for (int seed = 0; seed < kSeeds; ++seed) {
            ns_by_m[m].push_back(bench.run(static_cast<std::uint64_t>(seed), m).nostill_rms);
        }
    }
    auto mean = [](const std::vector<double> &v) {
        double s = 0;
        for (double x : v) { s += x; }
        return s / static_cast<double>(v.size());
    };
    const double r2 = mean(ns_by_m[2]), r6 = mean(ns_by_m[6]), r12 = mean(ns_by_m[12]);
    int inversions = 0;
    bool large_inversion = false;
    for (const auto &[a, b] : {std::pair{r2, r6}, std::pair{r6, r12}}) {
        if (b > a) {
            ++inversions;
            if (b > a * (1.0 + kInversionAllowance)) { large_inversion = true; }
        }
    }
    Result r;
    r.outcome = r12 <= r2 && inversions <= 1 && !large_inversion ? Outcome::Pass : Outcome::Fail;
    r.detail = "mean NS-GE rms over " + std::to_string(kSeeds) + " seeds: m=2 " + fmt(r2) + ", m=6 " + fmt(r6) +
               ", m=12 " + fmt(r12) + " (need m=12 <= m=2, at most one inversion <= 5%)";
    return r;
}

// ---------------------------------------------------------------------------
// 5. Gradients and training logs

Result gradient_sanity(const std::vector<OptimizationResult> &logs) {
    TwoRegimeConfig g;
    g.stations = 8;
    g.timesteps = 6;
    g.seed = 55;
    const auto data = normalize(generate_two_regime(g));
    const auto pts = data.points();
    const Eigen::VectorXd y = data.values();
    std::mt19937_64 rng(505);
    std::normal_distribution<double> z(0.0, 0.4);
    std::vector<SpaceTimePoint> latents;
    for (std::size_t i = 0; i < data.size(); i += 12) { latents.push_back(data[i].point); }

    int bad = 0, checked = 0;
    double worst = 0.0;
    auto compare = [&](const Eigen::VectorXd &theta, const Eigen::VectorXd &grad,
                       const std::function<double(const Eigen::VectorXd &)> &f) {
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            const double h = kFdStep * std::max(1.0, std::abs(theta[i]));
            Eigen::VectorXd up = theta, down = theta;
            up[i] += h;
            down[i] -= h;
            const double fd = (f(up) - f(down)) / (2.0 * h);
            const double scale = std::max({std::abs(grad[i]), std::abs(fd), 1.0});
            const double rel = std::abs(fd - grad[i]) / scale;
            worst = std::max(worst, rel);
            ++checked;
            if (rel > kFdAgreement) { ++bad; }
        }
    };
    for (int point = 0; point < 50; ++point) {
        NostillOptions o;
        o.sparse = point % 2 == 1;
        o.base_family = point % 4 < 2 ? KernelFamily::CH1 : KernelFamily::CH2;
        const auto init = initial_nostill_params(data, latents, o);
        Eigen::VectorXd theta = pack_nostill(init);
        for (auto &v : theta) { v += z(rng); }
        if (o.base_family == KernelFamily::CH2) { theta[0] = std::min(theta[0], 0.0); }
        const auto at = nostill_objective(unpack_nostill(theta, init), pts, y);
        if (!at) {
            ++bad;
            continue;
        }
        compare(theta, at->gradient, [&](const Eigen::VectorXd &t) { return nostill_lml(unpack_nostill(t, init), data); });

        const auto sinit = initial_stationary_params(data, o.base_family);
        Eigen::VectorXd s = pack_stationary(sinit);
        for (auto &v : s) { v += z(rng); }
        if (o.base_family == KernelFamily::CH2) { s[0] = std::min(s[0], 0.0); }
        const auto sat = stationary_objective(s, sinit.kernel, pts, y);
        if (!sat) {
            ++bad;
            continue;
        }
        compare(s, sat->gradient, [&](const Eigen::VectorXd &t) {
            const auto v = stationary_objective(t, sinit.kernel, pts, y);
            return v ? v->value : std::nan("");
        });
    }

    int decreases = 0;
    std::size_t steps = 0;
    for (const auto &opt : logs) {
        for (std::size_t i = 1; i < opt.log.size(); ++i) {
            if (opt.log[i].restart != opt.log[i - 1].restart) { continue; }
            ++steps;
            if (opt.log[i].objective < opt.log[i - 1].objective) { ++decreases; }
        }
    }
    Result r;
    r.outcome = bad == 0 && decreases == 0 ? Outcome::Pass : Outcome::Fail;
    r.detail = std::to_string(checked - bad) + "/" + std::to_string(checked) +
               " partials at 50 points agree (worst rel " + fmt(worst) + ", <= " + fmt(kFdAgreement) + "); " +
               std::to_string(decreases) + " decreases in " + std::to_string(steps) + " accepted steps over " +
               std::to_string(logs.size()) + " training runs";
    return r;
}

// ---------------------------------------------------------------------------
// 8. Real wind data (optional)

Result wind_stretch() {
    Result r;
    const char *config = std::getenv("NOSTILL_WIND_CONFIG");
    if (config == nullptr || *config == '\0') {
        r.outcome = Outcome::Skip;
        r.detail = "not gating; set NOSTILL_WIND_CONFIG to a run config over the wind data";
        return r;
    }
    TempDir dir;
    RunLog log;
    const auto cfg = load_experiment_config(config, {"output.dir=" + (dir / "wind").string()});
    if (cmd_run(cfg, log) != kExitOk) {
        r.detail = "pipeline failed";
        return r;
    }
    std::map<std::string, double> rows;
    std::istringstream in(slurp(dir / "wind" / artifacts::kSummary));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        rows[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
    double s = rows["S"], ns = 0.0;
    for (const auto &[label, v] : rows) {
        if (label != "S") { ns = v; }
    }
    r.outcome = s >= 3.5 && s <= 5.5 && ns < s ? Outcome::Pass : Outcome::Fail;
    r.detail = "S " + fmt(s) + " (need [3.5, 5.5]), NS " + fmt(ns) + " (need < S)";
    return r;
}

// ---------------------------------------------------------------------------
// 9. Determinism

Result determinism() {
    TempDir dir;
    const auto config = std::filesystem::path(NOSTILL_SOURCE_DIR) / "configs" / "toy.ini";
    std::string first, second;
    for (const auto *name : {"a", "b"}) {
        RunLog log;
        const auto cfg = load_experiment_config(config, {std::string("output.dir=") + (dir / name).string()});
        if (cmd_run(cfg, log) != kExitOk) { return {Outcome::Fail, "toy run failed: " + log.text(), {}}; }
    }
    int same = 0;
    const char *files[] = {artifacts::kSummary, artifacts::kRmsSeries, artifacts::kStationaryTrace,
                           artifacts::kNostillTrace, artifacts::kLatents};
    for (const auto *f : files) {
        if (slurp(dir / "a" / f) == slurp(dir / "b" / f) && !slurp(dir / "a" / f).empty()) { ++same; }
    }
    Result r;
    r.outcome = same == static_cast<int>(std::size(files)) ? Outcome::Pass : Outcome::Fail;
    r.detail = std::to_string(same) + "/" + std::to_string(std::size(files)) +
               " summary artifacts byte-identical across two runs of configs/toy.ini";
    return r;
}

std::set<int> parse_list(const std::string &text) {
    std::set<int> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) { out.insert(std::stoi(item)); }
    }
    return out;
}

}  // namespace

int main(int argc, char **argv) {
    std::set<int> known;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--known-failures" && i + 1 < argc) {
            known = parse_list(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--known-failures 1,6,7]\n";
            return 2;
        }
    }

    const std::pair<int, const char *> names[] = {
        {1, "kernel validity"}, {2, "stationary reduction"}, {3, "scalar oracles"},
        {4, "greedy oracle equivalence"}, {5, "gradients and training logs"}, {6, "synthetic mean rms vs stationary"},
        {7, "m sweep"}, {8, "wind data stretch"}, {9, "determinism"}};
    std::map<int, Result> results;
    auto timed = [&](int id, const std::function<Result()> &f) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            results[id] = f();
        } catch (const std::exception &e) {
            results[id] = {Outcome::Fail, std::string("threw: ") + e.what(), {}};
        }
        std::cerr << "criterion " << id << " done in " << fmt(seconds_since(t0), 3) << " s\n";
    };

    SyntheticBench bench;
    std::map<int, std::vector<double>> ns_by_m;
    timed(1, kernel_validity);
    timed(2, stationary_reduction);
    timed(3, scalar_oracles);
    timed(4, greedy_equivalence);
    timed(6, [&] { return table_analogue(bench, ns_by_m); });
    timed(7, [&] { return m_sweep(bench, ns_by_m); });
    timed(5, [&] { return gradient_sanity(bench.logs); });
    timed(8, wind_stretch);
    timed(9, determinism);

    std::set<int> failed;
    for (const auto &[id, name] : names) {
        const auto &r = results[id];
        const char *word = r.outcome == Outcome::Pass ? "PASS" : (r.outcome == Outcome::Skip ? "SKIP" : "FAIL");
        if (r.outcome == Outcome::Fail) { failed.insert(id); }
        std::cout << "criterion " << id << " " << name << ": " << word << " (" << r.detail << ")\n";
        for (const auto &n : r.notes) { std::cout << "    " << n << "\n"; }
    }
    if (failed != known) {
        std::cout << "failing criteria differ from the expected list\n";
        return 1;
    }
    return 0;
}
