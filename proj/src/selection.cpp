#include "nostill/selection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include "nostill/numeric_text.hpp"

namespace nostill {

namespace {

constexpr double kSelectionJitter = 1e-8;
constexpr double kTieTolerance = 1e-9;

Eigen::MatrixXd submatrix(const Eigen::MatrixXd &m, const std::vector<std::size_t> &rows,
                          const std::vector<std::size_t> &cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                m(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
        }
    }
    return out;
}

// Exact Cholesky; the caller has already applied the selection jitter.
Eigen::LLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd &m, const char *what) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().minCoeff() > 0.0)) {
        throw NumericalError(std::string("greedy selection: ") + what + " is not positive definite");
    }
    return llt;
}

double llt_log_det(const Eigen::LLT<Eigen::MatrixXd> &llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::VectorXd inverse_diagonal(const Eigen::LLT<Eigen::MatrixXd> &llt) {
    const auto n = llt.matrixLLT().rows();
    const Eigen::MatrixXd linv =
        llt.matrixL().solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)));
    return linv.colwise().squaredNorm().transpose();
}

GreedyCriterion criterion_of(const SelectionPlan &plan) {
    switch (plan.method) {
    case SelectionMethod::GreedyEntropy:
    case SelectionMethod::GreedyEntropyEmpirical:
        return GreedyCriterion::Entropy;
    default:
        return plan.krause_mi ? GreedyCriterion::MutualInformationKrause : GreedyCriterion::MutualInformation;
    }
}

std::array<double, 3> coords(const SpaceTimePoint &p) { return {p.x, p.y, p.t}; }

}  // namespace

Eigen::MatrixXd empirical_covariance(const StationGrid &grid, CovarianceAxis axis) {
    // Rows of `samples` are observations, columns are variables.
    const Eigen::MatrixXd samples = axis == CovarianceAxis::Space ? Eigen::MatrixXd(grid.values.transpose())
                                                                  : grid.values;
    const auto n = samples.rows();
    if (n < 2) {
        throw DataError(std::string("empirical covariance over ") + (axis == CovarianceAxis::Space ? "space" : "time") +
                        " needs at least 2 samples, got " + std::to_string(n));
    }
    const Eigen::MatrixXd centered = samples.rowwise() - samples.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd empirical_covariance(const Dataset &data, CovarianceAxis axis) {
    return empirical_covariance(make_station_grid(data), axis);
}

std::vector<std::size_t> greedy_select(const Eigen::MatrixXd &cov, std::size_t k, GreedyCriterion criterion,
                                       double noise_var, const std::vector<std::size_t> &observed) {
    const auto n = static_cast<std::size_t>(cov.rows());
    if (cov.rows() != cov.cols()) { throw std::invalid_argument("greedy_select: covariance must be square"); }
    std::vector<bool> taken(n, false);
    for (auto i : observed) {
        if (i >= n || taken[i]) { throw std::invalid_argument("greedy_select: bad or repeated observed index"); }
        taken[i] = true;
    }
    const auto candidates = n - observed.size();
    if (k < 1 || k >= candidates) {
        throw std::invalid_argument("greedy_select: need 1 <= k < " + std::to_string(candidates) + ", got " +
                                    std::to_string(k));
    }
    if (!(noise_var >= 0.0)) { throw std::invalid_argument("greedy_select: noise variance must be >= 0"); }
    if (!cov.allFinite()) { throw NumericalError("greedy selection: covariance has non-finite entries"); }

    Eigen::MatrixXd k_all = 0.5 * (cov + cov.transpose());
    double scale = k_all.trace() / static_cast<double>(n);
    if (!(scale > 0.0)) { scale = 1.0; }
    k_all.diagonal().array() += kSelectionJitter * scale;
    factor_or_throw(k_all, "covariance");

    std::vector<std::size_t> selected;
    std::vector<std::size_t> conditioned = observed;
    while (selected.size() < k) {
        std::vector<std::size_t> remaining;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) { remaining.push_back(i); }
        }
        Eigen::MatrixXd post = submatrix(k_all, remaining, remaining);
        if (!conditioned.empty()) {
            Eigen::MatrixXd kss = submatrix(k_all, conditioned, conditioned);
            kss.diagonal().array() += noise_var;
            const Eigen::MatrixXd kus = submatrix(k_all, remaining, conditioned);
            const auto llt = factor_or_throw(kss, "selected block");
            post -= kus * llt.solve(Eigen::MatrixXd(kus.transpose()));
            post = 0.5 * (post + post.transpose());
        }
        const auto post_llt = factor_or_throw(post, "posterior covariance");
        const double post_log_det = llt_log_det(post_llt);
        const Eigen::VectorXd post_inv_diag = inverse_diagonal(post_llt);

        Eigen::VectorXd prior_inv_diag;
        double prior_log_det = 0.0;
        if (criterion != GreedyCriterion::Entropy) {
            const auto prior_llt = factor_or_throw(submatrix(k_all, remaining, remaining), "candidate block");
            prior_log_det = llt_log_det(prior_llt);
            prior_inv_diag = inverse_diagonal(prior_llt);
        }

        // Score so that larger is better.
        std::size_t best = remaining.size();
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < remaining.size(); ++c) {
            const auto ci = static_cast<Eigen::Index>(c);
            const double m_cc = post(ci, ci);
            // log det of the remaining posterior after a noisy observation at c.
            const double after = post_log_det + std::log1p(noise_var * post_inv_diag[ci]) - std::log(m_cc + noise_var);
            double score = 0.0;
            switch (criterion) {
            case GreedyCriterion::Entropy:
                score = -after;
                break;
            case GreedyCriterion::MutualInformation:
                score = prior_log_det + std::log(prior_inv_diag[ci]) - after;
                break;
            case GreedyCriterion::MutualInformationKrause:
                score = std::log(m_cc + noise_var) + std::log(prior_inv_diag[ci]);
                break;
            }
            if (!std::isfinite(score)) { throw NumericalError("greedy selection: non-finite criterion value"); }
            if (best == remaining.size() || score > best_score + kTieTolerance * std::max(1.0, std::abs(best_score))) {
                best = c;
                best_score = score;
            }
        }
        selected.push_back(remaining[best]);
        conditioned.push_back(remaining[best]);
        taken[remaining[best]] = true;
    }
    return selected;
}

std::string to_string(SelectionMethod method) {
    switch (method) {
    case SelectionMethod::GreedyEntropy: return "GE";
    case SelectionMethod::GreedyMI: return "GMI";
    case SelectionMethod::GreedyEntropyEmpirical: return "GE-emp";
    case SelectionMethod::GreedyMIEmpirical: return "GMI-emp";
    case SelectionMethod::PseudoInput: return "PI";
    case SelectionMethod::Uniform: return "U";
    }
    return "?";
}

SelectionMethod selection_method_from_string(std::string_view name) {
    for (auto m : {SelectionMethod::GreedyEntropy, SelectionMethod::GreedyMI, SelectionMethod::GreedyEntropyEmpirical,
                   SelectionMethod::GreedyMIEmpirical, SelectionMethod::PseudoInput, SelectionMethod::Uniform}) {
        if (to_string(m) == name) { return m; }
    }
    throw ConfigError("unknown selection method '" + std::string(name) + "' (expected GE, GMI, GE-emp, GMI-emp, PI, U)");
}

bool SelectionPlan::separable() const {
    return method == SelectionMethod::GreedyEntropyEmpirical || method == SelectionMethod::GreedyMIEmpirical;
}

void SelectionPlan::validate() const {
    if (separable()) {
        if (!m_space || !m_time) { throw ConfigError(to_string(method) + " needs m_space and m_time"); }
        if (*m_space < 1 || *m_time < 1) { throw ConfigError("m_space and m_time must be >= 1"); }
    } else {
        if (!m_total) { throw ConfigError(to_string(method) + " needs m_total"); }
        if (*m_total < 1) { throw ConfigError("m_total must be >= 1"); }
    }
}

int SelectionPlan::count() const {
    validate();
    return separable() ? *m_space * *m_time : *m_total;
}

std::vector<SpaceTimePoint> select_latents(const Dataset &data, const SelectionPlan &plan,
                                           const StationaryParams *stationary, const TrainConfig &config) {
    plan.validate();
    const auto pts = data.points();
    const auto n = pts.size();
    switch (plan.method) {
    case SelectionMethod::Uniform: {
        const auto m = static_cast<std::size_t>(*plan.m_total);
        if (m > n) { throw ConfigError("uniform selection asks for more points than the training set has"); }
        std::vector<SpaceTimePoint> out;
        for (std::size_t i = 0; i < m; ++i) { out.push_back(pts[i * n / m]); }
        return out;
    }
    case SelectionMethod::GreedyEntropy:
    case SelectionMethod::GreedyMI: {
        if (stationary == nullptr) { throw ConfigError("stationary-covariance selection needs a trained stationary model"); }
        const auto m = static_cast<std::size_t>(*plan.m_total);
        if (m >= n) { throw ConfigError("greedy selection needs m_total below the training set size"); }
        const auto picks = greedy_select(gram_stationary(pts, stationary->kernel), m, criterion_of(plan));
        std::vector<SpaceTimePoint> out;
        for (auto i : picks) { out.push_back(pts[i]); }
        return out;
    }
    case SelectionMethod::GreedyEntropyEmpirical:
    case SelectionMethod::GreedyMIEmpirical: {
        const auto grid = make_station_grid(data);
        const auto ms = static_cast<std::size_t>(*plan.m_space);
        const auto mt = static_cast<std::size_t>(*plan.m_time);
        if (ms >= grid.station_count() || mt >= grid.time_count()) {
            throw ConfigError("empirical selection needs m_space below the station count and m_time below the "
                              "timestep count");
        }
        const auto stations = greedy_select(empirical_covariance(grid, CovarianceAxis::Space), ms, criterion_of(plan));
        const auto times = greedy_select(empirical_covariance(grid, CovarianceAxis::Time), mt, criterion_of(plan));
        std::vector<SpaceTimePoint> out;
        for (auto s : stations) {
            for (auto t : times) { out.push_back(grid.point(s, t)); }
        }
        return out;
    }
    case SelectionMethod::PseudoInput:
        if (stationary == nullptr) { throw ConfigError("pseudo-input selection needs a trained stationary model"); }
        return learn_pseudo_inputs(data, static_cast<std::size_t>(*plan.m_total), *stationary, config);
    }
    throw ConfigError("unhandled selection method");
}

Eigen::MatrixXd fitc_gram(const KernelSpec &spec, std::span<const SpaceTimePoint> points,
                          std::span<const SpaceTimePoint> pseudo) {
    const auto factor = jittered_cholesky(gram_stationary(pseudo, spec));
    const Eigen::MatrixXd kmn = gram_stationary(pseudo, points, spec);
    const Eigen::MatrixXd v = factor.lower.triangularView<Eigen::Lower>().solve(kmn);
    Eigen::MatrixXd q = v.transpose() * v;
    const Eigen::MatrixXd k = gram_stationary(points, spec);
    q.diagonal() = k.diagonal();
    return q;
}

double fitc_lml(const StationaryParams &params, std::span<const SpaceTimePoint> points, const Eigen::VectorXd &values,
                std::span<const SpaceTimePoint> pseudo) {
    const auto n = static_cast<Eigen::Index>(points.size());
    if (values.size() != n) { throw std::invalid_argument("fitc_lml: values and points differ in length"); }
    const auto &spec = params.kernel;
    const auto factor = jittered_cholesky(gram_stationary(pseudo, spec));
    const Eigen::MatrixXd kmn = gram_stationary(pseudo, points, spec);
    const Eigen::MatrixXd v = factor.lower.triangularView<Eigen::Lower>().solve(kmn);

    // Diagonal of the prior gram is the kernel variance at zero separation.
    const double kdiag = spec.variance();
    const Eigen::ArrayXd lambda =
        (kdiag - v.colwise().squaredNorm().transpose().array()).max(0.0) + params.noise_var;
    if (!(lambda > 0.0).all()) { throw NumericalError("fitc_lml: non-positive diagonal; noise variance is zero"); }

    const auto m = v.rows();
    const Eigen::MatrixXd v_scaled = v * lambda.inverse().sqrt().matrix().asDiagonal();
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(m, m) + v_scaled * v_scaled.transpose();
    const Eigen::LLT<Eigen::MatrixXd> b_llt(b);
    if (b_llt.info() != Eigen::Success) { throw NumericalError("fitc_lml: inner factorization failed"); }

    const Eigen::VectorXd y_over = (values.array() / lambda).matrix();
    const Eigen::VectorXd r = b_llt.matrixL().solve(v * y_over);
    const double quad = values.dot(y_over) - r.squaredNorm();
    const double log_det = lambda.log().sum() + 2.0 * b_llt.matrixLLT().diagonal().array().log().sum();
    return -0.5 * quad - 0.5 * log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

std::vector<SpaceTimePoint> pseudo_input_init(const Dataset &data, std::size_t m, const KernelSpec &spec) {
    const auto pts = data.points();
    const auto n = pts.size();
    if (m < 1 || m > n) { throw ConfigError("pseudo-input count must be in [1, n]"); }
    const auto &l = spec.length_scales;
    auto scaled = [&](const SpaceTimePoint &p) {
        return Eigen::Vector3d(p.x / l[0], p.y / l[1], p.t / l[2]);
    };
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto &p : pts) { centroid += scaled(p); }
    centroid /= static_cast<double>(n);

    std::size_t start = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (scaled(pts[i]) - centroid).squaredNorm();
        if (d < best) {
            best = d;
            start = i;
        }
    }
    std::vector<SpaceTimePoint> out{pts[start]};
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::size_t last = start;
    while (out.size() < m) {
        std::size_t next = 0;
        double far = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], (scaled(pts[i]) - scaled(pts[last])).squaredNorm());
            if (nearest[i] > far) {
                far = nearest[i];
                next = i;
            }
        }
        out.push_back(pts[next]);
        last = next;
    }
    return out;
}

std::vector<SpaceTimePoint> learn_pseudo_inputs(const Dataset &data, std::size_t m, const StationaryParams &stationary,
                                                const TrainConfig &config) {
    const auto init = pseudo_input_init(data, m, stationary.kernel);
    const auto pts = data.points();
    const Eigen::VectorXd y = data.values();
    const auto mi = static_cast<Eigen::Index>(m);

    std::array<double, 3> lo = coords(pts[0]);
    std::array<double, 3> hi = lo;
    for (const auto &p : pts) {
        const auto c = coords(p);
        for (std::size_t d = 0; d < 3; ++d) {
            lo[d] = std::min(lo[d], c[d]);
            hi[d] = std::max(hi[d], c[d]);
        }
    }

    auto to_points = [&](const Eigen::VectorXd &x) {
        std::vector<SpaceTimePoint> out(m);
        for (Eigen::Index i = 0; i < mi; ++i) { out[static_cast<std::size_t>(i)] = {x[3 * i], x[3 * i + 1], x[3 * i + 2]}; }
        return out;
    };
    auto value_at = [&](const Eigen::VectorXd &x) -> std::optional<double> {
        try {
            const auto pseudo = to_points(x);
            const double v = fitc_lml(stationary, pts, y, pseudo);
            if (!std::isfinite(v)) { return std::nullopt; }
            return v;
        } catch (const NumericalError &) {
            return std::nullopt;
        }
    };

    // Coordinates are optimized in length-scale units so that one finite
    // difference step means the same thing along every axis.
    const auto &l = stationary.kernel.length_scales;
    Eigen::VectorXd unit(3 * mi);
    for (Eigen::Index i = 0; i < mi; ++i) {
        for (Eigen::Index d = 0; d < 3; ++d) { unit[3 * i + d] = l[static_cast<std::size_t>(d)]; }
    }
    Eigen::VectorXd x0(3 * mi);
    for (Eigen::Index i = 0; i < mi; ++i) {
        const auto c = coords(init[static_cast<std::size_t>(i)]);
        for (Eigen::Index d = 0; d < 3; ++d) { x0[3 * i + d] = c[static_cast<std::size_t>(d)] / unit[3 * i + d]; }
    }

    const Objective objective = [&](const Eigen::VectorXd &z) -> std::optional<ObjectiveValue> {
        const Eigen::VectorXd x = z.cwiseProduct(unit);
        const auto f = value_at(x);
        if (!f) { return std::nullopt; }
        ObjectiveValue out;
        out.value = *f;
        out.gradient.resize(z.size());
        constexpr double kStep = 1e-5;
        for (Eigen::Index k = 0; k < z.size(); ++k) {
            Eigen::VectorXd a = x;
            Eigen::VectorXd b = x;
            a[k] += kStep * unit[k];
            b[k] -= kStep * unit[k];
            const auto fa = value_at(a);
            const auto fb = value_at(b);
            if (!fa || !fb) { return std::nullopt; }
            out.gradient[k] = (*fa - *fb) / (2.0 * kStep);
        }
        return out;
    };

    // Restart perturbations of half a length scale per coordinate.
    const RestartSampler sampler = [](const Eigen::VectorXd &start, std::mt19937_64 &rng) {
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        Eigen::VectorXd out = start;
        for (Eigen::Index k = 0; k < out.size(); ++k) { out[k] += u(rng); }
        return out;
    };
    const auto result = maximize(objective, x0, config, sampler);
    auto out = to_points(result.x.cwiseProduct(unit));
    for (auto &p : out) {
        p.x = std::clamp(p.x, lo[0], hi[0]);
        p.y = std::clamp(p.y, lo[1], hi[1]);
        p.t = std::clamp(p.t, lo[2], hi[2]);
    }
    return out;
}

void export_latents_csv(std::span<const SpaceTimePoint> latents, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) { throw IoError("cannot write " + path.string()); }
    out << "x,y,t\n";
    for (const auto &p : latents) {
        out << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.t) << '\n';
    }
    if (!out) { throw IoError("write failed for " + path.string()); }
}

std::vector<SpaceTimePoint> import_latents_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) { throw IoError("cannot read " + path.string()); }
    std::string line;
    if (!std::getline(in, line) || trim(line) != "x,y,t") {
        throw DataError(path.string() + ": expected header x,y,t");
    }
    std::vector<SpaceTimePoint> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) { continue; }
        std::array<double, 3> v{};
        std::string_view rest = line;
        for (std::size_t k = 0; k < 3; ++k) {
            const auto comma = rest.find(',');
            const auto field = k < 2 ? rest.substr(0, comma) : rest;
            const auto parsed = parse_double(field);
            if (!parsed || !std::isfinite(*parsed) || (k < 2 && comma == std::string_view::npos)) {
                throw DataError(path.string() + ": line " + std::to_string(line_no) + " is not x,y,t");
            }
            v[k] = *parsed;
            if (k < 2) { rest.remove_prefix(comma + 1); }
        }
        out.push_back({v[0], v[1], v[2]});
    }
    if (out.empty()) { throw DataError(path.string() + ": no latent locations"); }
    return out;
}

}  // namespace nostill
