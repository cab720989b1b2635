#include "nostill/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "nostill/numeric_text.hpp"
#include "nostill/selection.hpp"

namespace nostill {

namespace {

std::ofstream open_csv(const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) { throw IoError("cannot write " + path.string()); }
    return out;
}

void finish(std::ofstream &out, const std::filesystem::path &path) {
    out.flush();
    if (!out) { throw IoError("write failed for " + path.string()); }
}

}  // namespace

std::vector<double> PlanningTrace::timesteps() const {
    std::vector<double> out;
    for (const auto &s : steps) { out.push_back(s.timestep); }
    return out;
}

std::string dataset_fingerprint(const Dataset &data) {
    char crc[9];
    std::snprintf(crc, sizeof(crc), "%08x", static_cast<unsigned>(data.checksum()));
    return std::to_string(data.size()) + ":" + crc;
}

PlanningTrace plan_and_evaluate(const SpaceTimeModel &model, const Dataset &test, std::size_t budget,
                                const std::vector<double> &timesteps) {
    const auto grid = make_station_grid(test);
    const auto n_stations = grid.station_count();
    if (budget > n_stations) {
        throw ConfigError("planning budget " + std::to_string(budget) + " exceeds the " + std::to_string(n_stations) +
                          " test stations");
    }
    std::vector<std::size_t> steps;
    if (timesteps.empty()) {
        for (std::size_t k = 0; k < grid.time_count(); ++k) { steps.push_back(k); }
    } else {
        for (double t : timesteps) {
            const auto it = std::find(grid.times.begin(), grid.times.end(), t);
            if (it == grid.times.end()) { throw DataError("timestep " + format_double(t) + " is not in the test data"); }
            steps.push_back(static_cast<std::size_t>(it - grid.times.begin()));
        }
    }

    const Normalization test_norm = test.normalization().value_or(Normalization{});
    const double noise = model.noise_var();

    PlanningTrace trace;
    trace.budget = budget;
    trace.test_fingerprint = dataset_fingerprint(test);

    std::vector<SpaceTimePoint> observed;
    std::vector<double> observed_raw;
    double rms_sum = 0.0;
    for (auto k : steps) {
        PlanningStep step;
        step.timestep = grid.times[k];
        step.stations = grid.station_ids;
        step.conditioning_size = observed.size();
        std::vector<SpaceTimePoint> candidates;
        step.truth.resize(static_cast<Eigen::Index>(n_stations));
        for (std::size_t s = 0; s < n_stations; ++s) {
            candidates.push_back(grid.point(s, k));
            step.truth[static_cast<Eigen::Index>(s)] =
                test_norm.invert(grid.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)));
        }

        if (budget == n_stations) {
            for (std::size_t s = 0; s < n_stations; ++s) { step.picks.push_back(s); }
        } else if (budget > 0) {
            // Entropy is taken over station readings, so the joint covariance
            // carries the noise on every entry and the selection adds none.
            std::vector<SpaceTimePoint> joint = observed;
            joint.insert(joint.end(), candidates.begin(), candidates.end());
            std::vector<std::size_t> seen(observed.size());
            for (std::size_t i = 0; i < seen.size(); ++i) { seen[i] = i; }
            Eigen::MatrixXd readings = model.gram(joint);
            readings.diagonal().array() += noise;
            auto picks = greedy_select(readings, budget, GreedyCriterion::Entropy, 0.0, seen);
            for (auto &p : picks) { p -= observed.size(); }
            step.picks = std::move(picks);
        }

        step.observed.assign(n_stations, false);
        for (auto s : step.picks) {
            step.observed[s] = true;
            observed.push_back(candidates[s]);
            observed_raw.push_back(step.truth[static_cast<Eigen::Index>(s)]);
        }

        std::vector<SpaceTimePoint> targets;
        std::vector<std::size_t> target_index;
        for (std::size_t s = 0; s < n_stations; ++s) {
            if (!step.observed[s]) {
                targets.push_back(candidates[s]);
                target_index.push_back(s);
            }
        }
        step.prediction = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_stations),
                                                    std::numeric_limits<double>::quiet_NaN());
        if (!targets.empty()) {
            const Eigen::VectorXd obs_values =
                Eigen::Map<const Eigen::VectorXd>(observed_raw.data(), static_cast<Eigen::Index>(observed_raw.size()));
            const Eigen::VectorXd mean = model.predict_mean(observed, obs_values, targets);
            double sq = 0.0;
            for (std::size_t i = 0; i < targets.size(); ++i) {
                const auto s = static_cast<Eigen::Index>(target_index[i]);
                step.prediction[s] = mean[static_cast<Eigen::Index>(i)];
                const double e = step.prediction[s] - step.truth[s];
                sq += e * e;
            }
            step.rms = std::sqrt(sq / static_cast<double>(targets.size()));
        }
        if (!std::isfinite(step.rms)) {
            throw NumericalError("planning produced a non-finite rms at timestep " + format_double(step.timestep));
        }
        rms_sum += step.rms;
        trace.steps.push_back(std::move(step));
    }
    trace.mean_rms = trace.steps.empty() ? 0.0 : rms_sum / static_cast<double>(trace.steps.size());
    return trace;
}

ComparisonTable compare_models(const std::vector<std::pair<std::string, PlanningTrace>> &traces) {
    if (traces.empty()) { throw DataError("compare_models needs at least one trace"); }
    const auto &ref = traces.front().second;
    ComparisonTable table;
    table.timesteps = ref.timesteps();
    for (const auto &[label, trace] : traces) {
        if (trace.test_fingerprint != ref.test_fingerprint) {
            throw DataError("trace '" + label + "' was evaluated on different test data");
        }
        if (trace.budget != ref.budget) { throw DataError("trace '" + label + "' used a different budget"); }
        if (trace.timesteps() != table.timesteps) { throw DataError("trace '" + label + "' covers different timesteps"); }
        table.rows.push_back({label, trace.mean_rms});
        std::vector<double> series;
        for (const auto &s : trace.steps) { series.push_back(s.rms); }
        table.rms.push_back(std::move(series));
    }
    return table;
}

void write_trace_csv(const PlanningTrace &trace, const std::filesystem::path &path) {
    auto out = open_csv(path);
    out << "timestep,station_id,observed_flag,truth,prediction\n";
    for (const auto &step : trace.steps) {
        for (std::size_t s = 0; s < step.stations.size(); ++s) {
            const auto i = static_cast<Eigen::Index>(s);
            out << format_double(step.timestep) << ',' << step.stations[s] << ',' << (step.observed[s] ? 1 : 0) << ','
                << format_double(step.truth[i]) << ',';
            if (!step.observed[s]) { out << format_double(step.prediction[i]); }
            out << '\n';
        }
    }
    finish(out, path);
}

void write_summary_csv(const ComparisonTable &table, const std::filesystem::path &path) {
    auto out = open_csv(path);
    out << "model_label,mean_rms\n";
    for (const auto &row : table.rows) { out << row.label << ',' << format_double(row.mean_rms) << '\n'; }
    finish(out, path);
}

void write_rms_series_csv(const ComparisonTable &table, const std::filesystem::path &path) {
    auto out = open_csv(path);
    out << "model_label,timestep,rms\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t k = 0; k < table.timesteps.size(); ++k) {
            out << table.rows[r].label << ',' << format_double(table.timesteps[k]) << ','
                << format_double(table.rms[r][k]) << '\n';
        }
    }
    finish(out, path);
}

}  // namespace nostill
