#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nostill/dataset.hpp"
#include "nostill/space_time_model.hpp"

namespace nostill {

struct PlanningStep {
    double timestep = 0.0;
    std::vector<long> stations;       // test stations at this step, sorted by id
    std::vector<std::size_t> picks;   // indices into `stations`, in pick order
    std::vector<bool> observed;       // per station
    Eigen::VectorXd truth;            // raw units, per station
    Eigen::VectorXd prediction;       // raw units; NaN where observed
    double rms = 0.0;                 // over unobserved stations, 0 when none
    std::size_t conditioning_size = 0;  // observations available before this step
};

struct PlanningTrace {
    std::vector<PlanningStep> steps;
    double mean_rms = 0.0;
    std::size_t budget = 0;
    std::string test_fingerprint;

    [[nodiscard]] std::vector<double> timesteps() const;
};

/// "<rows>:<crc32 hex>" for a dataset.
std::string dataset_fingerprint(const Dataset &data);

/// Sequential observation planning over the test stations.
///
/// At each timestep, `budget` stations are chosen greedily by posterior
/// entropy of the remaining stations' readings given every earlier reading, their
/// true values are revealed, and the rest are predicted. Test values are
/// read in raw units. An empty `timesteps` list means every test timestep.
PlanningTrace plan_and_evaluate(const SpaceTimeModel &model, const Dataset &test, std::size_t budget,
                                const std::vector<double> &timesteps = {});

struct ComparisonRow {
    std::string label;
    double mean_rms = 0.0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    std::vector<double> timesteps;
    std::vector<std::vector<double>> rms;  // per row, per timestep
};

/// Throws DataError when traces differ in test data, budget or timesteps.
ComparisonTable compare_models(const std::vector<std::pair<std::string, PlanningTrace>> &traces);

/// Columns: timestep, station_id, observed_flag, truth, prediction.
void write_trace_csv(const PlanningTrace &trace, const std::filesystem::path &path);
/// Columns: model_label, mean_rms.
void write_summary_csv(const ComparisonTable &table, const std::filesystem::path &path);
/// Columns: model_label, timestep, rms.
void write_rms_series_csv(const ComparisonTable &table, const std::filesystem::path &path);

}  // namespace nostill
