#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nostill/types.hpp"

namespace nostill {

struct Observation {
    SpaceTimePoint point;
    double value = 0.0;
};

/// Affine map applied to values: normalized = (raw - mean) / stddev.
struct Normalization {
    double mean = 0.0;
    double stddev = 1.0;

    [[nodiscard]] double apply(double raw) const { return (raw - mean) / stddev; }
    [[nodiscard]] double invert(double normalized) const { return normalized * stddev + mean; }
};

/// Column names used to read and write dataset CSV files.
struct ColumnMap {
    std::string x = "x";
    std::string y = "y";
    std::string t = "t";
    std::string value = "value";
    std::optional<std::string> station;
};

/// Ordered observations, immutable once built.
///
/// Construction rejects empty input, non-finite coordinates or values, and
/// repeated space-time points. When no station ids are given, stations are
/// derived from distinct (x, y) pairs in sorted order.
class Dataset {
public:
    explicit Dataset(std::vector<Observation> observations,
                     std::optional<std::vector<long>> station_ids = std::nullopt,
                     std::optional<Normalization> normalization = std::nullopt);

    [[nodiscard]] std::size_t size() const { return observations_.size(); }
    [[nodiscard]] const std::vector<Observation> &observations() const { return observations_; }
    [[nodiscard]] const Observation &operator[](std::size_t i) const { return observations_[i]; }

    [[nodiscard]] bool has_station_ids() const { return explicit_stations_; }
    /// Station label of every observation (explicit or derived).
    [[nodiscard]] const std::vector<long> &stations() const { return stations_; }
    [[nodiscard]] const std::optional<Normalization> &normalization() const { return normalization_; }

    [[nodiscard]] std::vector<SpaceTimePoint> points() const;
    [[nodiscard]] Eigen::VectorXd values() const;

    /// Row count plus CRC-32 over the coordinate and value bits.
    [[nodiscard]] std::uint32_t checksum() const;

    /// New dataset holding the rows at `indices`, in that order.
    [[nodiscard]] Dataset subset(const std::vector<std::size_t> &indices) const;

private:
    std::vector<Observation> observations_;
    std::vector<long> stations_;
    bool explicit_stations_ = false;
    std::optional<Normalization> normalization_;
};

Dataset ingest_csv(const std::filesystem::path &path, const ColumnMap &columns);

/// Writes the mapped columns (x, y, t, value, then station when present).
void export_csv(const Dataset &data, const std::filesystem::path &path, const ColumnMap &columns);

/// Zero-mean, unit population-variance values. Re-normalizing composes the
/// recorded statistics so that `denormalize` always returns raw units.
Dataset normalize(const Dataset &data);
Dataset denormalize(const Dataset &data);

struct SplitRule {
    enum class Kind { UniformByStation, ByStationIdList, ByTimeRange };

    Kind kind = Kind::UniformByStation;
    int stride = 2;                    // UniformByStation: every `stride`-th station trains
    std::vector<long> train_stations;  // ByStationIdList
    double t_min = 0.0;                // ByTimeRange, inclusive
    double t_max = 0.0;

    static SplitRule uniform_by_station(int k) { return {Kind::UniformByStation, k, {}, 0.0, 0.0}; }
    static SplitRule by_station_ids(std::vector<long> ids) {
        return {Kind::ByStationIdList, 0, std::move(ids), 0.0, 0.0};
    }
    static SplitRule by_time_range(double lo, double hi) { return {Kind::ByTimeRange, 0, {}, lo, hi}; }
};

std::pair<Dataset, Dataset> split_train_test(const Dataset &data, const SplitRule &rule);

/// Rectangular stations x timesteps view of a dataset.
struct StationGrid {
    std::vector<long> station_ids;                  // sorted
    std::vector<std::pair<double, double>> sites;   // (x, y) per station
    std::vector<double> times;                      // sorted, distinct
    Eigen::MatrixXd values;                         // stations x times
    std::vector<std::vector<std::size_t>> row;      // dataset row per (station, time)

    [[nodiscard]] std::size_t station_count() const { return station_ids.size(); }
    [[nodiscard]] std::size_t time_count() const { return times.size(); }
    [[nodiscard]] SpaceTimePoint point(std::size_t station, std::size_t time) const {
        return {sites[station].first, sites[station].second, times[time]};
    }
};

/// Throws DataError when some station misses a timestep or moves between rows.
StationGrid make_station_grid(const Dataset &data);

}  // namespace nostill
