#include "nostill/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/crc.hpp>

#include "nostill/numeric_text.hpp"

namespace nostill {

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::size_t column_index(const std::vector<std::string> &header, const std::string &name,
                         const std::filesystem::path &path) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == name) { return i; }
    }
    throw DataError(path.string() + ": column '" + name + "' not found in header");
}

std::string describe(const SpaceTimePoint &p) {
    return "(" + format_double(p.x) + ", " + format_double(p.y) + ", " + format_double(p.t) + ")";
}

}  // namespace

Dataset::Dataset(std::vector<Observation> observations, std::optional<std::vector<long>> station_ids,
                 std::optional<Normalization> normalization)
    : observations_(std::move(observations)), normalization_(normalization) {
    if (observations_.empty()) { throw DataError("dataset is empty"); }
    if (normalization_ && !(normalization_->stddev > 0.0 && std::isfinite(normalization_->stddev) &&
                            std::isfinite(normalization_->mean))) {
        throw DataError("normalization stddev must be positive and finite");
    }
    std::set<SpaceTimePoint> seen;
    for (std::size_t i = 0; i < observations_.size(); ++i) {
        const auto &obs = observations_[i];
        if (!obs.point.finite()) { throw DataError("row " + std::to_string(i) + ": non-finite coordinate"); }
        if (!std::isfinite(obs.value)) { throw DataError("row " + std::to_string(i) + ": non-finite value"); }
        if (!seen.insert(obs.point).second) {
            throw DataError("row " + std::to_string(i) + ": duplicate space-time point " + describe(obs.point));
        }
    }
    if (station_ids) {
        if (station_ids->size() != observations_.size()) {
            throw DataError("station id list length does not match observation count");
        }
        stations_ = std::move(*station_ids);
        explicit_stations_ = true;
    } else {
        std::map<std::pair<double, double>, long> site_ids;
        for (const auto &obs : observations_) { site_ids.emplace(std::pair{obs.point.x, obs.point.y}, 0); }
        long next = 0;
        for (auto &[site, id] : site_ids) { id = next++; }
        stations_.reserve(observations_.size());
        for (const auto &obs : observations_) { stations_.push_back(site_ids.at({obs.point.x, obs.point.y})); }
    }
}

std::vector<SpaceTimePoint> Dataset::points() const {
    std::vector<SpaceTimePoint> out;
    out.reserve(observations_.size());
    for (const auto &obs : observations_) { out.push_back(obs.point); }
    return out;
}

Eigen::VectorXd Dataset::values() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(observations_.size()));
    for (std::size_t i = 0; i < observations_.size(); ++i) { out[static_cast<Eigen::Index>(i)] = observations_[i].value; }
    return out;
}

std::uint32_t Dataset::checksum() const {
    boost::crc_32_type crc;
    for (const auto &obs : observations_) {
        const double fields[4] = {obs.point.x, obs.point.y, obs.point.t, obs.value};
        crc.process_bytes(fields, sizeof(fields));
    }
    return crc.checksum();
}

Dataset Dataset::subset(const std::vector<std::size_t> &indices) const {
    std::vector<Observation> obs;
    std::vector<long> ids;
    obs.reserve(indices.size());
    for (auto i : indices) {
        obs.push_back(observations_.at(i));
        ids.push_back(stations_.at(i));
    }
    if (explicit_stations_) { return Dataset(std::move(obs), std::move(ids), normalization_); }
    return Dataset(std::move(obs), std::nullopt, normalization_);
}

Dataset ingest_csv(const std::filesystem::path &path, const ColumnMap &columns) {
    std::ifstream in(path);
    if (!in) { throw IoError("cannot open " + path.string()); }
    std::string line;
    if (!std::getline(in, line)) { throw DataError(path.string() + ": missing header row"); }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) { line.erase(0, 3); }
    const auto header = split_csv_line(line);
    const std::size_t ix = column_index(header, columns.x, path);
    const std::size_t iy = column_index(header, columns.y, path);
    const std::size_t it = column_index(header, columns.t, path);
    const std::size_t iv = column_index(header, columns.value, path);
    std::optional<std::size_t> is;
    if (columns.station) { is = column_index(header, *columns.station, path); }

    std::vector<Observation> observations;
    std::vector<long> stations;
    std::set<SpaceTimePoint> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) { continue; }
        const auto fields = split_csv_line(line);
        const auto where = path.string() + ", line " + std::to_string(line_no);
        auto number = [&](std::size_t col, const std::string &name) {
            if (col >= fields.size()) { throw DataError(where + ": missing column '" + name + "'"); }
            auto v = parse_double(fields[col]);
            if (!v) { throw DataError(where + ": cannot parse '" + fields[col] + "' as a number"); }
            if (!std::isfinite(*v)) { throw DataError(where + ": non-finite " + name + " '" + fields[col] + "'"); }
            return *v;
        };
        Observation obs{{number(ix, columns.x), number(iy, columns.y), number(it, columns.t)}, number(iv, columns.value)};
        if (!seen.insert(obs.point).second) {
            throw DataError(where + ": duplicate space-time point " + describe(obs.point));
        }
        if (is) {
            if (*is >= fields.size()) { throw DataError(where + ": missing station column"); }
            auto id = parse_long(fields[*is]);
            if (!id) { throw DataError(where + ": cannot parse station id '" + fields[*is] + "'"); }
            stations.push_back(*id);
        }
        observations.push_back(obs);
    }
    if (observations.empty()) { throw DataError(path.string() + ": no data rows"); }
    if (is) { return Dataset(std::move(observations), std::move(stations)); }
    return Dataset(std::move(observations));
}

void export_csv(const Dataset &data, const std::filesystem::path &path, const ColumnMap &columns) {
    std::ofstream out(path);
    if (!out) { throw IoError("cannot write " + path.string()); }
    const bool with_station = columns.station.has_value() && data.has_station_ids();
    out << columns.x << ',' << columns.y << ',' << columns.t << ',' << columns.value;
    if (with_station) { out << ',' << *columns.station; }
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto &obs = data[i];
        out << format_double(obs.point.x) << ',' << format_double(obs.point.y) << ',' << format_double(obs.point.t)
            << ',' << format_double(obs.value);
        if (with_station) { out << ',' << data.stations()[i]; }
        out << '\n';
    }
    if (!out) { throw IoError("write failed for " + path.string()); }
}

Dataset normalize(const Dataset &data) {
    const Eigen::VectorXd v = data.values();
    const double mean = v.mean();
    const double var = (v.array() - mean).square().mean();
    if (!(var > 0.0)) { throw DataError("cannot normalize: values have zero variance"); }
    const double stddev = std::sqrt(var);

    std::vector<Observation> obs = data.observations();
    for (auto &o : obs) { o.value = (o.value - mean) / stddev; }
    Normalization stats{mean, stddev};
    if (data.normalization()) {
        const auto &prev = *data.normalization();
        stats = {prev.mean + prev.stddev * mean, prev.stddev * stddev};
    }
    if (data.has_station_ids()) { return Dataset(std::move(obs), data.stations(), stats); }
    return Dataset(std::move(obs), std::nullopt, stats);
}

Dataset denormalize(const Dataset &data) {
    if (!data.normalization()) { return data; }
    const auto stats = *data.normalization();
    std::vector<Observation> obs = data.observations();
    for (auto &o : obs) { o.value = stats.invert(o.value); }
    if (data.has_station_ids()) { return Dataset(std::move(obs), data.stations()); }
    return Dataset(std::move(obs));
}

std::pair<Dataset, Dataset> split_train_test(const Dataset &data, const SplitRule &rule) {
    std::vector<long> sorted_ids(data.stations());
    std::sort(sorted_ids.begin(), sorted_ids.end());
    sorted_ids.erase(std::unique(sorted_ids.begin(), sorted_ids.end()), sorted_ids.end());

    std::vector<bool> in_train(data.size(), false);
    switch (rule.kind) {
    case SplitRule::Kind::UniformByStation: {
        if (rule.stride < 1) { throw ConfigError("uniform-by-station stride must be >= 1"); }
        if (static_cast<std::size_t>(rule.stride) > sorted_ids.size()) {
            throw ConfigError("uniform-by-station stride " + std::to_string(rule.stride) + " exceeds station count " +
                              std::to_string(sorted_ids.size()));
        }
        std::set<long> train;
        for (std::size_t i = 0; i < sorted_ids.size(); i += static_cast<std::size_t>(rule.stride)) {
            train.insert(sorted_ids[i]);
        }
        for (std::size_t i = 0; i < data.size(); ++i) { in_train[i] = train.count(data.stations()[i]) > 0; }
        break;
    }
    case SplitRule::Kind::ByStationIdList: {
        std::set<long> known(sorted_ids.begin(), sorted_ids.end());
        for (long id : rule.train_stations) {
            if (!known.count(id)) { throw ConfigError("split references unknown station id " + std::to_string(id)); }
        }
        std::set<long> train(rule.train_stations.begin(), rule.train_stations.end());
        for (std::size_t i = 0; i < data.size(); ++i) { in_train[i] = train.count(data.stations()[i]) > 0; }
        break;
    }
    case SplitRule::Kind::ByTimeRange:
        if (rule.t_min > rule.t_max) { throw ConfigError("time range lower bound exceeds upper bound"); }
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double t = data[i].point.t;
            in_train[i] = t >= rule.t_min && t <= rule.t_max;
        }
        break;
    }

    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < data.size(); ++i) { (in_train[i] ? train_rows : test_rows).push_back(i); }
    if (train_rows.empty() || test_rows.empty()) { throw ConfigError("split leaves the train or test set empty"); }
    return {data.subset(train_rows), data.subset(test_rows)};
}

StationGrid make_station_grid(const Dataset &data) {
    StationGrid grid;
    std::map<long, std::pair<double, double>> sites;
    std::set<double> times;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto &p = data[i].point;
        auto [it, inserted] = sites.emplace(data.stations()[i], std::pair{p.x, p.y});
        if (!inserted && it->second != std::pair{p.x, p.y}) {
            throw DataError("station " + std::to_string(data.stations()[i]) + " changes location between rows");
        }
        times.insert(p.t);
    }
    for (const auto &[id, site] : sites) {
        grid.station_ids.push_back(id);
        grid.sites.push_back(site);
    }
    grid.times.assign(times.begin(), times.end());
    const auto S = grid.station_ids.size();
    const auto T = grid.times.size();
    if (S * T != data.size()) {
        throw DataError("data is not rectangular: " + std::to_string(S) + " stations x " + std::to_string(T) +
                        " timesteps != " + std::to_string(data.size()) + " rows");
    }
    std::map<long, std::size_t> station_pos;
    for (std::size_t s = 0; s < S; ++s) { station_pos[grid.station_ids[s]] = s; }
    std::map<double, std::size_t> time_pos;
    for (std::size_t k = 0; k < T; ++k) { time_pos[grid.times[k]] = k; }

    grid.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(T),
                                            std::numeric_limits<double>::quiet_NaN());
    grid.row.assign(S, std::vector<std::size_t>(T, data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto s = station_pos.at(data.stations()[i]);
        const auto k = time_pos.at(data[i].point.t);
        if (grid.row[s][k] != data.size()) {
            throw DataError("station " + std::to_string(grid.station_ids[s]) + " has two rows at one timestep");
        }
        grid.row[s][k] = i;
        grid.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) = data[i].value;
    }
    return grid;
}

}  // namespace nostill
