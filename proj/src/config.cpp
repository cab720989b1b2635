#include "nostill/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "nostill/numeric_text.hpp"

namespace nostill {

namespace {

namespace fs = std::filesystem;
using Entries = std::map<std::string, std::string>;

const std::set<std::string> &known_keys() {
    static const std::set<std::string> keys = {
        "data.path", "data.test_path", "data.x_column", "data.y_column", "data.t_column",
        "data.value_column", "data.station_column",
        "split.rule", "split.stride", "split.train_stations", "split.t_min", "split.t_max",
        "model.kernel", "model.ch2_overall_variance", "model.spatial_dim_p", "model.sparse", "model.latent_kernel",
        "selection.method", "selection.m", "selection.m_space", "selection.m_time", "selection.krause_mi",
        "selection.latents_path",
        "train.seed", "train.restarts", "train.max_iterations", "train.tolerance", "train.restart_spread",
        "plan.budget", "plan.timesteps",
        "output.dir",
    };
    return keys;
}

class Values {
public:
    explicit Values(Entries entries) : entries_(std::move(entries)) {}

    [[nodiscard]] std::optional<std::string> get(const std::string &key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end() || trim(it->second).empty()) { return std::nullopt; }
        return std::string(trim(it->second));
    }
    [[nodiscard]] std::string require(const std::string &key) const {
        auto v = get(key);
        if (!v) { throw ConfigError("missing required key '" + key + "'"); }
        return *v;
    }
    [[nodiscard]] double real(const std::string &key, double fallback) const {
        const auto v = get(key);
        if (!v) { return fallback; }
        const auto parsed = parse_double(*v);
        if (!parsed) { throw ConfigError("'" + key + "' is not a number: " + *v); }
        return *parsed;
    }
    [[nodiscard]] std::optional<long> integer(const std::string &key) const {
        const auto v = get(key);
        if (!v) { return std::nullopt; }
        const auto parsed = parse_long(*v);
        if (!parsed) { throw ConfigError("'" + key + "' is not an integer: " + *v); }
        return parsed;
    }
    [[nodiscard]] long integer(const std::string &key, long fallback) const {
        return integer(key).value_or(fallback);
    }
    [[nodiscard]] bool flag(const std::string &key, bool fallback) const {
        const auto v = get(key);
        if (!v) { return fallback; }
        if (*v == "true") { return true; }
        if (*v == "false") { return false; }
        throw ConfigError("'" + key + "' must be true or false");
    }
    template <class T>
    [[nodiscard]] std::vector<T> list(const std::string &key) const {
        std::vector<T> out;
        const auto v = get(key);
        if (!v) { return out; }
        std::string text = *v;
        std::replace(text.begin(), text.end(), ',', ' ');
        std::istringstream in(text);
        std::string token;
        while (in >> token) {
            if constexpr (std::is_same_v<T, double>) {
                const auto p = parse_double(token);
                if (!p) { throw ConfigError("'" + key + "' holds a non-number: " + token); }
                out.push_back(*p);
            } else {
                const auto p = parse_long(token);
                if (!p) { throw ConfigError("'" + key + "' holds a non-integer: " + token); }
                out.push_back(*p);
            }
        }
        return out;
    }
    [[nodiscard]] const Entries &entries() const { return entries_; }

private:
    Entries entries_;
};

Entries flatten(const boost::property_tree::ptree &tree) {
    Entries out;
    for (const auto &[section, body] : tree) {
        if (body.empty()) { throw ConfigError("key '" + section + "' is outside any section"); }
        for (const auto &[key, value] : body) { out[section + "." + key] = value.data(); }
    }
    return out;
}

fs::path resolve(const fs::path &base, const std::string &value) {
    const fs::path p(value);
    return p.is_absolute() ? p : base / p;
}

fs::path require_file(const fs::path &base, const std::string &key, const std::string &value) {
    auto p = resolve(base, value);
    if (!fs::is_regular_file(p)) { throw ConfigError("'" + key + "' does not name a readable file: " + p.string()); }
    return p;
}

SplitRule parse_split(const Values &v) {
    const auto rule = v.get("split.rule").value_or("uniform_by_station");
    if (rule == "uniform_by_station") {
        const long k = v.integer("split.stride", 2);
        if (k < 1) { throw ConfigError("split.stride must be >= 1"); }
        return SplitRule::uniform_by_station(static_cast<int>(k));
    }
    if (rule == "station_ids") {
        auto ids = v.list<long>("split.train_stations");
        if (ids.empty()) { throw ConfigError("split.train_stations is required for rule station_ids"); }
        return SplitRule::by_station_ids(std::move(ids));
    }
    if (rule == "time_range") {
        const auto lo = v.real("split.t_min", 0.0);
        const auto hi = v.real("split.t_max", 0.0);
        if (!v.get("split.t_min") || !v.get("split.t_max") || hi < lo) {
            throw ConfigError("rule time_range needs split.t_min <= split.t_max");
        }
        return SplitRule::by_time_range(lo, hi);
    }
    throw ConfigError("unknown split rule '" + rule + "' (expected uniform_by_station, station_ids, time_range)");
}

}  // namespace

ExperimentConfig load_experiment_config(const fs::path &path, const std::vector<std::string> &overrides) {
    std::ifstream in(path);
    if (!in) { throw IoError("cannot read config file " + path.string()); }
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError("config " + path.string() + ": " + e.message());
    }
    auto entries = flatten(tree);
    for (const auto &o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || o.find('.') > eq) {
            throw ConfigError("override '" + o + "' is not of the form section.key=value");
        }
        entries[std::string(trim(o.substr(0, eq)))] = std::string(trim(o.substr(eq + 1)));
    }
    for (const auto &[key, value] : entries) {
        if (!known_keys().contains(key)) { throw ConfigError("unknown config key '" + key + "'"); }
    }
    const Values v(entries);
    const fs::path base = path.parent_path();

    ExperimentConfig cfg;
    cfg.data_path = require_file(base, "data.path", v.require("data.path"));
    if (const auto t = v.get("data.test_path")) { cfg.test_path = require_file(base, "data.test_path", *t); }
    cfg.columns.x = v.get("data.x_column").value_or("x");
    cfg.columns.y = v.get("data.y_column").value_or("y");
    cfg.columns.t = v.get("data.t_column").value_or("t");
    cfg.columns.value = v.get("data.value_column").value_or("value");
    cfg.columns.station = v.get("data.station_column").value_or("station");
    if (cfg.test_path && v.get("split.rule")) { throw ConfigError("data.test_path and split.rule are exclusive"); }
    cfg.split = parse_split(v);

    cfg.kernel = kernel_family_from_string(v.get("model.kernel").value_or("CH1"));
    if (cfg.kernel != KernelFamily::CH1 && cfg.kernel != KernelFamily::CH2) {
        throw ConfigError("model.kernel must be CH1 or CH2");
    }
    cfg.ch2_overall_variance = v.flag("model.ch2_overall_variance", false);
    const long p = v.integer("model.spatial_dim_p", 2);
    if (p < 1) { throw ConfigError("model.spatial_dim_p must be >= 1"); }
    cfg.spatial_dim_p = static_cast<int>(p);
    cfg.sparse = v.flag("model.sparse", false);
    cfg.latent_kernel = kernel_family_from_string(v.get("model.latent_kernel").value_or("ESGP"));
    if (cfg.latent_kernel != KernelFamily::ESGP && cfg.latent_kernel != KernelFamily::SqExp) {
        throw ConfigError("model.latent_kernel must be ESGP or SqExp");
    }

    cfg.selection.method = selection_method_from_string(v.get("selection.method").value_or("GE"));
    if (const auto m = v.integer("selection.m")) { cfg.selection.m_total = static_cast<int>(*m); }
    if (const auto m = v.integer("selection.m_space")) { cfg.selection.m_space = static_cast<int>(*m); }
    if (const auto m = v.integer("selection.m_time")) { cfg.selection.m_time = static_cast<int>(*m); }
    cfg.selection.krause_mi = v.flag("selection.krause_mi", false);
    if (const auto l = v.get("selection.latents_path")) {
        cfg.latents_path = require_file(base, "selection.latents_path", *l);
    } else {
        cfg.selection.validate();
    }

    const auto seed = v.integer("train.seed");
    if (!seed) { throw ConfigError("train.seed is mandatory"); }
    if (*seed < 0) { throw ConfigError("train.seed must be non-negative"); }
    cfg.train.seed = static_cast<std::uint64_t>(*seed);
    cfg.train.restarts = static_cast<int>(v.integer("train.restarts", cfg.train.restarts));
    cfg.train.max_iterations = static_cast<int>(v.integer("train.max_iterations", cfg.train.max_iterations));
    cfg.train.tolerance = v.real("train.tolerance", cfg.train.tolerance);
    cfg.train.restart_spread = v.real("train.restart_spread", cfg.train.restart_spread);
    if (cfg.train.restarts < 0 || cfg.train.max_iterations < 0 || !(cfg.train.tolerance > 0.0) ||
        !(cfg.train.restart_spread >= 0.0)) {
        throw ConfigError("train settings out of range");
    }

    const long budget = v.integer("plan.budget", 1);
    if (budget < 0) { throw ConfigError("plan.budget must be non-negative"); }
    cfg.budget = static_cast<std::size_t>(budget);
    cfg.timesteps = v.list<double>("plan.timesteps");

    fs::path out(v.get("output.dir").value_or("run"));
    if (const char *root = std::getenv("NOSTILL_OUTPUT_ROOT"); root != nullptr && *root != '\0') {
        cfg.output_dir = fs::path(root) / (out.is_absolute() ? out.filename() : out);
    } else {
        cfg.output_dir = out.is_absolute() ? out : base / out;
    }

    cfg.echo.assign(v.entries().begin(), v.entries().end());
    return cfg;
}

}  // namespace nostill
