#include "nostill/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include <boost/crc.hpp>
#include <json.hpp>

#include "nostill/model_io.hpp"
#include "nostill/numeric_text.hpp"
#include "nostill/planner.hpp"
#include "nostill/stationary_model.hpp"

#ifndef NOSTILL_VERSION
#define NOSTILL_VERSION "unknown"
#endif

namespace nostill {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw IoError("cannot read " + path.string()); }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) { throw IoError("cannot write " + path.string()); }
    out << text;
    if (!out) { throw IoError("write failed for " + path.string()); }
}

std::string file_crc(const fs::path &path) {
    const auto bytes = read_file(path);
    boost::crc_32_type crc;
    crc.process_bytes(bytes.data(), bytes.size());
    std::ostringstream s;
    s << std::hex;
    s.width(8);
    s.fill('0');
    s << crc.checksum();
    return s.str();
}

/// Records what a command did. Existing entries are kept when `fresh` is
/// false so that successive subcommands in one directory stay listed.
class Manifest {
public:
    Manifest(const ExperimentConfig &config, std::string command, bool fresh)
        : dir_(config.output_dir), command_(std::move(command)) {
        doc_ = json::object();
        const auto path = dir_ / artifacts::kManifest;
        if (!fresh && fs::exists(path)) {
            try {
                const auto old = json::parse(read_file(path));
                if (old.contains("artifacts")) {
                    for (const auto &[name, entry] : old["artifacts"].items()) {
                        if (fs::exists(dir_ / name)) { doc_["artifacts"][name] = entry; }
                    }
                }
                for (const char *key : {"latent_count", "test_fingerprint", "budget"}) {
                    if (old.contains(key)) { doc_[key] = old[key]; }
                }
            } catch (const json::exception &) {
                // unreadable manifest from an earlier run: start over
            }
        }
        if (!doc_.contains("artifacts")) { doc_["artifacts"] = json::object(); }
        doc_["tool"] = "nostill";
        doc_["version"] = NOSTILL_VERSION;
        doc_["command"] = command_;
        doc_["seed"] = config.train.seed;
        json echo = json::object();
        for (const auto &[k, v] : config.echo) { echo[k] = v; }
        doc_["config"] = echo;
        doc_["stages"] = json::array();
        doc_["status"] = "running";
    }

    void stage_done(const std::string &stage) { doc_["stages"].push_back(stage); }

    void artifact(const std::string &name, const std::string &stage) {
        doc_["artifacts"][name] = {{"stage", stage}, {"crc32", file_crc(dir_ / name)}};
    }

    void set(const std::string &key, json value) { doc_[key] = std::move(value); }

    void finish(const std::string &failed_stage, const std::string &error, int code) {
        if (failed_stage.empty()) {
            doc_["status"] = "ok";
            doc_.erase("failed_stage");
            doc_.erase("error");
        } else {
            doc_["status"] = "failed";
            doc_["failed_stage"] = failed_stage;
            doc_["error"] = error;
        }
        doc_["exit_code"] = code;
        doc_["log"] = artifacts::kLog;
        write_file(dir_ / artifacts::kManifest, doc_.dump(2) + "\n");
    }

private:
    fs::path dir_;
    std::string command_;
    json doc_;
};

void log_optimization(RunLog &log, std::string_view stage, const OptimizationResult &opt) {
    for (const auto &e : opt.log) {
        log.line(stage, "restart " + std::to_string(e.restart) + " iter " + std::to_string(e.iteration) + " lml " +
                            format_double(e.objective));
    }
    log.line(stage, "best restart " + std::to_string(opt.best_restart) + " lml " + format_double(opt.value));
}

std::string describe(const KernelSpec &k) {
    std::string s = to_string(k.family) + " sigma_f " + format_double(k.sigma_f) + " length_scales";
    for (double l : k.length_scales) { s += " " + format_double(l); }
    return s;
}

std::string nostill_label(const ExperimentConfig &config) {
    return config.latents_path ? std::string("NS-file") : "NS-" + to_string(config.selection.method);
}

/// Runs the requested stages, sharing intermediate results.
class Pipeline {
public:
    Pipeline(const ExperimentConfig &config, RunLog &log, std::string command, bool fresh)
        : config_(config), log_(log), command_(command) {
        fs::create_directories(config.output_dir);
        manifest_.emplace(config, std::move(command), fresh);
    }

    int execute(const std::vector<std::pair<std::string, std::function<void()>>> &stages) {
        for (const auto &[name, body] : stages) {
            current_ = name;
            try {
                log_.line(name, "start");
                body();
                manifest_->stage_done(name);
            } catch (const std::exception &e) {
                const int code = exit_code_for(e);
                log_.line(name, std::string("error: ") + e.what());
                close(name, e.what(), code);
                return code;
            }
        }
        close("", "", kExitOk);
        return kExitOk;
    }

    void ingest() {
        const auto all = ingest_csv(config_.data_path, config_.columns);
        log_.line(current_, "read " + std::to_string(all.size()) + " rows from " + config_.data_path.filename().string());
        if (config_.test_path) {
            train_raw_ = all;
            test_ = ingest_csv(*config_.test_path, config_.columns);
            log_.line(current_, "read " + std::to_string(test_->size()) + " test rows from " +
                                    config_.test_path->filename().string());
        } else {
            auto [tr, te] = split_train_test(all, config_.split);
            train_raw_ = std::move(tr);
            test_ = std::move(te);
        }
        train_ = normalize(*train_raw_);
        log_.line(current_, "train " + std::to_string(train_->size()) + " rows, test " + std::to_string(test_->size()) +
                                " rows, normalization mean " + format_double(train_->normalization()->mean) +
                                " stddev " + format_double(train_->normalization()->stddev));
    }

    void export_split() {
        export_csv(*train_raw_, out(artifacts::kTrainData), config_.columns);
        export_csv(*test_, out(artifacts::kTestData), config_.columns);
        manifest_->artifact(artifacts::kTrainData, current_);
        manifest_->artifact(artifacts::kTestData, current_);
    }

    void train_stationary_model() {
        auto fit = train_stationary(*train_, config_.kernel, config_.train, config_.ch2_overall_variance,
                                    config_.spatial_dim_p);
        log_optimization(log_, current_, fit.optimization);
        log_.line(current_, describe(fit.model.params().kernel) + " noise_var " +
                                format_double(fit.model.params().noise_var));
        stationary_.emplace(std::move(fit.model));
        save_model(*stationary_, out(artifacts::kStationaryModel));
        manifest_->artifact(artifacts::kStationaryModel, current_);
    }

    void select() {
        if (config_.latents_path) {
            latents_ = import_latents_csv(*config_.latents_path);
            log_.line(current_, "read " + std::to_string(latents_.size()) + " latent locations from " +
                                    config_.latents_path->filename().string());
        } else {
            latents_ = select_latents(*train_, config_.selection, &stationary_->params(), config_.train);
            log_.line(current_, to_string(config_.selection.method) + " chose " + std::to_string(latents_.size()) +
                                    " latent locations");
        }
        export_latents_csv(latents_, out(artifacts::kLatents));
        manifest_->artifact(artifacts::kLatents, current_);
        manifest_->set("latent_count", latents_.size());
    }

    void train_nostill_model() {
        NostillOptions options;
        options.base_family = config_.kernel;
        options.sparse = config_.sparse;
        options.ch2_overall_variance = config_.ch2_overall_variance;
        options.spatial_dim_p = config_.spatial_dim_p;
        options.latent_family = config_.latent_kernel;
        auto fit = train_nostill(*train_, latents_, options, config_.train);
        log_optimization(log_, current_, fit.optimization);
        const auto &p = fit.model.params();
        log_.line(current_, to_string(p.base_family) + " sigma_f " + format_double(p.sigma_f) + " noise_var " +
                                format_double(p.noise_var) + " m " + std::to_string(p.latent_count()));
        nostill_.emplace(std::move(fit.model));
        save_model(*nostill_, out(artifacts::kNostillModel));
        manifest_->artifact(artifacts::kNostillModel, current_);
    }

    void load_models() {
        const auto s = load_model(out(artifacts::kStationaryModel));
        const auto n = load_model(out(artifacts::kNostillModel));
        if (!s.stationary || !n.nostill) { throw DataError("model files in the output directory have the wrong kind"); }
        stationary_.emplace(*s.stationary, *train_);
        nostill_.emplace(*n.nostill, *train_);
        for (const auto *saved : {&s, &n}) {
            if (saved->train_rows != train_->size() || saved->train_checksum != train_->checksum()) {
                throw DataError("saved models were trained on different data than this config selects");
            }
        }
        manifest_->set("latent_count", n.nostill->latent_count());
        log_.line(current_, "loaded both models");
    }

    void plan() {
        const auto s = plan_and_evaluate(*stationary_, *test_, config_.budget, config_.timesteps);
        const auto n = plan_and_evaluate(*nostill_, *test_, config_.budget, config_.timesteps);
        write_trace_csv(s, out(artifacts::kStationaryTrace));
        write_trace_csv(n, out(artifacts::kNostillTrace));
        manifest_->artifact(artifacts::kStationaryTrace, current_);
        manifest_->artifact(artifacts::kNostillTrace, current_);
        for (std::size_t k = 0; k < n.steps.size(); ++k) {
            log_.line(current_, "t " + format_double(n.steps[k].timestep) + " S rms " + format_double(s.steps[k].rms) +
                                    " NS rms " + format_double(n.steps[k].rms));
        }
        traces_ = {{"S", s}, {nostill_label(config_), n}};
        manifest_->set("test_fingerprint", n.test_fingerprint);
        manifest_->set("budget", config_.budget);
    }

    void compare() {
        const auto table = compare_models(traces_);
        write_summary_csv(table, out(artifacts::kSummary));
        write_rms_series_csv(table, out(artifacts::kRmsSeries));
        manifest_->artifact(artifacts::kSummary, current_);
        manifest_->artifact(artifacts::kRmsSeries, current_);
        for (const auto &row : table.rows) { log_.line(current_, row.label + " mean rms " + format_double(row.mean_rms)); }
    }

private:
    fs::path out(const char *name) const { return config_.output_dir / name; }

    void close(const std::string &stage, const std::string &error, int code) {
        try {
            write_file(out(artifacts::kLog), log_.text());
            manifest_->finish(stage, error, code);
        } catch (const std::exception &e) {
            log_.line(command_, std::string("could not write manifest: ") + e.what());
        }
    }

    const ExperimentConfig &config_;
    RunLog &log_;
    std::string command_;
    std::string current_;
    std::optional<Manifest> manifest_;
    std::optional<Dataset> train_raw_, train_, test_;
    std::optional<StationaryModel> stationary_;
    std::optional<NostillModel> nostill_;
    std::vector<SpaceTimePoint> latents_;
    std::vector<std::pair<std::string, PlanningTrace>> traces_;
};

int guarded(const std::string &command, RunLog &log, const std::function<int()> &body) {
    try {
        return body();
    } catch (const std::exception &e) {
        log.line(command, std::string("error: ") + e.what());
        return exit_code_for(e);
    }
}

// ---- report ----

struct RunSummary {
    fs::path dir;
    std::size_t m = 0;
    std::string fingerprint;
    std::string budget;
    std::vector<std::pair<std::string, double>> means;                             // label, mean rms
    std::vector<std::tuple<std::string, std::string, std::string>> series;  // label, timestep, rms text
};

std::vector<std::vector<std::string>> read_csv_rows(const fs::path &path, const std::string &header,
                                                    std::size_t columns) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw DataError(path.string() + ": expected header " + header);
    }
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::vector<std::string> fields;
        std::istringstream cells(line);
        std::string f;
        while (std::getline(cells, f, ',')) { fields.push_back(f); }
        if (fields.size() != columns) {
            throw DataError(path.string() + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields");
        }
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) { throw DataError(path.string() + ": no rows"); }
    return rows;
}

double parse_finite(const std::string &text, const fs::path &path) {
    const auto v = parse_double(text);
    if (!v || !std::isfinite(*v)) { throw DataError(path.string() + ": bad number '" + text + "'"); }
    return *v;
}

RunSummary read_run(const fs::path &dir) {
    RunSummary run;
    run.dir = dir;
    const auto manifest_path = dir / artifacts::kManifest;
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception &e) {
        throw DataError(manifest_path.string() + ": " + e.what());
    }
    if (manifest.value("status", "") != "ok" || !manifest.contains("latent_count") ||
        !manifest.contains("test_fingerprint")) {
        throw DataError(dir.string() + " does not hold a completed run");
    }
    run.m = manifest["latent_count"].get<std::size_t>();
    run.fingerprint = manifest["test_fingerprint"].get<std::string>();
    run.budget = manifest.contains("budget") ? manifest["budget"].dump() : "";

    const auto summary = dir / artifacts::kSummary;
    for (const auto &row : read_csv_rows(summary, "model_label,mean_rms", 2)) {
        run.means.emplace_back(row[0], parse_finite(row[1], summary));
    }
    const auto series = dir / artifacts::kRmsSeries;
    for (const auto &row : read_csv_rows(series, "model_label,timestep,rms", 3)) {
        parse_finite(row[1], series);
        parse_finite(row[2], series);
        run.series.emplace_back(row[0], row[1], row[2]);
    }
    return run;
}

}  // namespace

int exit_code_for(const std::exception &error) {
    if (dynamic_cast<const ConfigError *>(&error) != nullptr) { return kExitConfig; }
    if (dynamic_cast<const IoError *>(&error) != nullptr || dynamic_cast<const DataError *>(&error) != nullptr) {
        return kExitIo;
    }
    return kExitNumerical;
}

void RunLog::line(std::string_view stage, std::string_view message) {
    std::string l;
    l.reserve(stage.size() + message.size() + 4);
    l += '[';
    l += stage;
    l += "] ";
    l += message;
    l += '\n';
    if (echo_ != nullptr) { *echo_ << l << std::flush; }
    text_ += l;
}

int cmd_ingest(const ExperimentConfig &config, RunLog &log) {
    return guarded("ingest", log, [&] {
        Pipeline p(config, log, "ingest", false);
        return p.execute({{"ingest", [&] { p.ingest(); }}, {"export", [&] { p.export_split(); }}});
    });
}

int cmd_select(const ExperimentConfig &config, RunLog &log) {
    return guarded("select", log, [&] {
        Pipeline p(config, log, "select", false);
        return p.execute({{"ingest", [&] { p.ingest(); }},
                          {"train-stationary", [&] { p.train_stationary_model(); }},
                          {"select", [&] { p.select(); }}});
    });
}

int cmd_train(const ExperimentConfig &config, RunLog &log) {
    return guarded("train", log, [&] {
        Pipeline p(config, log, "train", false);
        return p.execute({{"ingest", [&] { p.ingest(); }},
                          {"train-stationary", [&] { p.train_stationary_model(); }},
                          {"select", [&] { p.select(); }},
                          {"train-nostill", [&] { p.train_nostill_model(); }}});
    });
}

int cmd_plan(const ExperimentConfig &config, RunLog &log) {
    return guarded("plan", log, [&] {
        Pipeline p(config, log, "plan", false);
        return p.execute({{"ingest", [&] { p.ingest(); }},
                          {"load", [&] { p.load_models(); }},
                          {"plan", [&] { p.plan(); }},
                          {"compare", [&] { p.compare(); }}});
    });
}

int cmd_run(const ExperimentConfig &config, RunLog &log) {
    return guarded("run", log, [&] {
        Pipeline p(config, log, "run", true);
        return p.execute({{"ingest", [&] { p.ingest(); }},
                          {"export", [&] { p.export_split(); }},
                          {"train-stationary", [&] { p.train_stationary_model(); }},
                          {"select", [&] { p.select(); }},
                          {"train-nostill", [&] { p.train_nostill_model(); }},
                          {"plan", [&] { p.plan(); }},
                          {"compare", [&] { p.compare(); }}});
    });
}

int cmd_report(const std::vector<fs::path> &run_dirs, const fs::path &output_dir, RunLog &log) {
    return guarded("report", log, [&] {
        if (run_dirs.empty()) { throw ConfigError("report needs at least one run directory"); }
        std::vector<RunSummary> runs;
        for (const auto &d : run_dirs) {
            runs.push_back(read_run(d));
            log.line("report", "read " + d.string() + " (m " + std::to_string(runs.back().m) + ")");
        }
        std::stable_sort(runs.begin(), runs.end(), [](const auto &a, const auto &b) { return a.m < b.m; });
        const bool mismatch = std::any_of(runs.begin(), runs.end(), [&](const RunSummary &r) {
            return r.fingerprint != runs.front().fingerprint || r.budget != runs.front().budget;
        });
        if (mismatch) { log.line("report", "warning: runs were evaluated on different test data or budgets"); }
        const std::string flag = mismatch ? "1" : "0";

        std::string long_csv = "model_label,m,timestep,rms,mismatch\n";
        std::string mean_csv = "m,model_label,mean_rms,stationary_mean_rms,mismatch\n";
        for (const auto &run : runs) {
            const auto m = std::to_string(run.m);
            for (const auto &[label, t, rms] : run.series) { long_csv += label + "," + m + "," + t + "," + rms + "," + flag + "\n"; }
            std::optional<double> stationary;
            const std::pair<std::string, double> *ns = nullptr;
            for (const auto &entry : run.means) {
                if (entry.first == "S") {
                    stationary = entry.second;
                } else if (ns == nullptr) {
                    ns = &entry;
                }
            }
            if (ns == nullptr) { throw DataError(run.dir.string() + ": summary has no non-stationary row"); }
            mean_csv += m + "," + ns->first + "," + format_double(ns->second) + "," +
                        (stationary ? format_double(*stationary) : std::string()) + "," + flag + "\n";
        }
        fs::create_directories(output_dir);
        write_file(output_dir / artifacts::kReportLong, long_csv);
        write_file(output_dir / artifacts::kReportMeanVsM, mean_csv);
        log.line("report", "wrote " + std::to_string(runs.size()) + " runs");
        return kExitOk;
    });
}

}  // namespace nostill
