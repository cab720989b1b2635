#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nostill/config.hpp"
#include "nostill/experiment.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<long> seed;
    std::string output;
    bool quiet = false;
};

void add_common(CLI::App &sub, CommonOptions &opts) {
    sub.add_option("-c,--config", opts.config, "Experiment INI file")->required()->check(CLI::ExistingFile);
    sub.add_option("--set", opts.overrides, "Override a config value, section.key=value (repeatable)");
    sub.add_option("--seed", opts.seed, "Override train.seed");
    sub.add_option("-o,--output", opts.output, "Override output.dir");
    sub.add_flag("-q,--quiet", opts.quiet, "Do not echo the log to stderr");
}

int run_with_config(const CommonOptions &opts, int (*command)(const nostill::ExperimentConfig &, nostill::RunLog &)) {
    nostill::RunLog log(opts.quiet ? nullptr : &std::cerr);
    auto overrides = opts.overrides;
    if (opts.seed) { overrides.push_back("train.seed=" + std::to_string(*opts.seed)); }
    if (!opts.output.empty()) { overrides.push_back("output.dir=" + fs::absolute(opts.output).string()); }
    nostill::ExperimentConfig config;
    try {
        config = nostill::load_experiment_config(opts.config, overrides);
    } catch (const std::exception &e) {
        log.line("config", std::string("error: ") + e.what());
        return nostill::exit_code_for(e);
    }
    return command(config, log);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Non-stationary space-time GP training and observation planning"};
    app.require_subcommand(1);

    CommonOptions ingest, select, train, plan, run;
    add_common(*app.add_subcommand("ingest", "Read and split the data; write train.csv and test.csv"), ingest);
    add_common(*app.add_subcommand("select", "Train the stationary model and choose latent locations"), select);
    add_common(*app.add_subcommand("train", "Train the stationary and non-stationary models"), train);
    add_common(*app.add_subcommand("plan", "Plan observations with saved models and compare them"), plan);
    add_common(*app.add_subcommand("run", "Every stage, from data to summary"), run);

    std::vector<std::string> report_dirs;
    std::string report_out = ".";
    bool report_quiet = false;
    auto *report = app.add_subcommand("report", "Collect run directories into plot data");
    report->add_option("runs", report_dirs, "Run directories")->check(CLI::ExistingDirectory);
    report->add_option("-o,--output", report_out, "Directory for the report files");
    report->add_flag("-q,--quiet", report_quiet, "Do not echo the log to stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nostill::kExitConfig;
    }

    const auto chosen = app.get_subcommands().front()->get_name();
    if (chosen == "ingest") { return run_with_config(ingest, nostill::cmd_ingest); }
    if (chosen == "select") { return run_with_config(select, nostill::cmd_select); }
    if (chosen == "train") { return run_with_config(train, nostill::cmd_train); }
    if (chosen == "plan") { return run_with_config(plan, nostill::cmd_plan); }
    if (chosen == "run") { return run_with_config(run, nostill::cmd_run); }

    nostill::RunLog log(report_quiet ? nullptr : &std::cerr);
    std::vector<fs::path> dirs(report_dirs.begin(), report_dirs.end());
    return nostill::cmd_report(dirs, report_out, log);
}
