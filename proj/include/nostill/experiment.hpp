#pragma once

#include <filesystem>
#include <exception>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "nostill/config.hpp"

namespace nostill {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4 };

/// ConfigError -> 2, IoError and DataError -> 4, anything else -> 3.
int exit_code_for(const std::exception &error);

/// Line-oriented log: every line is "[stage] message". Lines go to an
/// optional echo stream and are kept for run.log.
class RunLog {
public:
    explicit RunLog(std::ostream *echo = nullptr) : echo_(echo) {}

    void line(std::string_view stage, std::string_view message);
    [[nodiscard]] const std::string &text() const { return text_; }

private:
    std::ostream *echo_;
    std::string text_;
};

/// Artifact names inside a run directory.
namespace artifacts {
inline constexpr const char *kManifest = "manifest.json";
inline constexpr const char *kLog = "run.log";
inline constexpr const char *kTrainData = "train.csv";
inline constexpr const char *kTestData = "test.csv";
inline constexpr const char *kStationaryModel = "model_stationary.ini";
inline constexpr const char *kNostillModel = "model_nostill.ini";
inline constexpr const char *kLatents = "latents.csv";
inline constexpr const char *kStationaryTrace = "trace_stationary.csv";
inline constexpr const char *kNostillTrace = "trace_nostill.csv";
inline constexpr const char *kSummary = "summary.csv";
inline constexpr const char *kRmsSeries = "rms_series.csv";
inline constexpr const char *kReportLong = "report_long.csv";
inline constexpr const char *kReportMeanVsM = "report_mean_vs_m.csv";
}  // namespace artifacts

/// Subcommands. Each writes its artifacts plus manifest.json and run.log
/// into config.output_dir and returns an exit code; failures leave a
/// manifest naming the failed stage.
///
/// ingest: train.csv and test.csv after the split (raw values).
/// select: stationary model and latents.csv.
/// train:  both models and latents.csv.
/// plan:   reloads both models from the output directory, then traces,
///         summary.csv and rms_series.csv.
/// run:    every stage in one process, starting from an empty manifest.
int cmd_ingest(const ExperimentConfig &config, RunLog &log);
int cmd_select(const ExperimentConfig &config, RunLog &log);
int cmd_train(const ExperimentConfig &config, RunLog &log);
int cmd_plan(const ExperimentConfig &config, RunLog &log);
int cmd_run(const ExperimentConfig &config, RunLog &log);

/// Collects finished run directories into report_long.csv
/// (model_label, m, timestep, rms, mismatch) and report_mean_vs_m.csv
/// (m, model_label, mean_rms, stationary_mean_rms, mismatch; one row per
/// run). mismatch is 1 on every row when the runs were evaluated on
/// different test data or budgets.
int cmd_report(const std::vector<std::filesystem::path> &run_dirs, const std::filesystem::path &output_dir,
               RunLog &log);

}  // namespace nostill
