#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nostill/dataset.hpp"
#include "nostill/kernels.hpp"
#include "nostill/optimizer.hpp"
#include "nostill/selection.hpp"

namespace nostill {

/// One experiment, read from an INI file with sections data, split, model,
/// selection, train, plan and output. Relative paths resolve against the
/// config file's directory.
struct ExperimentConfig {
    std::filesystem::path data_path;
    std::optional<std::filesystem::path> test_path;  // replaces the split when set
    ColumnMap columns;
    SplitRule split;

    KernelFamily kernel = KernelFamily::CH1;
    bool ch2_overall_variance = false;
    int spatial_dim_p = 2;  // exponent parameter of CH1/CH2
    bool sparse = false;
    KernelFamily latent_kernel = KernelFamily::ESGP;

    SelectionPlan selection;
    std::optional<std::filesystem::path> latents_path;  // skip selection, read x,y,t from this CSV

    TrainConfig train;
    std::size_t budget = 1;
    std::vector<double> timesteps;  // empty: every test timestep

    std::filesystem::path output_dir;

    /// Effective key/value pairs after overrides, sorted by key.
    std::vector<std::pair<std::string, std::string>> echo;
};

/// Overrides have the form "section.key=value" and replace file values.
/// The output directory is re-rooted under $NOSTILL_OUTPUT_ROOT when set.
/// Throws ConfigError for unknown keys, bad values, a missing seed or an
/// unresolvable input path; IoError when the file itself cannot be read.
ExperimentConfig load_experiment_config(const std::filesystem::path &path,
                                        const std::vector<std::string> &overrides = {});

}  // namespace nostill
