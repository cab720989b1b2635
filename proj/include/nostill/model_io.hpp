#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>

#include "nostill/dataset.hpp"
#include "nostill/nostill_model.hpp"
#include "nostill/stationary_model.hpp"

namespace nostill {

inline constexpr int kModelFormatVersion = 1;

/// Contents of a model file. Exactly one of the parameter sets is present.
struct SavedModel {
    std::optional<StationaryParams> stationary;
    std::optional<NostillParams> nostill;
    std::optional<Normalization> normalization;
    std::size_t train_rows = 0;
    std::uint32_t train_checksum = 0;
};

/// Versioned INI file; every real number is written in shortest round-trip form.
void save_model(const StationaryModel &model, const std::filesystem::path &path);
void save_model(const NostillModel &model, const std::filesystem::path &path);

/// Throws IoError when unreadable and DataError when malformed or from
/// another format version.
SavedModel load_model(const std::filesystem::path &path);

/// Rebuilds the trained model on its training data. Throws DataError when
/// the dataset fingerprint differs from the one recorded at save time.
std::unique_ptr<SpaceTimeModel> rebuild_model(const SavedModel &saved, const Dataset &train);

}  // namespace nostill
