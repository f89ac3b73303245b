#pragma once

#include <filesystem>

#include "pkb/boosting.hpp"

namespace pkb {

/// Writes the model as a versioned, self-describing JSON document. Doubles
/// round-trip losslessly, so save followed by load reproduces the model
/// exactly.
void save_model(const PKBModel& model, const std::filesystem::path& path);

PKBModel load_model(const std::filesystem::path& path);

}  // namespace pkb
