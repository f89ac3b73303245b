#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "pkb/types.hpp"

namespace pkb {

/// Formats a double with 17 significant digits (lossless round-trip).
std::string format_double(double value);

/// Loads an expression CSV. With samples_as_rows the first row holds gene ids
/// and the first column sample ids; otherwise the layout is transposed on
/// load. A file without an id column gets synthesized sample ids s1..sN.
/// Set allow_empty for prediction inputs that may carry zero samples.
ExpressionDataset load_expression_csv(const std::filesystem::path& path,
                                      bool samples_as_rows = true,
                                      bool allow_empty = false);

void write_expression_csv(const ExpressionDataset& dataset, const std::filesystem::path& path);

/// Loads a GMT gene-set file and maps symbols to dataset columns. Symbols
/// absent from the dataset are dropped; pathways left empty are omitted and
/// counted in *n_dropped when provided.
PathwayCollection load_gmt(const std::filesystem::path& path,
                           const ExpressionDataset& dataset,
                           std::size_t* n_dropped = nullptr);

void write_gmt(const PathwayCollection& pathways,
               const ExpressionDataset& dataset,
               const std::filesystem::path& path);

/// Loads sample_id,label rows (header optional), accepting labels in {1,-1}
/// or {0,1} with 0 mapped to -1, reordered to the dataset's sample order.
LabelVector load_labels(const std::filesystem::path& path, const ExpressionDataset& dataset);

void write_labels(const LabelVector& labels,
                  const ExpressionDataset& dataset,
                  const std::filesystem::path& path);

}  // namespace pkb
