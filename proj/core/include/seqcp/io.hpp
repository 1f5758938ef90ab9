#pragma once

// Dataset CSV: a header row `y,x1,...,xd[,weight]` followed by one row per
// observation. Floats are written in shortest round-trip form, lines end in LF.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqcp/core.hpp"

namespace seqcp {

struct CsvReadOptions {
  // Rows are sorted by this column in descending order (stable) and the
  // column is dropped from the covariates.
  std::optional<std::string> sort_by_column;
};

struct CsvDataset {
  DataSequence data;
  std::vector<std::string> covariate_names;
  bool has_weight = false;
};

// Throws ParseError naming the 1-based line on malformed input.
CsvDataset read_dataset_csv(std::istream& in, const CsvReadOptions& opts = {});
CsvDataset read_dataset_csv(const std::filesystem::path& path, const CsvReadOptions& opts = {});

// Covariate names default to x1..xd. Weights are written only when non-unit.
void write_dataset_csv(std::ostream& out, const DataSequence& data,
                       const std::vector<std::string>& covariate_names = {});
void write_dataset_csv(const std::filesystem::path& path, const DataSequence& data,
                       const std::vector<std::string>& covariate_names = {});

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace seqcp
