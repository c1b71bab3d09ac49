#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nlepi/config.hpp"

namespace nlepi {

struct SweepAxis {
  std::string path;
  std::vector<std::string> values;
};

/// Parses "section.key=v1,v2,...".
SweepAxis parse_axis(const std::string& spec);

struct SweepSpec {
  ConfigDocument base;
  std::vector<SweepAxis> axes;
  std::filesystem::path out;
  std::size_t max_cells = 10000;
  unsigned workers = 0;  // 0: NLEPI_WORKERS from the environment, else 1
};

struct SweepRow {
  std::size_t index = 0;
  std::string key;  // canonical "path=value;path=value"
  std::vector<std::string> values;
  RunOutcome outcome;
  std::string error;  // empty on success
};

struct SweepTable {
  std::vector<std::string> header;
  std::vector<SweepRow> rows;
  std::size_t computed = 0;
  std::size_t reused = 0;
};

/// Worker count from NLEPI_WORKERS (default 1).
unsigned sweep_workers_from_env();

/// Runs one classify per cell of the cross product. Rows already present in
/// `spec.out` without an error are reused; the file is rewritten in cell
/// order at the end.
SweepTable run_sweep(const SweepSpec& spec);

}  // namespace nlepi
