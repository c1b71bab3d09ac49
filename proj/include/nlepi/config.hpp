#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nlepi/classify.hpp"
#include "nlepi/critical.hpp"

namespace nlepi {

/// All problems found while reading a config, each prefixed by its key path.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

using ConfigValue = std::variant<double, bool, std::string>;

/// Flat "section.key" -> value view of a config file.
struct ConfigDocument {
  std::map<std::string, ConfigValue> values;
  std::map<std::string, int> lines;  // source line of each key, 0 for overrides
  std::filesystem::path base_dir = ".";
};

/// Parses the sectioned key-value text format (see README). Syntax errors are
/// collected and thrown together.
ConfigDocument parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".");
ConfigDocument read_config_file(const std::filesystem::path& path);

/// True for every "section.key" the schema knows.
bool is_known_key(const std::string& path);

/// Sets `path` from its textual form, checking the key and the value type.
void set_override(ConfigDocument& doc, const std::string& path, const std::string& value);

struct OutputSettings {
  std::filesystem::path dir = ".";
  std::string prefix;
  bool profiles = false;
  long profile_every = 10;

  std::filesystem::path file(const std::string& name) const { return dir / (prefix + name); }
};

struct CompareSettings {
  ComparisonParams<double> params;
  double l_min = 0.25, l_max = 8;
  long count = 20;
  bool refine = true;

  std::vector<double> l_grid() const;
};

struct SearchSettings {
  double tol = 1e-3;
  double lo = 0.01, hi = 10;
  double link_factor = 1;
  long retries = 2;
  long max_probes = 200;
};

struct RunConfig {
  ModelParams model;
  GridOptions grid;
  InitialData init;
  double l = 10;  // interval length for eigen, steady, and fixed runs
  FixedControls fixed;
  FreeControls free;
  bool fixed_mode = false;
  bool deterministic = true;
  Thresholds thresholds;
  SearchSettings search;
  CompareSettings compare;
  OutputSettings output;
};

/// Builds and validates a RunConfig; unknown keys and every constraint
/// violation are reported together.
RunConfig build_config(const ConfigDocument& doc);
RunConfig load_config(const std::filesystem::path& path);

KernelFamily kernel_family_from_string(const std::string& s);

}  // namespace nlepi
