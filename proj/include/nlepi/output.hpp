#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlepi/classify.hpp"
#include "nlepi/critical.hpp"
#include "nlepi/equilibrium.hpp"

namespace nlepi {

using json = nlohmann::ordered_json;

/// Round-trip decimal form used in every CSV ("%.17g"; nan and inf spelled out).
std::string format_number(double v);

/// Writes a CSV file with a header row; creates parent directories.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_json(const std::filesystem::path& path, const json& j);

/// NaN and infinities become null.
json number_or_null(double v);

json to_json(const EigenResult<double>& r);
json to_json(const CriticalLengthResult& r);
json to_json(const ComparisonReport& r);
json to_json(const RunOutcome& r);
json to_json(const FreeDiagnostics& d);
json to_json(const ThresholdResult& r);
json to_json(const DStarResult& r);

/// Timeseries rows (t, g, h, sup_u, sup_v, mass_u, mass_v).
void write_timeseries(const std::filesystem::path& path, const Trajectory& traj);
/// Profile rows (t, x, u, v), one per node per snapshot.
void write_profiles(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace nlepi
