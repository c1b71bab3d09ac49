#include "nlepi/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace nlepi {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto out = open_for_write(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_for_write(path);
  out << j.dump(2) << '\n';
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const EigenResult<double>& r) {
  return {{"lambda_p", r.lambda_p}, {"residual", r.residual}, {"iterations", r.iterations},
          {"lower", r.lower},       {"upper", r.upper},       {"n", r.phi1.size()}};
}

json to_json(const CriticalLengthResult& r) {
  json samples = json::array();
  for (const auto& [l, v] : r.samples) samples.push_back({l, v});
  return {{"l_star", r.l_star}, {"bracket", {r.l_lo, r.l_hi}}, {"lambda_at_bracket", {r.lambda_lo, r.lambda_hi}},
          {"tol", r.tol},       {"samples", samples}};
}

json to_json(const ComparisonReport& r) {
  json curves = json::array();
  for (const auto& c : r.curves) {
    json j = {{"name", c.name},
              {"l_star", c.l_star ? json(*c.l_star) : json(nullptr)},
              {"l_star_refined", c.l_star_refined ? json(*c.l_star_refined) : json(nullptr)}};
    if (!c.note.empty()) j["note"] = c.note;
    curves.push_back(j);
  }
  return {{"params",
           {{"d1", r.params.d1}, {"d2", r.params.d2}, {"a", r.params.a}, {"b", r.params.b}, {"c", r.params.c},
            {"g0", r.params.g0}}},
          {"curves", curves},
          {"pointwise_lambda1_gt_lambda2", r.pointwise_12},
          {"pointwise_lambda3_gt_lambda4_gt_lambdap", r.pointwise_34p},
          {"L1_lt_L2", r.chain_12},
          {"L3_lt_L4_lt_L", r.chain_34p},
          {"max_closed_vs_matrix", r.max_closed_vs_matrix},
          {"quadrature_budget", r.quadrature_budget}};
}

json to_json(const RunOutcome& r) {
  return {{"verdict", to_string(r.verdict)},   {"l_star", number_or_null(r.l_star)},
          {"max_width", r.max_width},          {"final_width", r.final_width},
          {"final_sup", r.final_sup},          {"final_t", r.final_t},
          {"decay_rate", number_or_null(r.decay_rate)}, {"probe_error", number_or_null(r.probe_error)}};
}

json to_json(const FreeDiagnostics& d) {
  return {{"steps", d.steps},         {"K1", d.K1},
          {"K2", d.K2},               {"min_u", number_or_null(d.min_u)},
          {"min_v", number_or_null(d.min_v)}, {"max_u", d.max_u},
          {"max_v", d.max_v},         {"fronts_strict", d.fronts_strict},
          {"max_asymmetry", d.max_asymmetry}, {"min_step", number_or_null(d.min_step)}};
}

json to_json(const ThresholdResult& r) {
  json audit = json::array();
  for (const auto& p : r.audit)
    audit.push_back({{"parameter", p.parameter},
                     {"verdict", to_string(p.verdict)},
                     {"max_width", p.max_width},
                     {"final_sup", p.final_sup},
                     {"final_t", p.final_t},
                     {"T_max", p.T_max}});
  json j = {{"value", r.value}, {"bracket", {r.lo, r.hi}}, {"tol", r.tol}, {"converged", r.converged},
            {"audit_monotone", audit_monotone(r.audit)}, {"audit", audit}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json to_json(const DStarResult& r) {
  json audit = json::array();
  for (const auto& [d, l] : r.audit) audit.push_back({{"d1", d}, {"lambda_p", l}});
  json j = {{"applicable", r.applicable}, {"zero_diffusion_critical_length", r.l_tilde_star}};
  if (r.applicable) {
    j["value"] = r.value;
    j["bracket"] = {r.lo, r.hi};
    j["tol"] = r.tol;
    j["audit"] = audit;
  } else {
    j["explanation"] = r.explanation;
  }
  return j;
}

void write_timeseries(const std::filesystem::path& path, const Trajectory& traj) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : traj.samples) rows.push_back({s.t, s.g, s.h, s.sup_u, s.sup_v, s.mass_u, s.mass_v});
  write_csv(path, {"t", "g", "h", "sup_u", "sup_v", "mass_u", "mass_v"}, rows);
}

void write_profiles(const std::filesystem::path& path, const Trajectory& traj) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : traj.profiles)
    for (std::size_t i = 0; i < s.x.size(); ++i) rows.push_back({s.t, s.x[i], s.u[i], s.v[i]});
  write_csv(path, {"t", "x", "u", "v"}, rows);
}

}  // namespace nlepi
