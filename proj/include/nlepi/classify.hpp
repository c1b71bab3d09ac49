#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlepi/dynamics.hpp"

namespace nlepi {

enum class Verdict { Spreading, Vanishing, Undecided };

const char* to_string(Verdict v);

struct Thresholds {
  double margin = 0.05;      // spreading needs width > L* (1 + margin)
  double eps_v = 1e-8;       // vanishing needs final sup-norm below this
  double probe_fraction = 0.1;  // tail of the run used for the probe error
};

struct RunOutcome {
  Verdict verdict = Verdict::Undecided;
  double l_star = std::numeric_limits<double>::infinity();
  double max_width = 0;
  double final_width = 0;
  double final_sup = 0;
  double final_t = 0;
  double decay_rate = std::numeric_limits<double>::quiet_NaN();
  /// Max deviation from (u*, v*) on [-h0, h0] over the final part of the run.
  double probe_error = std::numeric_limits<double>::quiet_NaN();
};

/// Classifies a completed trajectory against the critical length `l_star`
/// (infinite when no critical length exists).
RunOutcome classify_run(const Trajectory& traj, double l_star, const Thresholds& th = {});

/// L* of the model, or +infinity when lambda_A <= 0.
double critical_length_or_inf(const ModelParams& p, const GridOptions& grid = {});

struct ClassifiedRun {
  RunOutcome outcome;
  FreeRun run;
  WidthBounds width_bounds;
};

/// Runs the free-boundary problem with stop rules derived from L* and
/// `th`, then classifies. `l_star` may be passed to skip recomputing it.
ClassifiedRun classify(const ModelParams& p, const InitialData& init, FreeControls controls,
                       const Thresholds& th = {}, std::optional<double> l_star = std::nullopt);

struct Probe {
  double parameter = 0;
  Verdict verdict = Verdict::Undecided;
  double max_width = 0;
  double final_sup = 0;
  double final_t = 0;
  double T_max = 0;
};

struct ThresholdResult {
  double value = 0;
  double lo = 0, hi = 0;
  double tol = 0;
  bool converged = false;
  std::string note;
  std::vector<Probe> audit;
};

/// Link between two parameters: y = factor * x (identity for factor 1).
struct Link {
  double factor = 1;
  double operator()(double x) const { return factor * x; }
};

struct SearchOptions {
  double tol = 1e-3;  // relative bracket width at exit
  int undecided_retries = 2;  // each retry doubles T_max
  long max_probes = 200;
  Thresholds thresholds;
  FreeControls controls;
};

/// True when sorting the audit by parameter never puts a Vanishing probe
/// above a Spreading one. Undecided probes are ignored.
bool audit_monotone(const std::vector<Probe>& audit);

/// Threshold amplitude tau* for u0 = tau theta1, v0 = tau theta2. Needs
/// Gaussian J11 and J22 and 2 h0 < L*.
ThresholdResult find_tau_star(const ModelParams& p, const InitialData& init, double lo, double hi,
                              const SearchOptions& opts = {});

/// Threshold mu1* with mu2 = link(mu1). Needs 2 h0 < L*.
ThresholdResult find_mu_star(const ModelParams& p, const InitialData& init, const Link& link, double lo,
                             double hi, const SearchOptions& opts = {});

struct DStarResult {
  bool applicable = false;
  std::string explanation;
  double l_tilde_star = 0;
  double value = 0;
  double lo = 0, hi = 0;  // lambda_p(-h0, h0) >= 0 at lo, < 0 at hi
  double tol = 0;
  std::vector<std::pair<double, double>> audit;  // (d1, lambda_p)
};

/// Threshold d1* with d2 = link(d1): lambda_p(-h0, h0) >= 0, hence spreading,
/// for d1 <= d1*. Needs c = G'(0) and J12 = J21.
DStarResult find_d_star(const ModelParams& p, double h0, const Link& link, double tol = 1e-3,
                        const GridOptions& grid = {});

}  // namespace nlepi
