#pragma once

#include <limits>
#include <string>
#include <vector>

#include "nlepi/equilibrium.hpp"
#include "nlepi/model.hpp"

namespace nlepi {

enum class ProfileFamily { Cosine, Parabola };

const char* to_string(ProfileFamily f);

/// theta(x) on [-h0, h0]: cos(pi x / (2 h0)) or 1 - (x / h0)^2; zero outside.
double initial_profile(ProfileFamily f, double h0, double x);

/// u0 = tau * scale1 * theta1, v0 = tau * scale2 * theta2 on [-h0, h0].
struct InitialData {
  double h0 = 1;
  double tau = 1;
  ProfileFamily profile1 = ProfileFamily::Cosine;
  ProfileFamily profile2 = ProfileFamily::Cosine;
  double scale1 = 1;
  double scale2 = 1;

  double u0(double x) const { return tau * scale1 * initial_profile(profile1, h0, x); }
  double v0(double x) const { return tau * scale2 * initial_profile(profile2, h0, x); }
};

struct Sample {
  double t = 0;
  double g = 0, h = 0;
  double sup_u = 0, sup_v = 0;
  double mass_u = 0, mass_v = 0;
  /// max |u - u*|, |v - v*| over the probe window; NaN when not tracked.
  double probe_error = std::numeric_limits<double>::quiet_NaN();
};

/// Node values at one time; `w` holds the quadrature weights of the nodes,
/// including the fractional end cells of a free-boundary run.
struct Snapshot {
  double t = 0;
  double g = 0, h = 0;
  std::vector<double> x, w, u, v;
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<Snapshot> profiles;
  double dt = 0;
  double dx = 0;
};

/// Stability bound on dt for the explicit scheme.
double max_stable_dt(const ModelParams& p);
/// 0.1 / max(d1 + a, d2 + b).
double default_dt(const ModelParams& p);

struct FixedControls {
  double T = 100;
  double dt = 0;  // 0 selects default_dt
  double sample_interval = 0.1;
  bool record_profiles = false;
};

struct FixedRun {
  Trajectory trajectory;
  Grid<double> grid;
  Eigen::VectorXd u, v;  // final values
};

/// Explicit Euler for the problem on the fixed interval [l1, l2] with initial
/// node values u0, v0 on model_grid(p, l1, l2, grid).
FixedRun evolve_fixed(const ModelParams& p, const Grid<double>& grid, const Eigen::VectorXd& u0,
                      const Eigen::VectorXd& v0, const FixedControls& controls = {});

/// Least-squares slope of -log(max(sup_u, sup_v)) over samples with
/// t in [t0, t1]. Throws NumericalError if the sup-norm increases anywhere in
/// the window.
double decay_rate_estimate(const Trajectory& traj, double t0, double t1);

/// State of a free-boundary run: nodes k_lo .. k_lo + u.size() - 1 of the
/// lattice x_k = k dx, all strictly inside (g, h); u = v = 0 at the fronts.
struct FreeBoundaryState {
  double t = 0;
  double g = 0, h = 0;
  double dx = 0;
  long k_lo = 0;
  std::vector<double> u, v;

  double node(std::size_t i) const { return static_cast<double>(k_lo + static_cast<long>(i)) * dx; }
  /// Trapezoid weights on g, x_first, ..., x_last, h with the front values
  /// dropped (they are zero).
  std::vector<double> weights() const;
};

struct FrontRates {
  double g_rate = 0;
  double h_rate = 0;
};

FrontRates boundary_flux(const FreeBoundaryState& s, const ModelParams& p);

struct StopRules {
  bool spread = true;
  double l_star = std::numeric_limits<double>::infinity();
  double margin = 0.05;
  bool vanish = true;
  double eps_v = 1e-8;
};

struct FreeControls {
  double T_max = 500;
  double dt = 0;  // 0 selects default_dt
  double dx = 0;  // 0 selects min(sigma / 20, 2 h0 / 40)
  double sample_interval = 0.1;
  bool record_profiles = false;
  long profile_every = 1;  // keep every n-th sample as a snapshot
  StopRules stop;
  bool track_probe = true;  // record deviation from (u*, v*) on [-h0, h0]
};

enum class StopReason { TimeLimit, Spread, Vanish };

const char* to_string(StopReason r);

/// Invariant bookkeeping for a free-boundary run.
struct FreeDiagnostics {
  long steps = 0;
  double K1 = 0, K2 = 0;
  double min_u = std::numeric_limits<double>::infinity();  // over active nodes after every step
  double min_v = std::numeric_limits<double>::infinity();
  double max_u = 0, max_v = 0;
  bool fronts_strict = true;  // h increased and g decreased at every step
  double max_asymmetry = 0;   // max |g + h|
  double min_step = std::numeric_limits<double>::infinity();
};

struct FreeRun {
  Trajectory trajectory;
  FreeBoundaryState final_state;
  FreeDiagnostics diagnostics;
  StopReason reason = StopReason::TimeLimit;
  double max_width = 0;
};

/// Upper bounds (K1, K2) for the solution with the given initial data.
std::pair<double, double> solution_bounds(const ModelParams& p, double sup_u0, double sup_v0);

/// Explicit front-tracking scheme. Throws NumericalError when an invariant
/// breaks (negative values, bound overshoot).
FreeRun evolve_free(const ModelParams& p, const InitialData& init, const FreeControls& controls = {});

struct MassBalance {
  double max_defect = 0;
  double bound = 0;        // 10 (dt + dx^2) max mass
  double max_sign = -std::numeric_limits<double>::infinity();  // reaction combination with (c/b) G
  double max_sign_literal = -std::numeric_limits<double>::infinity();  // same with G
  std::vector<double> defects;
};

/// Compares d/dt of the weighted mass int (u + (c/b) v) between consecutive
/// snapshots with the trapezoid-in-time average of its right-hand side.
MassBalance mass_balance_check(const Trajectory& traj, const ModelParams& p);

/// The re-derived bound 2 h0 + int (u0 + (c/b) v0) / min(d1 / mu1, c d2 / (b mu2))
/// and the variant int (u0 + (c/b) v0) + min(...) 2 h0, which agrees with it only when min(...) = 1.
struct WidthBounds {
  double rederived = 0;
  double literal = 0;
};
WidthBounds vanishing_width_bounds(const ModelParams& p, const InitialData& init);

}  // namespace nlepi
