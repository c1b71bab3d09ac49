#pragma once

#include <optional>

#include "nlepi/model.hpp"

namespace nlepi {

/// Spatially homogeneous positive equilibrium.
struct Equilibrium {
  bool exists = false;
  double u_star = 0;
  double v_star = 0;
};

/// Exists iff R0 > 1.
Equilibrium positive_equilibrium(const ModelParams& p);

struct SteadyStateOptions {
  double tol = 1e-10;
  long max_iterations = 100000;
  GridOptions grid;
};

/// Positive steady state on a fixed interval, or zero.
///
/// The iteration runs on the deviations E = u* - U, F = v* - V, which start
/// at 0 and increase monotonically; U and V are recovered as u* - E and
/// v* - F. Near the middle of a long interval E and F fall far below the
/// rounding unit of u*, so strict positivity of the deviations is the
/// meaningful test of U < u*.
struct SteadyState {
  bool zero = true;
  Grid<double> grid;
  Eigen::VectorXd U, V;
  Eigen::VectorXd E, F;
  double lambda_p = 0;
  double residual = 0;
  long iterations = 0;
};

SteadyState steady_state(const ModelParams& p, double l1, double l2, const SteadyStateOptions& opts = {});

/// Max-norm residual of the discretized steady-state equations, written in
/// deviation form.
double steady_state_residual(const ModelParams& p, const Equilibrium& eq, const BlockOperator<double>& op,
                             const Eigen::VectorXd& E, const Eigen::VectorXd& F);

}  // namespace nlepi
