#include "nlepi/equilibrium.hpp"

#include <cmath>
#include <limits>

#include "nlepi/errors.hpp"

namespace nlepi {

Equilibrium positive_equilibrium(const ModelParams& p) {
  Equilibrium eq;
  if (!(basic_reproduction_number(p) > 1)) return eq;
  const double target = p.a * p.b / p.c;
  double u = 0;
  if (p.G.family() == GFunction::Family::RationalSaturating) {
    u = (p.c * p.G.beta() - p.a * p.b) / (p.a * p.b * p.G.alpha());
  } else {
    // G(z)/z - target is strictly decreasing, positive near 0.
    double lo = 0, hi = 1;
    while (p.G(hi) / hi > target) {
      lo = hi;
      hi *= 2;
      if (hi > 1e300) throw NumericalError("positive_equilibrium: G(z)/z stays above ab/c");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = (lo + hi) / 2;
      (p.G(mid) / mid > target ? lo : hi) = mid;
    }
    u = (lo + hi) / 2;
  }
  eq.exists = true;
  eq.u_star = u;
  eq.v_star = p.a * u / p.c;
  return eq;
}

namespace {

struct DeviationMap {
  const ModelParams& p;
  const Equilibrium& eq;
  const BlockOperator<double>& op;

  // Right-hand sides before division by d1 + a and d2 + b.
  void operator()(const Eigen::VectorXd& E, const Eigen::VectorXd& F, Eigen::VectorXd& rhs1,
                  Eigen::VectorXd& rhs2) const {
    const auto& W11 = op.W11();
    const auto& W12 = op.W12();
    const auto& W21 = op.W21();
    const auto& W22 = op.W22();
    rhs1 = p.d1 * eq.u_star * W11.deficit() + p.c * eq.v_star * W12.deficit() + p.d1 * W11.apply(E) +
           p.c * W12.apply(F);
    const Eigen::VectorXd drop_arg = eq.u_star * W21.deficit() + W21.apply(E);
    rhs2 = p.d2 * eq.v_star * W22.deficit() + p.d2 * W22.apply(F);
    for (Eigen::Index i = 0; i < rhs2.size(); ++i) rhs2[i] += p.G.drop(eq.u_star, std::min(drop_arg[i], eq.u_star));
  }
};

}  // namespace

double steady_state_residual(const ModelParams& p, const Equilibrium& eq, const BlockOperator<double>& op,
                             const Eigen::VectorXd& E, const Eigen::VectorXd& F) {
  Eigen::VectorXd r1, r2;
  DeviationMap{p, eq, op}(E, F, r1, r2);
  const double e1 = ((p.d1 + p.a) * E - r1).cwiseAbs().maxCoeff();
  const double e2 = ((p.d2 + p.b) * F - r2).cwiseAbs().maxCoeff();
  return std::max(e1, e2);
}

SteadyState steady_state(const ModelParams& p, double l1, double l2, const SteadyStateOptions& opts) {
  SteadyState out;
  out.grid = model_grid(p, l1, l2, opts.grid);
  const Eigen::Index n = out.grid.n;
  const Equilibrium eq = positive_equilibrium(p);
  if (!eq.exists) {
    // lambda_A <= 0, so lambda_p < 0 on every interval.
    out.lambda_p = std::numeric_limits<double>::quiet_NaN();
    out.U = out.V = Eigen::VectorXd::Zero(n);
    return out;
  }
  const auto op = assemble_block_operator(linearized_coefficients(p), p.kernels, out.grid);
  out.lambda_p = principal_eigenpair(op).lambda_p;
  if (!(out.lambda_p > 0)) {
    out.U = out.V = Eigen::VectorXd::Zero(n);
    return out;
  }

  const DeviationMap map{p, eq, op};
  Eigen::VectorXd E = Eigen::VectorXd::Zero(n), F = Eigen::VectorXd::Zero(n), r1, r2;
  long it = 0;
  double residual = std::numeric_limits<double>::infinity();
  for (;;) {
    map(E, F, r1, r2);
    const Eigen::VectorXd E_next = (r1 / (p.d1 + p.a)).cwiseMin(eq.u_star);
    const Eigen::VectorXd F_next = (r2 / (p.d2 + p.b)).cwiseMin(eq.v_star);
    const double step = std::max((E_next - E).cwiseAbs().maxCoeff(), (F_next - F).cwiseAbs().maxCoeff());
    E = E_next;
    F = F_next;
    ++it;
    if (step < opts.tol / 10) {
      residual = steady_state_residual(p, eq, op, E, F);
      if (residual < opts.tol) break;
    }
    if (it >= opts.max_iterations) {
      residual = steady_state_residual(p, eq, op, E, F);
      throw NotConverged("steady_state: no convergence after " + std::to_string(it) + " iterations", residual);
    }
  }
  out.zero = false;
  out.E = E;
  out.F = F;
  out.U = (eq.u_star - E.array()).matrix();
  out.V = (eq.v_star - F.array()).matrix();
  out.residual = residual;
  out.iterations = it;
  return out;
}

}  // namespace nlepi
