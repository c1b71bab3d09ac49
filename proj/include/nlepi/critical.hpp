#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlepi/model.hpp"

namespace nlepi {

struct CriticalOptions {
  double tol = 0;  // bracket width at exit; 0 selects 1e-4 * sigma
  GridOptions grid;
};

struct CriticalLengthResult {
  double l_star = 0;
  double l_lo = 0, l_hi = 0;
  double lambda_lo = 0, lambda_hi = 0;
  double tol = 0;
  std::vector<std::pair<double, double>> samples;  // (l, lambda) in evaluation order
};

/// Bisection for the root of a strictly increasing l -> lambda(l), starting
/// the bracket search at `l0`. Throws NumericalError if no sign change is
/// found below `l_cap`.
template <typename F>
CriticalLengthResult bisect_length(F&& lambda, double l0, double l_cap, double tol);

/// Length L* at which lambda_p(-l/2, l/2) crosses zero.
CriticalLengthResult critical_length(const ModelParams& p, const CriticalOptions& opts = {});

/// Same for the operator with d1 = d2 = 0; requires c = G'(0) and J12 = J21.
CriticalLengthResult critical_length_zero_diffusion(const ModelParams& p, const CriticalOptions& opts = {});

/// lambda_p(-l/2, l/2) of the zero-diffusion operator.
double zero_diffusion_lambda_p(const ModelParams& p, double l, const GridOptions& grid = {});

struct ComparisonRow {
  double l = 0, nu = 0;
  ClosedFormLambdas<double> closed;
  double lambda_p_matrix = 0;
};

struct ComparisonCurve {
  std::string name;
  std::optional<double> l_star;  // empty when the curve never crosses zero
  std::optional<double> l_star_refined;  // same with the spacing halved
  std::string note;
};

struct ComparisonReport {
  ComparisonParams<double> params;
  std::vector<ComparisonRow> rows;
  std::vector<ComparisonCurve> curves;  // lambda1..lambda4, lambda_p (closed form), L* (matrix)
  bool pointwise_12 = true;   // lambda1 > lambda2 at every row
  bool pointwise_34p = true;  // lambda3 > lambda4 > lambda_p at every row
  bool chain_12 = false;      // L1* < L2*
  bool chain_34p = false;     // L3* < L4* < L*
  double max_closed_vs_matrix = 0;
  double quadrature_budget = 0;
};

struct ComparisonOptions {
  double tol = 0;          // critical-length tolerance; 0 selects 1e-4 * sigma
  bool refine = true;      // recompute every critical length with dx halved
  GridOptions grid;
};

/// Evaluates the five shared-kernel curves on `l_grid`, locates their
/// critical lengths, and cross-checks the closed-form lambda_p against the
/// matrix eigenvalue. `kernel` is the shared kernel.
ComparisonReport compare_shared_kernel_curves(const KernelSpec<double>& kernel, const ComparisonParams<double>& params,
                                  const std::vector<double>& l_grid, const ComparisonOptions& opts = {});

/// Model parameters equivalent to `params` with every kernel equal to `kernel`
/// and G(z) = g0 z / (1 + z).
ModelParams comparison_model(const KernelSpec<double>& kernel, const ComparisonParams<double>& params);

}  // namespace nlepi

#include "nlepi/critical_impl.hpp"
