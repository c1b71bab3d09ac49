#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlepi/discretization.hpp"
#include "nlepi/spectral.hpp"

namespace nlepi {

/// Infection function G: G(0) = 0, increasing, G(z)/z strictly decreasing.
class GFunction {
 public:
  enum class Family { RationalSaturating, Tabulated };

  /// G(z) = beta z / (1 + alpha z).
  static GFunction rational(double alpha, double beta);
  /// Piecewise-linear through (0, 0) and the given samples, constant beyond
  /// the last sample.
  static GFunction tabulated(std::vector<double> z, std::vector<double> g);

  Family family() const { return family_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  double operator()(double z) const;
  double derivative_at_zero() const;
  /// G(z0) - G(z0 - dz) for 0 <= dz <= z0, without cancellation for the
  /// rational family.
  double drop(double z0, double dz) const;

  /// Checks the infection-function conditions on a log-spaced sample; `ab_over_c` is the
  /// threshold the large-z slope must stay below. Empty when valid.
  std::vector<std::string> violations(double ab_over_c) const;

  bool operator==(const GFunction&) const = default;

 private:
  Family family_ = Family::RationalSaturating;
  double alpha_ = 1;
  double beta_ = 1;
  std::vector<double> z_, g_;
};

/// Coefficients of the free-boundary epidemic model.
struct ModelParams {
  double d1 = 1, d2 = 1;
  double a = 1, b = 1, c = 2;
  double mu1 = 1, mu2 = 1;
  GFunction G = GFunction::rational(1, 1);
  KernelSet<double> kernels = KernelSet<double>::shared(make_tent(1.0));

  /// All sign constraints; empty when valid.
  std::vector<std::string> violations() const;
};

/// R0 = c G'(0) / (a b).
double basic_reproduction_number(const ModelParams& p);

/// Coefficients of the linearized eigenproblem at the disease-free state:
/// a11 = d1, a12 = c, a21 = G'(0), a22 = d2, b1 = d1 + a, b2 = d2 + b.
BlockCoefficients<double> linearized_coefficients(const ModelParams& p);

/// Same with d1 = d2 = 0.
BlockCoefficients<double> zero_diffusion_coefficients(const ModelParams& p);

/// Grid used for eigenvalue and steady-state computations on [l1, l2].
Grid<double> model_grid(const ModelParams& p, double l1, double l2, const GridOptions& opts = {});

/// lambda_p of the linearized problem on [l1, l2].
EigenResult<double> model_eigenpair(const ModelParams& p, double l1, double l2, const GridOptions& opts = {},
                                    const EigenOptions<double>& eig = {});
double model_lambda_p(const ModelParams& p, double l1, double l2, const GridOptions& opts = {});

/// c == G'(0) and J12 == J21: the case with a variational characterization.
bool is_symmetric_case(const ModelParams& p);

}  // namespace nlepi
