#include "nlepi/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlepi {

GFunction GFunction::rational(double alpha, double beta) {
  if (!(alpha > 0) || !(beta > 0)) throw std::invalid_argument("G: alpha and beta must be positive");
  GFunction g;
  g.family_ = Family::RationalSaturating;
  g.alpha_ = alpha;
  g.beta_ = beta;
  return g;
}

GFunction GFunction::tabulated(std::vector<double> z, std::vector<double> g) {
  if (z.size() != g.size() || z.empty()) throw std::invalid_argument("G: table needs matching nonempty columns");
  if (!(z.front() > 0)) throw std::invalid_argument("G: table abscissae must be positive (G(0) = 0 is implied)");
  for (std::size_t i = 1; i < z.size(); ++i)
    if (!(z[i] > z[i - 1])) throw std::invalid_argument("G: table abscissae must be strictly increasing");
  GFunction out;
  out.family_ = Family::Tabulated;
  out.z_ = std::move(z);
  out.g_ = std::move(g);
  return out;
}

double GFunction::operator()(double z) const {
  if (family_ == Family::RationalSaturating) return beta_ * z / (1 + alpha_ * z);
  if (z <= 0) return 0;
  if (z <= z_.front()) return g_.front() * z / z_.front();
  if (z >= z_.back()) return g_.back();
  const auto j = static_cast<std::size_t>(std::upper_bound(z_.begin(), z_.end(), z) - z_.begin());
  const double t = (z - z_[j - 1]) / (z_[j] - z_[j - 1]);
  return g_[j - 1] + t * (g_[j] - g_[j - 1]);
}

double GFunction::derivative_at_zero() const {
  return family_ == Family::RationalSaturating ? beta_ : g_.front() / z_.front();
}

double GFunction::drop(double z0, double dz) const {
  if (family_ == Family::RationalSaturating)
    return beta_ * dz / ((1 + alpha_ * z0) * (1 + alpha_ * (z0 - dz)));
  return (*this)(z0) - (*this)(z0 - dz);
}

std::vector<std::string> GFunction::violations(double ab_over_c) const {
  std::vector<std::string> out;
  if (family_ == Family::Tabulated) {
    for (double v : g_)
      if (!std::isfinite(v)) out.push_back("G table contains non-finite values");
  }
  if ((*this)(0.0) != 0) out.push_back("G(0) must be 0");
  if (!(derivative_at_zero() > 0)) out.push_back("G'(0) must be positive");
  // Log grid over [1e-6, 1e6].
  double prev_g = 0, prev_ratio = derivative_at_zero();
  bool increasing = true, ratio_decreasing = true;
  for (int i = 0; i <= 240; ++i) {
    const double z = std::pow(10.0, -6.0 + 12.0 * i / 240);
    const double g = (*this)(z);
    const double ratio = g / z;
    if (!(g > prev_g)) increasing = false;
    if (!(ratio < prev_ratio) && family_ == Family::RationalSaturating) ratio_decreasing = false;
    if (!(ratio <= prev_ratio)) ratio_decreasing = false;
    prev_g = g;
    prev_ratio = ratio;
  }
  if (family_ == Family::Tabulated) {
    // Beyond the last sample G is constant, so only the tabulated range must increase.
    // A chord through two nodes with decreasing G(z)/z has positive intercept,
    // so checking the nodes covers the whole piecewise-linear graph.
    increasing = true;
    ratio_decreasing = true;
    double last = 0;
    for (double v : g_) {
      if (!(v > last)) increasing = false;
      last = v;
    }
    double prev = derivative_at_zero();
    for (std::size_t i = 1; i < z_.size(); ++i) {
      const double r = g_[i] / z_[i];
      if (!(r < prev)) ratio_decreasing = false;
      prev = r;
    }
  }
  if (!increasing) out.push_back("G must be strictly increasing");
  if (!ratio_decreasing) out.push_back("G(z)/z must be strictly decreasing");
  if (!(prev_ratio < ab_over_c)) out.push_back("lim G(z)/z must be below ab/c");
  return out;
}

std::vector<std::string> ModelParams::violations() const {
  std::vector<std::string> out;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be positive");
  };
  auto nonneg = [&](double v, const char* name) {
    if (!(v >= 0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be nonnegative");
  };
  nonneg(d1, "d1");
  nonneg(d2, "d2");
  positive(a, "a");
  positive(b, "b");
  positive(c, "c");
  nonneg(mu1, "mu1");
  nonneg(mu2, "mu2");
  if (a > 0 && b > 0 && c > 0)
    for (auto& v : G.violations(a * b / c)) out.push_back(v);
  const KernelSpec<double>* ks[] = {&kernels.J11, &kernels.J12, &kernels.J21, &kernels.J22};
  const char* names[] = {"J11", "J12", "J21", "J22"};
  for (int i = 0; i < 4; ++i) {
    const auto rep = validate_kernel(*ks[i], 1e-8);
    for (const auto& e : rep.entries)
      if (!e.passed) out.push_back(std::string(names[i]) + ": " + e.check + " failed " + e.detail);
  }
  return out;
}

double basic_reproduction_number(const ModelParams& p) { return p.c * p.G.derivative_at_zero() / (p.a * p.b); }

BlockCoefficients<double> linearized_coefficients(const ModelParams& p) {
  return {p.d1, p.c, p.G.derivative_at_zero(), p.d2, p.d1 + p.a, p.d2 + p.b};
}

BlockCoefficients<double> zero_diffusion_coefficients(const ModelParams& p) {
  return {0, p.c, p.G.derivative_at_zero(), 0, p.a, p.b};
}

Grid<double> model_grid(const ModelParams& p, double l1, double l2, const GridOptions& opts) {
  return make_grid(l1, l2, p.kernels.min_scale(), opts);
}

EigenResult<double> model_eigenpair(const ModelParams& p, double l1, double l2, const GridOptions& opts,
                                    const EigenOptions<double>& eig) {
  const auto op = assemble_block_operator(linearized_coefficients(p), p.kernels, model_grid(p, l1, l2, opts));
  return principal_eigenpair(op, eig);
}

double model_lambda_p(const ModelParams& p, double l1, double l2, const GridOptions& opts) {
  return model_eigenpair(p, l1, l2, opts).lambda_p;
}

bool is_symmetric_case(const ModelParams& p) {
  return std::abs(p.c - p.G.derivative_at_zero()) <= 1e-12 * std::max(1.0, p.c) && p.kernels.J12 == p.kernels.J21;
}

}  // namespace nlepi
