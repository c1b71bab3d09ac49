#include <doctest.h>

#include <cmath>

#include "nlepi/critical.hpp"
#include "nlepi/errors.hpp"

using namespace nlepi;

namespace {

ModelParams symmetric_p0() {
  ModelParams p;
  p.c = std::sqrt(2.0);
  p.G = GFunction::rational(1.0, std::sqrt(2.0));
  return p;
}

}  // namespace

TEST_CASE("bisection on a synthetic increasing function") {
  const auto r = bisect_length([](double l) { return std::log(l / 3.0); }, 1.0, 1e4, 1e-6);
  CHECK(std::abs(r.l_star - 3.0) <= 1e-6);
  CHECK(r.l_hi - r.l_lo <= 1e-6);
  CHECK(r.lambda_lo < 0);
  CHECK(r.lambda_hi >= 0);

  const auto down = bisect_length([](double l) { return std::log(l / 0.01); }, 1.0, 1e4, 1e-8);
  CHECK(std::abs(down.l_star - 0.01) <= 1e-8);

  CHECK_THROWS_AS(bisect_length([](double) { return -1.0; }, 1.0, 100.0, 1e-6), NumericalError);
}

TEST_CASE("P0 critical length with a certified bracket") {
  const ModelParams p;
  const auto r = critical_length(p);
  CHECK(r.l_star > 0);
  CHECK(r.l_hi - r.l_lo <= 1e-4);
  CHECK(r.lambda_lo < 0);
  CHECK(r.lambda_hi >= 0);
  // Independent recomputation at the bracket ends.
  CHECK(model_lambda_p(p, -r.l_lo / 2, r.l_lo / 2) < 0);
  CHECK(model_lambda_p(p, -r.l_hi / 2, r.l_hi / 2) >= 0);
  // Shrinking the tolerance stays inside the bracket.
  CriticalOptions fine;
  fine.tol = 1e-6;
  const auto f = critical_length(p, fine);
  CHECK(std::abs(f.l_star - r.l_star) <= 1e-4);
}

TEST_CASE("R0 <= 1 has no critical length") {
  ModelParams p;
  p.c = 0.5;
  CHECK(basic_reproduction_number(p) == doctest::Approx(0.5));
  CHECK_THROWS_AS(critical_length(p), NumericalError);
}

TEST_CASE("property: L* increases with d1 in the symmetric case") {
  double prev = 0;
  for (double d1 : {0.25, 1.0, 4.0}) {
    ModelParams p = symmetric_p0();
    p.d1 = d1;
    CriticalOptions o;
    o.tol = 1e-3;
    const double l = critical_length(p, o).l_star;
    CHECK(l > prev);
    prev = l;
  }
}

TEST_CASE("zero-diffusion critical length is below L*") {
  const ModelParams p = symmetric_p0();
  CriticalOptions o;
  o.tol = 1e-3;
  const double zero = critical_length_zero_diffusion(p, o).l_star;
  const double full = critical_length(p, o).l_star;
  CHECK(zero < full);
  // Small-length limit max(-a, -b).
  CHECK(std::abs(zero_diffusion_lambda_p(p, 1e-3) - std::max(-p.a, -p.b)) < 0.01);
  CHECK_THROWS_AS(critical_length_zero_diffusion(ModelParams{}, o), std::invalid_argument);
}

TEST_CASE("shared-kernel comparison report") {
  const ComparisonParams<double> cp{};
  std::vector<double> ls;
  for (int i = 0; i < 12; ++i) ls.push_back(0.25 * std::pow(32.0, i / 11.0));
  ComparisonOptions o;
  o.tol = 1e-3;
  o.refine = false;
  const auto rep = compare_shared_kernel_curves(make_tent(1.0), cp, ls, o);
  REQUIRE(rep.rows.size() == ls.size());
  REQUIRE(rep.curves.size() == 6);
  CHECK(rep.pointwise_12);
  CHECK(rep.pointwise_34p);
  CHECK(rep.chain_12);
  CHECK(rep.chain_34p);
  CHECK(rep.max_closed_vs_matrix <= rep.quadrature_budget);
  // The closed-form and matrix critical lengths agree.
  REQUIRE(rep.curves[4].l_star);
  REQUIRE(rep.curves[5].l_star);
  CHECK(std::abs(*rep.curves[4].l_star - *rep.curves[5].l_star) < 2e-3);
  for (const auto& row : rep.rows) {
    CHECK(row.nu > -1);
    CHECK(row.nu < 0);
  }
}
