#include <doctest.h>

#include <random>

#include "nlepi/model.hpp"
#include "oracles.hpp"

using namespace nlepi;

namespace {

ModelParams p0() { return ModelParams{}; }

ModelParams symmetric_p0() {
  ModelParams p;
  p.c = std::sqrt(2.0);
  p.G = GFunction::rational(1.0, std::sqrt(2.0));
  return p;
}

BlockOperator<double> p0_operator(double l, const ModelParams& p = p0()) {
  return assemble_block_operator(linearized_coefficients(p), p.kernels, model_grid(p, -l / 2, l / 2));
}

}  // namespace

TEST_CASE("P0 small-interval limit matches the dense oracle") {
  const auto op = p0_operator(0.01);
  const auto r = principal_eigenpair(op);
  CHECK(std::abs(r.lambda_p - (-2.0)) < 0.05);
  CHECK(std::abs(r.lambda_p - oracle::max_real_eigenvalue(op.dense())) < 1e-8);
}

TEST_CASE("P0 large-interval limit approaches lambda_A") {
  const auto r = principal_eigenpair(p0_operator(40));
  CHECK(std::abs(r.lambda_p - (std::sqrt(2.0) - 1)) < 0.01);
  CHECK(r.residual <= 1e-10 * std::max(1.0, std::abs(r.lambda_p)));
}

TEST_CASE("eigenpair invariants") {
  const auto op = p0_operator(3);
  const auto r = principal_eigenpair(op);
  CHECK(r.phi1.minCoeff() > 0);
  CHECK(r.phi2.minCoeff() > 0);
  CHECK(std::max(r.phi1.maxCoeff(), r.phi2.maxCoeff()) == doctest::Approx(1.0));
  CHECK(r.lambda_p > -2);
  CHECK(r.lower <= r.lambda_p);
  CHECK(r.lambda_p <= r.upper);
  Eigen::VectorXd phi(2 * op.grid().n);
  phi << r.phi1, r.phi2;
  CHECK((op.apply(phi) - r.lambda_p * phi).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("plain power iteration and the accelerated path agree") {
  const auto op = p0_operator(2);
  EigenOptions<double> power;
  power.method = EigenMethod::Power;
  const double a = principal_eigenpair(op, power).lambda_p;
  const double b = principal_eigenpair(op).lambda_p;
  CHECK(std::abs(a - b) < 1e-9);
}

TEST_CASE("banded operators take the sparse resolvent path and match the dense oracle") {
  // With tent kernels of width 1 and dx = 0.05 on length 12, under 20% of the
  // entries are nonzero.
  const auto op = p0_operator(12);
  const Eigen::MatrixXd L = op.dense();
  REQUIRE((L.array() != 0).count() < 0.2 * L.size());
  CHECK(std::abs(principal_eigenpair(op).lambda_p - oracle::max_real_eigenvalue(L)) < 1e-8);
}

TEST_CASE("iteration cap raises with the last residual") {
  EigenOptions<double> o;
  o.method = EigenMethod::Power;
  o.max_iterations = 2;
  try {
    principal_eigenpair(p0_operator(4), o);
    FAIL("expected EigenNotConverged");
  } catch (const EigenNotConverged& e) {
    CHECK(e.last_residual() > 0);
  }
}

TEST_CASE("symmetric case equals the maximal Rayleigh quotient") {
  const ModelParams p = symmetric_p0();
  REQUIRE(is_symmetric_case(p));
  for (double l : {0.5, 2.0, 5.0}) {
    const auto op = p0_operator(l, p);
    CHECK(std::abs(principal_eigenpair(op).lambda_p - oracle::max_rayleigh_quotient(op)) < 1e-8);
  }
}

TEST_CASE("scalar principal eigenvalue") {
  const Kernel k = make_tent(1.0);
  const auto g = make_grid(-1.0, 1.0, 1.0);
  CHECK(scalar_principal_eigenvalue(k, 0.0, 1.5, g) == -1.5);
  for (double coeff : {0.5, 1.0, 3.0}) {
    const double kappa = scalar_principal_eigenvalue(k, coeff, 0.7, g);
    CHECK(kappa > -coeff - 0.7);
    CHECK(kappa < -0.7);
  }
  const double nu = scalar_principal_eigenvalue(k, 1.0, 0.0, g);
  CHECK(std::abs(scalar_principal_eigenvalue(k, 2.5, 1.0, g) - (2.5 * nu - 1.0)) < 1e-10);
}

TEST_CASE("nu curve") {
  const Kernel k = make_tent(1.0);
  double prev = -1;
  for (double l : {0.1, 1.0, 10.0}) {
    const double nu = nu_curve(k, l);
    CHECK(nu > -1);
    CHECK(nu < 0);
    CHECK(nu > prev);
    prev = nu;
  }
  const double small = nu_curve(k, 0.05);
  CHECK(std::abs(small + 1) < 0.05);
  const auto g = make_grid(-0.025, 0.025, 1.0);
  Eigen::MatrixXd L = ConvolutionMatrix<double>(k, g).entries();
  L.diagonal().array() -= 1;
  CHECK(std::abs(small - oracle::max_real_eigenvalue(L)) < 1e-9);
  CHECK(std::abs(nu_curve(k, 40.0)) < 0.02);
  CHECK_THROWS_AS(nu_curve(k, 0.0), std::invalid_argument);
}

TEST_CASE("lambda_A closed form") {
  const auto p = lambda_A_closed_form(linearized_coefficients(p0()));
  CHECK(p.lambda_A == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-14));
  CHECK(p.theta_A == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  // (lambda_A I - A)(theta_A, 1) = 0 on random coefficient sets.
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const BlockCoefficients<double> c{oracle::uniform(rng, 0, 3), oracle::uniform(rng, 0.1, 3),
                                      oracle::uniform(rng, 0.1, 3), oracle::uniform(rng, 0, 3),
                                      oracle::uniform(rng, 0.1, 5), oracle::uniform(rng, 0.1, 5)};
    const auto a = lambda_A_closed_form(c);
    CHECK(a.theta_A > 0);
    CHECK(std::abs((a.lambda_A - (c.a11 - c.b1)) * a.theta_A - c.a12) < 1e-12 * (1 + std::abs(c.a12)));
    CHECK(std::abs(-c.a21 * a.theta_A + (a.lambda_A - (c.a22 - c.b2))) < 1e-12 * (1 + c.a21 * a.theta_A));
  }

  // a = b, c G'(0) = 1 gives 1 - a.
  for (double a : {0.5, 1.0, 2.0}) {
    ModelParams p;
    p.a = p.b = a;
    p.c = 1;
    CHECK(lambda_A_closed_form(linearized_coefficients(p)).lambda_A == doctest::Approx(1 - a).epsilon(1e-12));
  }
}

TEST_CASE("property: R0 > 1 iff lambda_A > 0") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 200; ++t) {
    ModelParams p;
    p.d1 = oracle::uniform(rng, 0, 3);
    p.d2 = oracle::uniform(rng, 0, 3);
    p.a = oracle::uniform(rng, 0.1, 3);
    p.b = oracle::uniform(rng, 0.1, 3);
    p.c = oracle::uniform(rng, 0.1, 3);
    p.G = GFunction::rational(1.0, oracle::uniform(rng, 0.1, 3));
    const double R0 = basic_reproduction_number(p);
    if (std::abs(R0 - 1) < 1e-9) continue;
    CHECK((R0 > 1) == (lambda_A_closed_form(linearized_coefficients(p)).lambda_A > 0));
  }
}

TEST_CASE("closed-form lambdas example") {
  const auto r = closed_form_lambdas(-0.5, ComparisonParams<double>{});
  CHECK(r.lambda1 == doctest::Approx(0.0));
  CHECK(r.lambda2 == doctest::Approx(-0.75).epsilon(1e-14));
  CHECK(r.lambda3 == doctest::Approx((-3 + std::sqrt(6.0)) / 2).epsilon(1e-14));
  CHECK(r.lambda4 == doctest::Approx((-3 + std::sqrt(3.0)) / 2).epsilon(1e-14));
  CHECK(r.lambda_p == doctest::Approx((-3 + std::sqrt(1.5)) / 2).epsilon(1e-14));
  CHECK_THROWS_AS(closed_form_lambdas(0.0, ComparisonParams<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(closed_form_lambdas(-1.0, ComparisonParams<double>{}), std::invalid_argument);
}

TEST_CASE("property: closed-form orderings and limits") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 500; ++t) {
    ComparisonParams<double> p{oracle::uniform(rng, 0, 3), oracle::uniform(rng, 0, 3), oracle::uniform(rng, 0.1, 3),
                               oracle::uniform(rng, 0.1, 3), oracle::uniform(rng, 0.1, 3), oracle::uniform(rng, 0.1, 3)};
    const double nu = oracle::uniform(rng, -0.999, -0.001);
    const auto r = closed_form_lambdas(nu, p);
    CHECK(r.lambda1 > r.lambda2);
    CHECK(r.lambda3 > r.lambda4);
    CHECK(r.lambda4 > r.lambda_p);
  }
  const ComparisonParams<double> p{};
  const auto r = closed_form_lambdas(-1e-12, p);
  const double limit12 = -p.a + p.c * p.g0 / p.b;
  const double lambda_A = lambda_A_closed_form(BlockCoefficients<double>{p.d1, p.c, p.g0, p.d2, p.d1 + p.a, p.d2 + p.b}).lambda_A;
  CHECK(std::abs(r.lambda1 - limit12) < 1e-9);
  CHECK(std::abs(r.lambda2 - limit12) < 1e-9);
  CHECK(std::abs(r.lambda3 - lambda_A) < 1e-9);
  CHECK(std::abs(r.lambda4 - lambda_A) < 1e-9);
  CHECK(std::abs(r.lambda_p - lambda_A) < 1e-9);
}

TEST_CASE("closed-form lambda_p equals the matrix eigenvalue with shared kernels") {
  const ComparisonParams<double> cp{};
  ModelParams p;
  p.c = cp.c;
  for (double l : {0.5, 2.0, 6.0}) {
    const auto g = model_grid(p, -l / 2, l / 2);
    const double nu = scalar_principal_eigenvalue<double>(p.kernels.J11, 1, 0, g);
    const auto op = assemble_block_operator(linearized_coefficients(p), p.kernels, g);
    CHECK(std::abs(closed_form_lambdas(nu, cp).lambda_p - principal_eigenpair(op).lambda_p) < 1e-9);
  }
}

TEST_CASE("comparison bounds from test functions") {
  const auto op = p0_operator(4);
  const auto r = principal_eigenpair(op);
  CHECK(std::abs(upper_bound_from_test(op, r.phi1, r.phi2) - r.lambda_p) <= 1e-10);

  const auto asym = lambda_A_closed_form(op.coefficients());
  const Eigen::Index n = op.grid().n;
  const double hat = upper_bound_from_test(op, Eigen::VectorXd(Eigen::VectorXd::Constant(n, asym.theta_A)), Eigen::VectorXd(Eigen::VectorXd::Ones(n)));
  CHECK(hat <= asym.lambda_A + 1e-12);
  CHECK(r.lambda_p <= hat);

  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd a(n), b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      a[i] = oracle::uniform(rng, 0.01, 2);
      b[i] = oracle::uniform(rng, 0.01, 2);
    }
    CHECK(upper_bound_from_test(op, a, b) >= r.lambda_p - 1e-10);
  }
  Eigen::VectorXd bad = Eigen::VectorXd::Ones(n);
  bad[3] = 0;
  CHECK_THROWS_AS(upper_bound_from_test(op, bad, Eigen::VectorXd(Eigen::VectorXd::Ones(n))), std::invalid_argument);
}

TEST_CASE("property: lambda_p strictly increasing in the interval length") {
  double prev = -1e9;
  for (double l : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double v = principal_eigenpair(p0_operator(l)).lambda_p;
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("property: lambda_p decreasing in d1 and in d2 (symmetric case)") {
  const ModelParams base = symmetric_p0();
  double prev = 1e9;
  for (double d1 : {0.25, 1.0, 4.0, 16.0}) {
    ModelParams p = base;
    p.d1 = d1;
    const double v = model_lambda_p(p, -0.5, 0.5);
    CHECK(v < prev);
    prev = v;
  }
  prev = 1e9;
  for (double d2 : {0.25, 1.0, 4.0, 16.0}) {
    ModelParams p = base;
    p.d2 = d2;
    const double v = model_lambda_p(p, -0.5, 0.5);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("limits in the diffusion rates") {
  const ModelParams base = symmetric_p0();
  const auto g = model_grid(base, -0.5, 0.5);
  const Kernel& k = base.kernels.J11;
  // d1 large, d2 fixed: kappa1 = principal eigenvalue of d2 (W22 - I) - b.
  {
    ModelParams p = base;
    p.d1 = 1e3;
    const double kappa1 = scalar_principal_eigenvalue(k, p.d2, p.b, g);
    CHECK(std::abs(model_lambda_p(p, -0.5, 0.5) - kappa1) < 0.02);
  }
  // d2 large, d1 fixed: kappa2 from the first component.
  {
    ModelParams p = base;
    p.d2 = 1e3;
    const double kappa2 = scalar_principal_eigenvalue(k, p.d1, p.a, g);
    CHECK(std::abs(model_lambda_p(p, -0.5, 0.5) - kappa2) < 0.02);
  }
  {
    ModelParams p = base;
    p.d1 = 1e3;
    p.d2 = 0;
    CHECK(std::abs(model_lambda_p(p, -0.5, 0.5) + p.b) < 0.02);
    p.d1 = 0;
    p.d2 = 1e3;
    CHECK(std::abs(model_lambda_p(p, -0.5, 0.5) + p.a) < 0.02);
    p.d1 = p.d2 = 1e3;
    CHECK(model_lambda_p(p, -0.5, 0.5) < -10);
  }
}

TEST_CASE("property: the start vector scale does not change lambda_p") {
  const auto op = p0_operator(3);
  const double ref = principal_eigenpair(op).lambda_p;
  std::mt19937_64 rng(13);
  for (int t = 0; t < 10; ++t) {
    EigenOptions<double> o;
    o.start = Eigen::VectorXd::Constant(op.size(), std::pow(10.0, oracle::uniform(rng, -6, 6)));
    CHECK(std::abs(principal_eigenpair(op, o).lambda_p - ref) < 1e-10);
  }
}
