#include <doctest.h>

#include <cmath>

#include "nlepi/equilibrium.hpp"
#include "oracles.hpp"

using namespace nlepi;

TEST_CASE("positive equilibrium examples") {
  const auto e = positive_equilibrium(ModelParams{});
  REQUIRE(e.exists);
  CHECK(e.u_star == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.v_star == doctest::Approx(0.5).epsilon(1e-14));

  ModelParams p;
  p.G = GFunction::rational(2.0, 1.0);
  const auto e2 = positive_equilibrium(p);
  REQUIRE(e2.exists);
  CHECK(e2.u_star == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(e2.v_star == doctest::Approx(0.25).epsilon(1e-14));

  p = ModelParams{};
  p.c = 0.5;
  CHECK_FALSE(positive_equilibrium(p).exists);
  p.c = 1.0;  // R0 = 1
  CHECK_FALSE(positive_equilibrium(p).exists);
}

TEST_CASE("property: the equilibrium solves both balance equations") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 200; ++t) {
    ModelParams p;
    p.a = oracle::uniform(rng, 0.1, 3);
    p.b = oracle::uniform(rng, 0.1, 3);
    p.c = oracle::uniform(rng, 0.1, 3);
    p.G = GFunction::rational(oracle::uniform(rng, 0.1, 3), oracle::uniform(rng, 0.1, 3));
    const auto e = positive_equilibrium(p);
    CHECK(e.exists == (basic_reproduction_number(p) > 1));
    if (!e.exists) continue;
    CHECK(e.u_star > 0);
    CHECK(std::abs(p.a * e.u_star - p.c * e.v_star) < 1e-12 * (1 + p.a * e.u_star));
    CHECK(std::abs(p.b * e.v_star - p.G(e.u_star)) < 1e-12 * (1 + p.b * e.v_star));
  }
}

TEST_CASE("tabulated G uses bisection") {
  std::vector<double> z, g;
  for (int i = 1; i <= 2000; ++i) {
    z.push_back(0.005 * i);
    g.push_back(z.back() / (1 + z.back()));
  }
  ModelParams p;
  p.G = GFunction::tabulated(z, g);
  const auto e = positive_equilibrium(p);
  REQUIRE(e.exists);
  CHECK(std::abs(e.u_star - 1.0) < 1e-5);
  CHECK(std::abs(p.b * e.v_star - p.G(e.u_star)) < 1e-12);
}

TEST_CASE("steady state on a long interval") {
  const ModelParams p;
  const auto s = steady_state(p, -20, 20);
  REQUIRE_FALSE(s.zero);
  CHECK(s.lambda_p > 0);
  CHECK(s.residual <= 1e-10);
  CHECK(s.E.minCoeff() > 0);
  CHECK(s.F.minCoeff() > 0);
  CHECK(s.U.minCoeff() > 0);
  CHECK(s.V.minCoeff() > 0);
  const Eigen::Index mid = s.grid.n / 2;
  CHECK(std::abs(s.U[mid] - 1.0) < 1e-6);
  CHECK(std::abs(s.V[mid] - 0.5) < 1e-6);
  // Symmetric in x.
  for (Eigen::Index i = 0; i < s.grid.n; ++i) CHECK(std::abs(s.U[i] - s.U[s.grid.n - 1 - i]) < 1e-12);
}

TEST_CASE("steady state agrees with a dense Picard iteration") {
  const ModelParams p;
  const auto s = steady_state(p, -3, 3);
  REQUIRE_FALSE(s.zero);
  Eigen::VectorXd U, V;
  oracle::picard_steady_state(p, s.grid, 1.0, 0.5, U, V, 4000);
  CHECK((U - s.U).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((V - s.V).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("steady state is monotone in the interval") {
  const ModelParams p;
  const auto small = steady_state(p, -20, 20);
  const auto big = steady_state(p, -40, 40);
  REQUIRE_FALSE(small.zero);
  REQUIRE_FALSE(big.zero);
  REQUIRE(small.grid.dx == doctest::Approx(big.grid.dx));
  // Nodes of the small grid coincide with nodes of the big grid.
  const auto offset = static_cast<Eigen::Index>(std::lround((small.grid.l1 - big.grid.l1) / big.grid.dx));
  for (Eigen::Index i = 0; i < small.grid.n; ++i) {
    CHECK(small.U[i] <= big.U[i + offset] + 1e-12);
    CHECK(small.V[i] <= big.V[i + offset] + 1e-12);
  }
}

TEST_CASE("short interval and R0 <= 1 give the zero state") {
  const ModelParams p;
  const auto s = steady_state(p, -0.01, 0.01);
  CHECK(s.zero);
  CHECK(s.lambda_p < 0);
  CHECK(s.U.cwiseAbs().maxCoeff() == 0);

  ModelParams q;
  q.c = 0.5;
  const auto z = steady_state(q, -10, 10);
  CHECK(z.zero);
  CHECK(z.V.cwiseAbs().maxCoeff() == 0);
}
