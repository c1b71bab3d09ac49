#include <doctest.h>

#include <cmath>

#include "nlepi/classify.hpp"
#include "nlepi/critical.hpp"
#include "nlepi/errors.hpp"

using namespace nlepi;

namespace {

double p0_l_star() {
  static const double l = critical_length(ModelParams{}).l_star;
  return l;
}

ModelParams symmetric_p0() {
  ModelParams p;
  p.c = std::sqrt(2.0);
  p.G = GFunction::rational(1.0, std::sqrt(2.0));
  return p;
}

Trajectory synthetic(std::vector<std::pair<double, double>> width_sup) {
  Trajectory t;
  double time = 0;
  for (auto [w, s] : width_sup) {
    Sample x;
    x.t = time;
    time += 1;
    x.g = -w / 2;
    x.h = w / 2;
    x.sup_u = s;
    x.sup_v = s / 2;
    t.samples.push_back(x);
  }
  return t;
}

}  // namespace

TEST_CASE("classification rules on synthetic trajectories") {
  const double L = 2.0;
  CHECK(classify_run(synthetic({{1, 1}, {2.2, 1}}), L).verdict == Verdict::Spreading);
  CHECK(classify_run(synthetic({{1, 1}, {2.05, 1}}), L).verdict == Verdict::Undecided);
  CHECK(classify_run(synthetic({{1, 1}, {1.5, 1e-9}}), L).verdict == Verdict::Vanishing);
  CHECK(classify_run(synthetic({{1, 1}, {1.5, 1e-7}}), L).verdict == Verdict::Undecided);
  // Vanishing needs the final width below L*.
  CHECK(classify_run(synthetic({{1, 1}, {2.05, 1e-9}}), L).verdict == Verdict::Undecided);
  const auto o = classify_run(synthetic({{1, 1}, {1.5, 1e-9}}), std::numeric_limits<double>::infinity());
  CHECK(o.verdict == Verdict::Vanishing);
  CHECK(o.final_width == doctest::Approx(1.5));
  CHECK(o.max_width == doctest::Approx(1.5));
}

TEST_CASE("initial width above L* spreads immediately") {
  const ModelParams p;
  InitialData init;
  init.h0 = 0.6 * p0_l_star();
  FreeControls c;
  c.T_max = 50;
  const auto r = classify(p, init, c, {}, p0_l_star());
  CHECK(r.outcome.verdict == Verdict::Spreading);
  CHECK(r.run.reason == StopReason::Spread);
}

TEST_CASE("R0 <= 1 vanishes within the width bound") {
  ModelParams p;
  p.c = 0.5;
  InitialData init;
  init.h0 = 2;
  FreeControls c;
  c.T_max = 300;
  const auto r = classify(p, init, c);
  CHECK(std::isinf(r.outcome.l_star));
  CHECK(r.outcome.verdict == Verdict::Vanishing);
  CHECK(r.outcome.max_width <= r.width_bounds.rederived);
}

TEST_CASE("small amplitude and small expansion rates vanish") {
  const ModelParams p;
  InitialData init;
  init.h0 = 0.25 * p0_l_star();
  init.tau = 1e-3;
  FreeControls c;
  c.T_max = 300;
  CHECK(classify(p, init, c, {}, p0_l_star()).outcome.verdict == Verdict::Vanishing);

  ModelParams slow = p;
  slow.mu1 = slow.mu2 = 1e-6;
  init.tau = 1;
  CHECK(classify(slow, init, c, {}, p0_l_star()).outcome.verdict == Verdict::Vanishing);

  ModelParams fast = p;
  fast.mu1 = fast.mu2 = 1e3;
  CHECK(classify(fast, init, c, {}, p0_l_star()).outcome.verdict == Verdict::Spreading);
}

TEST_CASE("audit monotonicity") {
  std::vector<Probe> a{{0.1, Verdict::Vanishing}, {1, Verdict::Spreading}, {0.5, Verdict::Undecided}};
  CHECK(audit_monotone(a));
  a.push_back({0.05, Verdict::Spreading});
  CHECK_FALSE(audit_monotone(a));
  CHECK(audit_monotone({}));
}

TEST_CASE("search preconditions") {
  const ModelParams p;
  InitialData init;
  init.h0 = 0.25 * p0_l_star();
  CHECK_THROWS_AS(find_tau_star(p, init, 0.01, 10), std::invalid_argument);  // tent kernels
  init.h0 = p0_l_star();
  CHECK_THROWS_AS(find_mu_star(p, init, Link{}, 0.1, 10), std::invalid_argument);
  init.h0 = 0.25 * p0_l_star();
  CHECK_THROWS_AS(find_mu_star(p, init, Link{-1}, 0.1, 10), std::invalid_argument);
}

TEST_CASE("d1 threshold") {
  const ModelParams p = symmetric_p0();
  CHECK_THROWS_AS(find_d_star(ModelParams{}, 2.0, Link{}), std::invalid_argument);

  const double lt = critical_length_zero_diffusion(p, {}).l_star;
  const auto na = find_d_star(p, 0.4 * lt, Link{});
  CHECK_FALSE(na.applicable);
  CHECK_FALSE(na.explanation.empty());

  const auto r = find_d_star(p, 0.75 * lt, Link{}, 1e-3);
  REQUIRE(r.applicable);
  CHECK(r.hi - r.lo <= 1e-3 * r.hi);
  ModelParams q = p;
  q.d1 = q.d2 = r.lo;
  CHECK(model_lambda_p(q, -0.75 * lt, 0.75 * lt) >= 0);
  q.d1 = q.d2 = r.hi;
  CHECK(model_lambda_p(q, -0.75 * lt, 0.75 * lt) < 0);
  // lambda_p decreases along the audit when sorted by d1.
  auto audit = r.audit;
  std::sort(audit.begin(), audit.end());
  for (std::size_t i = 1; i < audit.size(); ++i) CHECK(audit[i].second <= audit[i - 1].second);
}
