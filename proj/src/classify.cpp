#include "nlepi/classify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "nlepi/critical.hpp"
#include "nlepi/errors.hpp"

namespace nlepi {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Spreading: return "spreading";
    case Verdict::Vanishing: return "vanishing";
    case Verdict::Undecided: return "undecided";
  }
  return "?";
}

RunOutcome classify_run(const Trajectory& traj, double l_star, const Thresholds& th) {
  RunOutcome out;
  out.l_star = l_star;
  if (traj.samples.empty()) return out;
  for (const auto& s : traj.samples) out.max_width = std::max(out.max_width, s.h - s.g);
  const Sample& last = traj.samples.back();
  out.final_width = last.h - last.g;
  out.final_sup = std::max(last.sup_u, last.sup_v);
  out.final_t = last.t;

  if (out.max_width > l_star * (1 + th.margin))
    out.verdict = Verdict::Spreading;
  else if (out.final_sup < th.eps_v && out.final_width < l_star)
    out.verdict = Verdict::Vanishing;

  if (out.verdict == Verdict::Spreading) {
    const double t_from = last.t * (1 - th.probe_fraction);
    double e = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : traj.samples)
      if (s.t >= t_from && !std::isnan(s.probe_error)) e = std::isnan(e) ? s.probe_error : std::max(e, s.probe_error);
    out.probe_error = e;
  }
  if (last.t > 0) {
    try {
      out.decay_rate = decay_rate_estimate(traj, last.t / 2, last.t);
    } catch (const std::exception&) {
      // not decaying over the second half; leave NaN
    }
  }
  return out;
}

double critical_length_or_inf(const ModelParams& p, const GridOptions& grid) {
  if (!(lambda_A_closed_form(linearized_coefficients(p)).lambda_A > 0)) return std::numeric_limits<double>::infinity();
  CriticalOptions o;
  o.grid = grid;
  return critical_length(p, o).l_star;
}

ClassifiedRun classify(const ModelParams& p, const InitialData& init, FreeControls controls, const Thresholds& th,
                       std::optional<double> l_star) {
  const double L = l_star ? *l_star : critical_length_or_inf(p);
  controls.stop.l_star = L;
  controls.stop.margin = th.margin;
  controls.stop.eps_v = th.eps_v;
  ClassifiedRun out;
  out.run = evolve_free(p, init, controls);
  out.outcome = classify_run(out.run.trajectory, L, th);
  out.width_bounds = vanishing_width_bounds(p, init);
  return out;
}

bool audit_monotone(const std::vector<Probe>& audit) {
  std::vector<Probe> a;
  for (const auto& p : audit)
    if (p.verdict != Verdict::Undecided) a.push_back(p);
  std::stable_sort(a.begin(), a.end(), [](const Probe& x, const Probe& y) { return x.parameter < y.parameter; });
  bool seen_spread = false;
  for (const auto& p : a) {
    if (p.verdict == Verdict::Spreading) seen_spread = true;
    if (p.verdict == Verdict::Vanishing && seen_spread) return false;
  }
  return true;
}

namespace {

using ProbeFn = std::function<Probe(double, double)>;  // (parameter, T_max)

// Bisection on a parameter whose large values spread.
ThresholdResult bisect_verdicts(const ProbeFn& run, double lo, double hi, double hi_cap, const SearchOptions& opts) {
  if (!(lo > 0) || !(hi > lo)) throw std::invalid_argument("threshold search: need 0 < lo < hi");
  ThresholdResult r;
  r.tol = opts.tol;
  auto probe = [&](double x) {
    if (static_cast<long>(r.audit.size()) >= opts.max_probes)
      throw NumericalError("threshold search: probe budget exhausted");
    double T = opts.controls.T_max;
    Probe pr = run(x, T);
    for (int k = 0; k < opts.undecided_retries && pr.verdict == Verdict::Undecided; ++k) {
      T *= 2;
      pr = run(x, T);
    }
    r.audit.push_back(pr);
    return pr.verdict;
  };

  Verdict vlo = probe(lo);
  bool hi_known = false;
  while (vlo == Verdict::Spreading) {
    hi = lo;
    hi_known = true;
    lo /= 2;
    if (lo < 1e-12) throw NumericalError("threshold search: spreading at every probed value down to 1e-12");
    vlo = probe(lo);
  }
  if (vlo == Verdict::Undecided) {
    r.lo = r.hi = r.value = lo;
    r.note = "lower endpoint undecided after retries";
    return r;
  }
  Verdict vhi = hi_known ? Verdict::Spreading : probe(hi);
  while (vhi == Verdict::Vanishing) {
    lo = hi;
    hi *= 2;
    if (hi > hi_cap)
      throw NumericalError("threshold search: no spreading up to " + std::to_string(hi_cap) +
                           "; largest vanished value " + std::to_string(lo));
    vhi = probe(hi);
  }
  if (vhi == Verdict::Undecided) {
    r.lo = lo;
    r.hi = r.value = hi;
    r.note = "upper endpoint undecided after retries";
    return r;
  }
  while (hi - lo > opts.tol * hi) {
    const double mid = (lo + hi) / 2;
    const Verdict v = probe(mid);
    if (v == Verdict::Undecided) {
      r.lo = lo;
      r.hi = hi;
      r.value = mid;
      r.note = "undecided probe at " + std::to_string(mid) + " after retries";
      return r;
    }
    (v == Verdict::Vanishing ? lo : hi) = mid;
  }
  r.lo = lo;
  r.hi = hi;
  r.value = (lo + hi) / 2;
  r.converged = true;
  return r;
}

Probe make_probe(double x, double T, const ClassifiedRun& cr) {
  return {x, cr.outcome.verdict, cr.outcome.max_width, cr.outcome.final_sup, cr.outcome.final_t, T};
}

}  // namespace

ThresholdResult find_tau_star(const ModelParams& p, const InitialData& init, double lo, double hi,
                              const SearchOptions& opts) {
  if (p.kernels.J11.family != KernelFamily::Gaussian || p.kernels.J22.family != KernelFamily::Gaussian)
    throw std::invalid_argument("tau search requires Gaussian J11 and J22 (positive on the whole line)");
  const double L = critical_length_or_inf(p);
  if (!(2 * init.h0 < L)) throw std::invalid_argument("tau search requires 2 h0 < L*; every tau spreads");
  auto run = [&](double tau, double T) {
    InitialData d = init;
    d.tau = tau;
    FreeControls c = opts.controls;
    c.T_max = T;
    return make_probe(tau, T, classify(p, d, c, opts.thresholds, L));
  };
  return bisect_verdicts(run, lo, hi, 1e6, opts);
}

ThresholdResult find_mu_star(const ModelParams& p, const InitialData& init, const Link& link, double lo, double hi,
                             const SearchOptions& opts) {
  if (!(link.factor > 0)) throw std::invalid_argument("mu search: link factor must be positive");
  const double L = critical_length_or_inf(p);
  if (!(2 * init.h0 < L)) throw std::invalid_argument("mu search requires 2 h0 < L*; every mu1 spreads");
  auto run = [&](double mu1, double T) {
    ModelParams q = p;
    q.mu1 = mu1;
    q.mu2 = link(mu1);
    FreeControls c = opts.controls;
    c.T_max = T;
    return make_probe(mu1, T, classify(q, init, c, opts.thresholds, L));
  };
  return bisect_verdicts(run, lo, hi, 1e6, opts);
}

DStarResult find_d_star(const ModelParams& p, double h0, const Link& link, double tol, const GridOptions& grid) {
  if (!is_symmetric_case(p)) throw std::invalid_argument("d1 search requires c = G'(0) and J12 = J21");
  if (!(link.factor > 0)) throw std::invalid_argument("d1 search: link factor must be positive");
  DStarResult r;
  r.tol = tol;
  CriticalOptions co;
  co.grid = grid;
  r.l_tilde_star = critical_length_zero_diffusion(p, co).l_star;
  if (!(2 * h0 > r.l_tilde_star)) {
    r.explanation =
        "2 h0 <= zero-diffusion critical length: for every d1 > 0 both spreading and vanishing can occur, "
        "depending on mu1 and mu2";
    return r;
  }
  r.applicable = true;
  auto lambda = [&](double d1) {
    ModelParams q = p;
    q.d1 = d1;
    q.d2 = link(d1);
    const double v = model_lambda_p(q, -h0, h0, grid);
    r.audit.emplace_back(d1, v);
    return v;
  };
  double lo = 1, hi = 1;
  double flo = lambda(lo);
  if (flo >= 0) {
    double fhi = flo;
    while (fhi >= 0) {
      lo = hi;
      hi *= 2;
      if (hi > 1e8) throw NumericalError("d1 search: lambda_p stays nonnegative up to d1 = 1e8");
      fhi = lambda(hi);
    }
  } else {
    while (flo < 0) {
      hi = lo;
      lo /= 2;
      if (lo < 1e-12) throw NumericalError("d1 search: lambda_p negative down to d1 = 1e-12");
      flo = lambda(lo);
    }
  }
  while (hi - lo > tol * hi) {
    const double mid = (lo + hi) / 2;
    (lambda(mid) >= 0 ? lo : hi) = mid;
  }
  r.lo = lo;
  r.hi = hi;
  r.value = (lo + hi) / 2;
  return r;
}

}  // namespace nlepi
