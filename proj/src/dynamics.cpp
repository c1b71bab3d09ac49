#include "nlepi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "nlepi/errors.hpp"

namespace nlepi {

const char* to_string(ProfileFamily f) { return f == ProfileFamily::Cosine ? "cosine" : "parabola"; }

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::TimeLimit: return "time_limit";
    case StopReason::Spread: return "spread";
    case StopReason::Vanish: return "vanish";
  }
  return "?";
}

double initial_profile(ProfileFamily f, double h0, double x) {
  if (!(std::abs(x) < h0)) return 0;
  const double s = x / h0;
  return f == ProfileFamily::Cosine ? std::cos(std::numbers::pi * s / 2) : 1 - s * s;
}

double max_stable_dt(const ModelParams& p) { return 0.5 / std::max(p.d1 + p.a, p.d2 + p.b); }
double default_dt(const ModelParams& p) { return 0.1 / std::max(p.d1 + p.a, p.d2 + p.b); }

namespace {

double resolve_dt(const ModelParams& p, double dt) {
  if (dt == 0) return default_dt(p);
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  if (dt > max_stable_dt(p) * (1 + 1e-12))
    throw std::invalid_argument("dt = " + std::to_string(dt) + " exceeds the stability bound " +
                                std::to_string(max_stable_dt(p)));
  return dt;
}

// Stencil s[m] = J(m dx), m = 0..K, long enough to cover the support.
std::vector<double> lattice_stencil(const Kernel& k, double dx, std::size_t n_cap) {
  const auto reach = static_cast<std::size_t>(std::floor(k.support_radius() / dx)) + 1;
  const std::size_t K = std::min(reach, n_cap);
  std::vector<double> s(K + 1);
  for (std::size_t m = 0; m <= K; ++m) s[m] = k(static_cast<double>(m) * dx);
  return s;
}

// out_i = sum_j s[|i - j|] w_j f_j, summed in mirrored pairs so that
// reflected input gives bitwise reflected output.
void lattice_convolve(const std::vector<double>& s, const std::vector<double>& wf, std::vector<double>& out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(wf.size());
  const std::ptrdiff_t K = static_cast<std::ptrdiff_t>(s.size()) - 1;
  out.assign(wf.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = s[0] * wf[i];
    const std::ptrdiff_t top = std::min(K, std::max(i, n - 1 - i));
    for (std::ptrdiff_t m = 1; m <= top; ++m) {
      const double left = i - m >= 0 ? wf[i - m] : 0.0;
      const double right = i + m < n ? wf[i + m] : 0.0;
      acc += s[m] * (left + right);
    }
    out[i] = acc;
  }
}

struct Stencils {
  std::vector<double> s11, s12, s21, s22;
};

struct Reaction {
  std::vector<double> du, dv;
};

// Right-hand sides of the method-of-lines system at the given node values.
void reaction(const ModelParams& p, const Stencils& st, const std::vector<double>& w, const std::vector<double>& u,
              const std::vector<double>& v, Reaction& r) {
  const std::size_t n = u.size();
  std::vector<double> wu(n), wv(n), c11, c12, c21, c22;
  for (std::size_t i = 0; i < n; ++i) {
    wu[i] = w[i] * u[i];
    wv[i] = w[i] * v[i];
  }
  lattice_convolve(st.s11, wu, c11);
  lattice_convolve(st.s12, wv, c12);
  lattice_convolve(st.s21, wu, c21);
  lattice_convolve(st.s22, wv, c22);
  r.du.resize(n);
  r.dv.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.du[i] = p.d1 * c11[i] - (p.d1 + p.a) * u[i] + p.c * c12[i];
    r.dv[i] = p.d2 * c22[i] - (p.d2 + p.b) * v[i] + p.G(c21[i]);
  }
}

double sup(const std::vector<double>& f) {
  double m = 0;
  for (double x : f) m = std::max(m, x);
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

FixedRun evolve_fixed(const ModelParams& p, const Grid<double>& grid, const Eigen::VectorXd& u0,
                      const Eigen::VectorXd& v0, const FixedControls& controls) {
  const double dt = resolve_dt(p, controls.dt);
  if (u0.size() != grid.n || v0.size() != grid.n) throw std::invalid_argument("evolve_fixed: initial data size");
  if (!(u0.minCoeff() >= 0) || !(v0.minCoeff() >= 0))
    throw std::invalid_argument("evolve_fixed: initial data must be nonnegative");
  if (!(controls.T >= 0)) throw std::invalid_argument("evolve_fixed: T must be nonnegative");

  const Stencils st{lattice_stencil(p.kernels.J11, grid.dx, grid.n), lattice_stencil(p.kernels.J12, grid.dx, grid.n),
                    lattice_stencil(p.kernels.J21, grid.dx, grid.n), lattice_stencil(p.kernels.J22, grid.dx, grid.n)};
  const std::vector<double> w = to_std(grid.trapezoid_weights());
  const std::vector<double> x = to_std(grid.nodes());
  std::vector<double> u = to_std(u0), v = to_std(v0);

  FixedRun run;
  run.grid = grid;
  run.trajectory.dt = dt;
  run.trajectory.dx = grid.dx;
  auto record = [&](double t) {
    run.trajectory.samples.push_back({t, grid.l1, grid.l2, sup(u), sup(v), dot(w, u), dot(w, v)});
    if (controls.record_profiles) run.trajectory.profiles.push_back({t, grid.l1, grid.l2, x, w, u, v});
  };

  if (!(controls.sample_interval > 0)) throw std::invalid_argument("evolve_fixed: sample_interval must be positive");
  record(0);
  Reaction r;
  double t = 0;
  for (long j = 1; t < controls.T; ++j) {
    // Steps are shortened so that every sample time is hit exactly.
    const double target = std::min(controls.sample_interval * static_cast<double>(j), controls.T);
    while (t < target) {
      double h = std::min(dt, target - t);
      if (target - (t + h) < 1e-12 * std::max(1.0, target)) h = target - t;
      reaction(p, st, w, u, v, r);
      for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] += h * r.du[i];
        v[i] += h * r.dv[i];
      }
      t = h == target - t ? target : t + h;
    }
    record(target);
  }
  run.u = Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
  run.v = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return run;
}

double decay_rate_estimate(const Trajectory& traj, double t0, double t1) {
  std::vector<double> ts, ls;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.samples) {
    if (s.t < t0 || s.t > t1) continue;
    const double m = std::max(s.sup_u, s.sup_v);
    if (!(m > 0)) throw NumericalError("decay_rate_estimate: sup-norm vanished inside the window");
    if (m > prev) throw NumericalError("decay_rate_estimate: not in decay regime (sup-norm increases)");
    prev = m;
    ts.push_back(s.t);
    ls.push_back(std::log(m));
  }
  if (ts.size() < 2) throw std::invalid_argument("decay_rate_estimate: fewer than two samples in the window");
  const double n = static_cast<double>(ts.size());
  double mt = 0, ml = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i] / n;
    ml += ls[i] / n;
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    num += (ts[i] - mt) * (ls[i] - ml);
    den += (ts[i] - mt) * (ts[i] - mt);
  }
  return -num / den;
}

std::vector<double> FreeBoundaryState::weights() const {
  const std::size_t n = u.size();
  std::vector<double> w(n, dx);
  if (n == 0) return w;
  if (n == 1) {
    w[0] = (h - g) / 2;
    return w;
  }
  w.front() = (node(0) - g + dx) / 2;
  w.back() = (h - node(n - 1) + dx) / 2;
  return w;
}

FrontRates boundary_flux(const FreeBoundaryState& s, const ModelParams& p) {
  const std::vector<double> w = s.weights();
  const std::size_t n = s.u.size();
  const double r11 = p.kernels.J11.support_radius();
  const double r22 = p.kernels.J22.support_radius();
  const double reach = std::max(r11, r22);
  FrontRates out;
  // Right front: walk inward from the last node; left front mirrors it.
  double hu = 0, hv = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = n - 1 - k;
    const double z = s.h - s.node(i);
    if (z >= reach) break;
    hu += w[i] * p.kernels.J11.tail_mass(z) * s.u[i];
    hv += w[i] * p.kernels.J22.tail_mass(z) * s.v[i];
  }
  double gu = 0, gv = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = s.node(i) - s.g;
    if (z >= reach) break;
    gu += w[i] * p.kernels.J11.tail_mass(z) * s.u[i];
    gv += w[i] * p.kernels.J22.tail_mass(z) * s.v[i];
  }
  out.h_rate = p.mu1 * hu + p.mu2 * hv;
  out.g_rate = -(p.mu1 * gu + p.mu2 * gv);
  return out;
}

std::pair<double, double> solution_bounds(const ModelParams& p, double sup_u0, double sup_v0) {
  double K1 = std::max(sup_u0, p.c * sup_v0 / p.a);
  const Equilibrium eq = positive_equilibrium(p);
  if (eq.exists) K1 = std::max(K1, eq.u_star);
  return {K1, p.a * K1 / p.c};
}

FreeRun evolve_free(const ModelParams& p, const InitialData& init, const FreeControls& c) {
  if (!(init.h0 > 0) || !(init.tau >= 0)) throw std::invalid_argument("evolve_free: need h0 > 0 and tau >= 0");
  const double dt = resolve_dt(p, c.dt);
  const double sigma = p.kernels.min_scale();
  const double dx = c.dx > 0 ? c.dx : std::min(sigma / 20, 2 * init.h0 / 40);
  if (!(c.sample_interval > 0)) throw std::invalid_argument("evolve_free: sample_interval must be positive");

  FreeBoundaryState s;
  s.dx = dx;
  s.g = -init.h0;
  s.h = init.h0;
  s.k_lo = static_cast<long>(std::floor(s.g / dx)) + 1;
  const long k_hi = static_cast<long>(std::ceil(s.h / dx)) - 1;
  if (k_hi < s.k_lo) throw std::invalid_argument("evolve_free: no lattice node inside (-h0, h0); reduce dx");
  for (long k = s.k_lo; k <= k_hi; ++k) {
    const double x = static_cast<double>(k) * dx;
    s.u.push_back(init.u0(x));
    s.v.push_back(init.v0(x));
  }

  const std::size_t cap = 1u << 22;
  const Stencils st{lattice_stencil(p.kernels.J11, dx, cap), lattice_stencil(p.kernels.J12, dx, cap),
                    lattice_stencil(p.kernels.J21, dx, cap), lattice_stencil(p.kernels.J22, dx, cap)};
  const Equilibrium eq = positive_equilibrium(p);

  FreeRun run;
  auto& diag = run.diagnostics;
  std::tie(diag.K1, diag.K2) = solution_bounds(p, sup(s.u), sup(s.v));
  run.trajectory.dt = dt;
  run.trajectory.dx = dx;
  long sample_count = 0;

  auto record = [&]() {
    const std::vector<double> w = s.weights();
    Sample smp{s.t, s.g, s.h, sup(s.u), sup(s.v), dot(w, s.u), dot(w, s.v)};
    if (c.track_probe && eq.exists) {
      double e = 0;
      for (std::size_t i = 0; i < s.u.size(); ++i) {
        const double x = s.node(i);
        if (std::abs(x) > init.h0) continue;
        e = std::max({e, std::abs(s.u[i] - eq.u_star), std::abs(s.v[i] - eq.v_star)});
      }
      smp.probe_error = e;
    }
    run.trajectory.samples.push_back(smp);
    if (c.record_profiles && sample_count % std::max(1L, c.profile_every) == 0) {
      Snapshot snap{s.t, s.g, s.h, {}, w, s.u, s.v};
      snap.x.resize(s.u.size());
      for (std::size_t i = 0; i < s.u.size(); ++i) snap.x[i] = s.node(i);
      run.trajectory.profiles.push_back(std::move(snap));
    }
    ++sample_count;
  };
  auto stop_reason = [&]() -> std::optional<StopReason> {
    const double width = s.h - s.g;
    if (c.stop.spread && width > c.stop.l_star * (1 + c.stop.margin)) return StopReason::Spread;
    if (c.stop.vanish && std::max(sup(s.u), sup(s.v)) < c.stop.eps_v && width < c.stop.l_star)
      return StopReason::Vanish;
    return std::nullopt;
  };

  run.max_width = s.h - s.g;
  record();
  long next_sample = 1;
  Reaction r;
  std::optional<StopReason> why = stop_reason();
  while (!why && s.t < c.T_max) {
    const double t_target = std::min(c.sample_interval * static_cast<double>(next_sample), c.T_max);
    const FrontRates fr = boundary_flux(s, p);
    double h = std::min(dt, t_target - s.t);
    const double speed = std::max(fr.h_rate, -fr.g_rate);
    if (speed * h > dx / 2) h = dx / 2 / speed;
    diag.min_step = std::min(diag.min_step, h);

    const double g_new = s.g + h * fr.g_rate;
    const double h_new = s.h + h * fr.h_rate;
    if (!(h_new > s.h) || !(g_new < s.g)) diag.fronts_strict = false;
    s.g = g_new;
    s.h = h_new;

    const long lo_new = static_cast<long>(std::floor(s.g / dx)) + 1;
    const long hi_old = s.k_lo + static_cast<long>(s.u.size()) - 1;
    const long hi_new = static_cast<long>(std::ceil(s.h / dx)) - 1;
    if (lo_new < s.k_lo) {
      const auto add = static_cast<std::size_t>(s.k_lo - lo_new);
      s.u.insert(s.u.begin(), add, 0.0);
      s.v.insert(s.v.begin(), add, 0.0);
      s.k_lo = lo_new;
    }
    if (hi_new > hi_old) {
      s.u.resize(s.u.size() + static_cast<std::size_t>(hi_new - hi_old), 0.0);
      s.v.resize(s.u.size(), 0.0);
    }

    const std::vector<double> w = s.weights();
    reaction(p, st, w, s.u, s.v, r);
    double umin = std::numeric_limits<double>::infinity(), vmin = umin;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      s.u[i] += h * r.du[i];
      s.v[i] += h * r.dv[i];
      umin = std::min(umin, s.u[i]);
      vmin = std::min(vmin, s.v[i]);
    }
    const double umax = sup(s.u), vmax = sup(s.v);
    s.t = std::abs(t_target - (s.t + h)) <= 1e-12 * std::max(1.0, t_target) ? t_target : s.t + h;
    ++diag.steps;
    diag.min_u = std::min(diag.min_u, umin);
    diag.min_v = std::min(diag.min_v, vmin);
    diag.max_u = std::max(diag.max_u, umax);
    diag.max_v = std::max(diag.max_v, vmax);
    diag.max_asymmetry = std::max(diag.max_asymmetry, std::abs(s.g + s.h));
    run.max_width = std::max(run.max_width, s.h - s.g);

    if (!(umin >= -1e-12) || !(vmin >= -1e-12) || !std::isfinite(umax) || !std::isfinite(vmax))
      throw NumericalError("evolve_free: negative or non-finite values at t = " + std::to_string(s.t) +
                           " (min u " + std::to_string(umin) + ", min v " + std::to_string(vmin) + ")");
    if (umax > diag.K1 * (1 + 1e-12) || vmax > diag.K2 * (1 + 1e-12))
      throw NumericalError("evolve_free: solution exceeds its upper bound at t = " + std::to_string(s.t));

    why = stop_reason();
    if (s.t == t_target) {
      ++next_sample;
      record();
    } else if (why) {
      record();
    }
  }
  run.reason = why.value_or(StopReason::TimeLimit);
  run.final_state = std::move(s);
  return run;
}

MassBalance mass_balance_check(const Trajectory& traj, const ModelParams& p) {
  MassBalance out;
  const double cb = p.c / p.b;
  double max_mass = 0;
  std::vector<double> R(traj.profiles.size()), M(traj.profiles.size());
  const double radius = std::max(p.kernels.J12.support_radius(), p.kernels.J21.support_radius());
  const auto reach = traj.dx > 0 ? static_cast<std::size_t>(std::ceil(radius / traj.dx)) + 1 : ~std::size_t{0} / 2;
  for (std::size_t k = 0; k < traj.profiles.size(); ++k) {
    const Snapshot& s = traj.profiles[k];
    const std::size_t n = s.u.size();
    double boundary = 0, react = 0, literal = 0, mass = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double c12 = 0, c21 = 0;
      const std::size_t j_lo = i > reach ? i - reach : 0;
      const std::size_t j_hi = std::min(n, i + reach + 1);
      for (std::size_t j = j_lo; j < j_hi; ++j) {
        const double d = s.x[i] - s.x[j];
        c12 += s.w[j] * p.kernels.J12(d) * s.v[j];
        c21 += s.w[j] * p.kernels.J21(d) * s.u[j];
      }
      const double T11 = p.kernels.J11.tail_mass(s.h - s.x[i]) + p.kernels.J11.tail_mass(s.x[i] - s.g);
      const double T22 = p.kernels.J22.tail_mass(s.h - s.x[i]) + p.kernels.J22.tail_mass(s.x[i] - s.g);
      boundary += s.w[i] * (p.d1 * T11 * s.u[i] + cb * p.d2 * T22 * s.v[i]);
      const double common = -p.a * s.u[i] + p.c * c12 - p.c * s.v[i];
      react += s.w[i] * (common + cb * p.G(c21));
      literal += s.w[i] * (common + p.G(c21));
      mass += s.w[i] * (s.u[i] + cb * s.v[i]);
    }
    R[k] = react - boundary;
    M[k] = mass;
    max_mass = std::max(max_mass, mass);
    out.max_sign = std::max(out.max_sign, react);
    out.max_sign_literal = std::max(out.max_sign_literal, literal);
  }
  for (std::size_t k = 0; k + 1 < traj.profiles.size(); ++k) {
    const double span = traj.profiles[k + 1].t - traj.profiles[k].t;
    if (!(span > 0)) continue;
    const double defect = std::abs((M[k + 1] - M[k]) / span - (R[k] + R[k + 1]) / 2);
    out.defects.push_back(defect);
    out.max_defect = std::max(out.max_defect, defect);
  }
  out.bound = 10 * (traj.dt + traj.dx * traj.dx) * max_mass;
  return out;
}

WidthBounds vanishing_width_bounds(const ModelParams& p, const InitialData& init) {
  auto profile_mass = [&](ProfileFamily f) {
    return f == ProfileFamily::Cosine ? 4 * init.h0 / std::numbers::pi : 4 * init.h0 / 3;
  };
  const double mass =
      init.tau * (init.scale1 * profile_mass(init.profile1) + p.c / p.b * init.scale2 * profile_mass(init.profile2));
  auto ratio = [](double num, double mu) { return mu > 0 ? num / mu : std::numeric_limits<double>::infinity(); };
  const double m = std::min(ratio(p.d1, p.mu1), ratio(p.c * p.d2 / p.b, p.mu2));
  WidthBounds b;
  b.rederived = 2 * init.h0 + mass / m;
  b.literal = mass + m * 2 * init.h0;
  return b;
}

}  // namespace nlepi
