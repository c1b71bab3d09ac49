#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlepi {

enum class KernelFamily { Tent, TruncatedGaussian, Gaussian, Tabulated };

inline const char* to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Tent: return "tent";
    case KernelFamily::TruncatedGaussian: return "truncated_gaussian";
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Tabulated: return "tabulated";
  }
  return "unknown";
}

/// Even, nonnegative dispersal kernel with unit mass.
///
/// `scale` is the support half-width for Tent and TruncatedGaussian and the
/// standard deviation for Gaussian. TruncatedGaussian uses standard deviation
/// scale/3 and is shifted down so that it vanishes continuously at +-scale.
/// Tabulated kernels interpolate linearly between samples and are zero outside
/// the sampled range; a table with only x >= 0 is reflected to x < 0.
template <typename Scalar>
struct KernelSpec {
  KernelFamily family = KernelFamily::Tent;
  Scalar scale = 1;
  Scalar normalization = 1;
  std::vector<Scalar> table_x;
  std::vector<Scalar> table_y;
  // Mass of the raw (unnormalized) table to the right of each sample.
  std::vector<Scalar> table_right_mass;

  bool operator==(const KernelSpec&) const = default;

  bool half_table() const { return !table_x.empty() && table_x.front() >= 0; }

  Scalar operator()(Scalar x) const {
    switch (family) {
      case KernelFamily::Tent: {
        const Scalar r = std::abs(x) / scale;
        return r < 1 ? normalization * (1 - r) : Scalar(0);
      }
      case KernelFamily::TruncatedGaussian: {
        const Scalar ax = std::abs(x);
        if (ax >= scale) return 0;
        const Scalar s = scale / 3;
        return normalization * (std::exp(-ax * ax / (2 * s * s)) - std::exp(Scalar(-4.5)));
      }
      case KernelFamily::Gaussian:
        return normalization * std::exp(-x * x / (2 * scale * scale));
      case KernelFamily::Tabulated:
        return normalization * table_value(half_table() ? std::abs(x) : x);
    }
    return 0;
  }

  /// Total mass under the current normalization (1 for a validated kernel).
  Scalar mass() const {
    using std::numbers::pi;
    switch (family) {
      case KernelFamily::Tent: return normalization * scale;
      case KernelFamily::TruncatedGaussian: {
        const Scalar s = scale / 3;
        return normalization * (s * std::sqrt(2 * pi) * std::erf(Scalar(3) / std::sqrt(Scalar(2))) -
                                2 * scale * std::exp(Scalar(-4.5)));
      }
      case KernelFamily::Gaussian: return normalization * scale * std::sqrt(2 * pi);
      case KernelFamily::Tabulated:
        if (table_right_mass.empty()) return 0;
        return normalization * (half_table() ? 2 * table_right_mass.front() : table_right_mass.front());
    }
    return 0;
  }

  /// T(z) = integral of J over (z, infinity).
  Scalar tail_mass(Scalar z) const {
    if (family == KernelFamily::Tabulated && !half_table()) return normalization * raw_right_mass(z);
    if (z < 0) return mass() - tail_mass(-z);
    switch (family) {
      case KernelFamily::Tent: {
        if (z >= scale) return 0;
        const Scalar r = scale - z;
        return normalization * r * r / (2 * scale);
      }
      case KernelFamily::TruncatedGaussian: {
        if (z >= scale) return 0;
        using std::numbers::pi;
        const Scalar s = scale / 3;
        const Scalar root2 = std::sqrt(Scalar(2));
        return normalization * (s * std::sqrt(pi / 2) * (std::erf(Scalar(3) / root2) - std::erf(z / (s * root2))) -
                                (scale - z) * std::exp(Scalar(-4.5)));
      }
      case KernelFamily::Gaussian:
        return normalization * scale * std::sqrt(std::numbers::pi / 2) *
               std::erfc(z / (scale * std::sqrt(Scalar(2))));
      case KernelFamily::Tabulated: return normalization * raw_right_mass(z);
    }
    return 0;
  }

  /// Radius outside which the kernel is (numerically) zero.
  Scalar support_radius() const {
    switch (family) {
      case KernelFamily::Tent:
      case KernelFamily::TruncatedGaussian: return scale;
      case KernelFamily::Gaussian: return 12 * scale;
      case KernelFamily::Tabulated: {
        if (table_x.empty()) return 0;
        return std::max(std::abs(table_x.front()), std::abs(table_x.back()));
      }
    }
    return 0;
  }

  /// 1 - dx * sum_k J(k dx): the trapezoid defect of the kernel on an
  /// infinite lattice through the origin.
  Scalar lattice_defect(Scalar dx) const {
    if (family == KernelFamily::Tent && std::abs(normalization * scale - 1) < Scalar(1e-14)) {
      // dx * sum_k (1 - |k|/m)_+ / scale with m = scale/dx, in closed form.
      Scalar m = scale / dx;
      if (std::abs(m - std::round(m)) <= Scalar(1e-9) * m) m = std::round(m);
      const Scalar K = std::ceil(m) - 1;
      return 1 - (1 + 2 * K - K * (K + 1) / m) / m;
    }
    if (family == KernelFamily::Gaussian && std::abs(mass() - 1) < Scalar(1e-14)) {
      // Poisson summation: dx * sum_k J(k dx) = 1 + 2 sum_m exp(-2 pi^2 m^2 scale^2 / dx^2).
      Scalar excess = 0;
      for (int m = 1; m < 50; ++m) {
        const Scalar term = std::exp(-2 * std::numbers::pi * std::numbers::pi * m * m * scale * scale / (dx * dx));
        excess += term;
        if (term == 0) break;
      }
      return -2 * excess;
    }
    // Neumaier-compensated lattice sum.
    const long K = static_cast<long>(std::floor(support_radius() / dx)) + 1;
    Scalar sum = (*this)(Scalar(0));
    Scalar comp = 0;
    for (long k = 1; k <= K; ++k) {
      const Scalar x = k * dx;
      const Scalar term = (*this)(x) + (*this)(-x);
      const Scalar t = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
      sum = t;
    }
    return 1 - dx * (sum + comp);
  }

 private:
  Scalar table_value(Scalar x) const {
    if (table_x.empty() || x < table_x.front() || x > table_x.back()) return 0;
    const auto it = std::upper_bound(table_x.begin(), table_x.end(), x);
    if (it == table_x.end()) return table_y.back();
    const auto j = static_cast<std::size_t>(it - table_x.begin());
    if (j == 0) return table_y.front();
    const Scalar t = (x - table_x[j - 1]) / (table_x[j] - table_x[j - 1]);
    return table_y[j - 1] + t * (table_y[j] - table_y[j - 1]);
  }

  // Raw (unnormalized) mass of the table on (z, infinity).
  Scalar raw_right_mass(Scalar z) const {
    if (table_x.empty() || z >= table_x.back()) return 0;
    if (z <= table_x.front()) return table_right_mass.front();
    const auto it = std::upper_bound(table_x.begin(), table_x.end(), z);
    const auto j = static_cast<std::size_t>(it - table_x.begin());
    const Scalar yz = table_value(z);
    return table_right_mass[j] + (table_x[j] - z) * (yz + table_y[j]) / 2;
  }
};

using Kernel = KernelSpec<double>;

template <typename Scalar = double>
KernelSpec<Scalar> make_tent(Scalar half_width) {
  if (!(half_width > 0)) throw std::invalid_argument("tent kernel: scale must be positive");
  return {KernelFamily::Tent, half_width, Scalar(1) / half_width, {}, {}, {}};
}

template <typename Scalar = double>
KernelSpec<Scalar> make_truncated_gaussian(Scalar half_width) {
  if (!(half_width > 0)) throw std::invalid_argument("truncated gaussian kernel: scale must be positive");
  KernelSpec<Scalar> k{KernelFamily::TruncatedGaussian, half_width, 1, {}, {}, {}};
  k.normalization = 1 / k.mass();
  return k;
}

template <typename Scalar = double>
KernelSpec<Scalar> make_gaussian(Scalar sd) {
  if (!(sd > 0)) throw std::invalid_argument("gaussian kernel: scale must be positive");
  return {KernelFamily::Gaussian, sd, 1 / (sd * std::sqrt(2 * std::numbers::pi_v<Scalar>)), {}, {}, {}};
}

/// Builds a tabulated kernel normalized to unit mass. Samples must be sorted
/// by strictly increasing x. Validation (not construction) rejects negative or
/// non-finite values.
template <typename Scalar = double>
KernelSpec<Scalar> make_tabulated(std::vector<Scalar> xs, std::vector<Scalar> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("tabulated kernel: need at least two (x, value) samples");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("tabulated kernel: x must be strictly increasing");
  KernelSpec<Scalar> k{KernelFamily::Tabulated, 0, 1, std::move(xs), std::move(ys), {}};
  const std::size_t n = k.table_x.size();
  k.table_right_mass.assign(n, Scalar(0));
  for (std::size_t i = n - 1; i-- > 0;)
    k.table_right_mass[i] =
        k.table_right_mass[i + 1] + (k.table_x[i + 1] - k.table_x[i]) * (k.table_y[i] + k.table_y[i + 1]) / 2;
  k.scale = k.support_radius();
  const Scalar raw = k.mass();
  if (raw > 0) k.normalization = 1 / raw;
  return k;
}

template <typename Scalar>
Scalar kernel_eval(const KernelSpec<Scalar>& k, Scalar x) {
  return k(x);
}

template <typename Scalar>
Scalar kernel_tail_mass(const KernelSpec<Scalar>& k, Scalar z) {
  return k.tail_mass(z);
}

struct ValidationEntry {
  std::string check;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;

  bool ok() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
  }
  const ValidationEntry* find(const std::string& check) const {
    for (const auto& e : entries)
      if (e.check == check) return &e;
    return nullptr;
  }
};

namespace detail {

// Composite Simpson over [a, b] with the given number of panel pairs.
template <typename Scalar, typename F>
Scalar simpson(F&& f, Scalar a, Scalar b, int pairs) {
  const Scalar h = (b - a) / (2 * pairs);
  Scalar sum = f(a) + f(b);
  for (int i = 1; i < 2 * pairs; ++i) sum += (i % 2 ? 4 : 2) * f(a + i * h);
  return sum * h / 3;
}

}  // namespace detail

/// Integrates the kernel numerically over its support, splitting at every
/// point where it may fail to be smooth.
template <typename Scalar>
Scalar kernel_quadrature_mass(const KernelSpec<Scalar>& k) {
  std::vector<Scalar> breaks;
  const Scalar R = k.support_radius();
  switch (k.family) {
    case KernelFamily::Tent:
    case KernelFamily::TruncatedGaussian: breaks = {-R, 0, R}; break;
    case KernelFamily::Gaussian:
      for (int i = -48; i <= 48; ++i) breaks.push_back(R * i / 48);
      break;
    case KernelFamily::Tabulated:
      for (Scalar x : k.table_x) breaks.push_back(x);
      if (k.half_table())
        for (std::size_t i = 0; i < k.table_x.size(); ++i)
          if (k.table_x[i] > 0) breaks.push_back(-k.table_x[i]);
      std::sort(breaks.begin(), breaks.end());
      break;
  }
  Scalar total = 0;
  for (std::size_t i = 1; i < breaks.size(); ++i)
    total += detail::simpson<Scalar>(k, breaks[i - 1], breaks[i], 64);
  return total;
}

/// Checks the kernel conditions (continuous, even, nonnegative, positive at 0, unit mass). Failures are reported, never thrown.
template <typename Scalar>
ValidationReport validate_kernel(const KernelSpec<Scalar>& k, Scalar tol) {
  ValidationReport rep;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    rep.entries.push_back({std::move(name), ok, std::move(detail)});
  };

  const bool scale_ok = std::isfinite(k.scale) && k.scale > 0 && std::isfinite(k.normalization) && k.normalization > 0;
  add("parameters", scale_ok, scale_ok ? "" : "scale and normalization must be positive and finite");
  if (!scale_ok) return rep;

  bool finite = true;
  bool table_nonneg = true;
  bool endpoints_zero = true;
  if (k.family == KernelFamily::Tabulated) {
    finite = !k.table_x.empty() && k.table_x.size() == k.table_y.size();
    for (std::size_t i = 0; finite && i < k.table_x.size(); ++i)
      finite = std::isfinite(k.table_x[i]) && std::isfinite(k.table_y[i]);
    for (Scalar y : k.table_y) table_nonneg = table_nonneg && y >= 0;
    if (finite) endpoints_zero = k.table_y.back() == 0 && (k.half_table() || k.table_y.front() == 0);
  }
  add("finite", finite, finite ? "" : "table contains non-finite entries");
  if (!finite) return rep;
  add("continuous", endpoints_zero, endpoints_zero ? "" : "table must vanish at its outer endpoints");

  const Scalar R = k.support_radius();
  const int samples = 2001;
  Scalar max_asym = 0;
  Scalar min_val = 0;
  for (int i = 0; i < samples; ++i) {
    const Scalar x = R * (Scalar(2) * i / (samples - 1) - 1) * Scalar(1.1);
    max_asym = std::max(max_asym, std::abs(k(x) - k(-x)));
    min_val = std::min(min_val, k(x));
  }
  if (k.family == KernelFamily::Tabulated)
    for (Scalar x : k.table_x) {
      max_asym = std::max(max_asym, std::abs(k(x) - k(-x)));
      min_val = std::min(min_val, k(x));
    }
  add("even", max_asym <= tol * std::max(Scalar(1), k(Scalar(0))),
      "max |J(x)-J(-x)| = " + std::to_string(max_asym));
  const bool nonneg = table_nonneg && min_val >= 0;
  add("nonnegative", nonneg, nonneg ? "" : "kernel takes negative values");
  add("positive_at_zero", k(Scalar(0)) > 0, "J(0) = " + std::to_string(k(Scalar(0))));
  const Scalar m = kernel_quadrature_mass(k);
  add("unit_mass", std::abs(m - 1) <= tol, "mass = " + std::to_string(m));
  return rep;
}

}  // namespace nlepi
