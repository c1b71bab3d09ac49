#pragma once

#include <cmath>

#include "nlepi/errors.hpp"

namespace nlepi {

template <typename F>
CriticalLengthResult bisect_length(F&& lambda, double l0, double l_cap, double tol) {
  CriticalLengthResult r;
  r.tol = tol;
  auto eval = [&](double l) {
    const double v = lambda(l);
    r.samples.emplace_back(l, v);
    return v;
  };
  double lo = l0, hi = l0;
  double flo = eval(l0), fhi = flo;
  if (flo < 0) {
    while (fhi < 0) {
      lo = hi;
      flo = fhi;
      hi *= 2;
      if (hi > l_cap) throw NumericalError("no critical length: lambda_p < 0 up to l = " + std::to_string(l_cap));
      fhi = eval(hi);
    }
  } else {
    while (flo >= 0) {
      hi = lo;
      fhi = flo;
      lo /= 2;
      if (lo < 1e-12 * l0) throw NumericalError("no critical length: lambda_p >= 0 down to tiny lengths");
      flo = eval(lo);
    }
  }
  while (hi - lo > tol) {
    const double mid = (lo + hi) / 2;
    const double fm = eval(mid);
    if (fm < 0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  r.l_lo = lo;
  r.l_hi = hi;
  r.lambda_lo = flo;
  r.lambda_hi = fhi;
  r.l_star = (lo + hi) / 2;
  return r;
}

}  // namespace nlepi
