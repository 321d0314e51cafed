#pragma once

#include <cmath>
#include <utility>

namespace nonclassical::detail {

/// Newton iteration kept inside a bracket [lo, hi] on which `fn` changes
/// sign; falls back to bisection whenever a Newton step leaves the bracket
/// or the derivative vanishes. `fn(x)` returns {g(x), g'(x)}.
///
/// Stops when |g| <= value_tol or the step is below a few ulps of x.
template <typename Fn>
double safeguarded_newton(Fn&& fn, double lo, double hi, double x0,
                          double value_tol, int max_iter = 200) {
  auto [g_lo, d_lo] = fn(lo);
  (void)d_lo;
  const bool increasing = g_lo < 0.0;
  double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    const auto [g, dg] = fn(x);
    if (std::abs(g) <= value_tol) return x;
    if ((g < 0.0) == increasing) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x - g / dg;
    if (!(dg != 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * 2.220446049250313e-16 * std::abs(x) ||
        hi - lo <= 4.0 * 2.220446049250313e-16 * std::abs(hi)) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace nonclassical::detail
