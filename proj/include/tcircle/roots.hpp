#pragma once

#include <cmath>
#include <limits>
#include <optional>

namespace tcircle {

struct RootOptions {
  double bisect_width = 1e-9;  // bracket width at which Newton takes over
  int newton_max = 30;
  double tol = 1e-13;          // worst-case bracket width if Newton stalls
};

// Hybrid bisection/Newton solver for a sign change of f on [lo, hi].
//
// Bisection shrinks the bracket to `bisect_width`, then Newton polishes to
// full double precision. Newton iterates never leave the current bracket: a
// step that would is replaced by a bisection step. If Newton does not settle
// within `newton_max` steps the bracket is bisected down to `tol`.
//
// Returns nullopt when f(lo) and f(hi) have the same strict sign. The result
// depends only on (f, lo, hi), which callers rely on for bitwise
// reproducibility of shared grid points.
template <typename F, typename DF>
std::optional<double> hybrid_root(F&& f, DF&& df, double lo, double hi,
                                  const RootOptions& opt = {}) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  double fhi = f(hi);
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0) || !std::isfinite(flo) || !std::isfinite(fhi)) {
    return std::nullopt;
  }
  const bool increasing = flo < 0.0;
  auto shrink = [&](double x, double fx) {
    if ((fx < 0.0) == increasing) {
      lo = x;
    } else {
      hi = x;
    }
  };

  while (hi - lo > opt.bisect_width) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    shrink(mid, fm);
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < opt.newton_max; ++i) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    shrink(x, fx);
    const double d = df(x);
    double next = x - fx / d;
    if (!(d != 0.0 && std::isfinite(next) && next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - x) <= 2.0 * eps * std::abs(x) ||
        std::abs(next - x) <= std::numeric_limits<double>::min()) {
      return next;
    }
    x = next;
  }

  while (hi - lo > opt.tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    shrink(mid, fm);
  }
  return 0.5 * (lo + hi);
}

}  // namespace tcircle
