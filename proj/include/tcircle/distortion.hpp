#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <vector>

#include "tcircle/circle.hpp"
#include "tcircle/covering_map.hpp"

namespace tcircle {

struct DistortionEstimate {
  double c0 = 0.0;
  const char* method = "total-variation-of-log-derivative";
};

/// Total variation of log F' over one period, integral of |F''/F'|.
///
/// For J, phi(J), ..., phi^{n-1}(J) pairwise disjoint, log (phi^n)' is a sum
/// of log F' over disjoint arcs, so its oscillation on J is at most this
/// total variation.
inline DistortionEstimate estimate_C0(const CoveringMap& phi) {
  auto integrand = [&](double x) { return std::abs(phi.d2(x) / phi.d1(x)); };
  // Split on a uniform grid so the kinks of |.| sit inside short panels.
  constexpr int panels = 64;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = static_cast<double>(i) / panels;
    const double b = static_cast<double>(i + 1) / panels;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, a, b, 15, 1e-12);
  }
  DistortionEstimate d;
  d.c0 = total;
  return d;
}

/// Images phi^i(J), i < n, as arcs; throws ChainNotDisjoint if some image
/// wraps the circle or two of them overlap.
inline std::vector<Arc> chain_images(const CoveringMap& phi, const Arc& J, int n) {
  std::vector<Arc> images;
  images.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    const double l = lift_power(phi, J.left_lift(), i).value();
    const double r = lift_power(phi, J.right_lift(), i).value();
    if (!(r - l < 1.0)) throw Error(ErrorCode::ChainNotDisjoint, "phi^" + std::to_string(i) + "(J) wraps the circle");
    images.push_back(i == 0 ? J : Arc::from_lifts(l, r));
  }
  for (std::size_t a = 0; a < images.size(); ++a) {
    for (std::size_t b = a + 1; b < images.size(); ++b) {
      if (images[a].overlaps(images[b])) {
        throw Error(ErrorCode::ChainNotDisjoint,
                    "phi^" + std::to_string(a) + "(J) meets phi^" + std::to_string(b) + "(J)");
      }
    }
  }
  return images;
}

/// sup over pairs of a 64-point grid on J of log((phi^n)'(x) / (phi^n)'(y)).
inline double chain_distortion(const CoveringMap& phi, const Arc& J, int n) {
  if (n <= 0) return 0.0;
  (void)chain_images(phi, J, n);
  constexpr int samples = 64;
  double lo = INFINITY;
  double hi = -INFINITY;
  for (int i = 0; i < samples; ++i) {
    const double x = J.left_lift() + J.length() * static_cast<double>(i) / (samples - 1);
    const double v = log_multiplier(phi, CirclePoint(x), n);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

}  // namespace tcircle
