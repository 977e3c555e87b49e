#pragma once

// Independent reference computations used by the tests. Nothing here goes
// through the dyadic or Thompson code paths of the library.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tcircle/covering_map.hpp"
#include "tcircle/thompson.hpp"

namespace oracle {

using Address = std::pair<unsigned, std::uint64_t>;

struct RawElement {
  std::vector<Address> source;
  std::vector<Address> target;
  std::size_t offset = 0;
};

/// A random dyadic partition with exactly r pieces, no piece deeper than
/// max_degree. r must be between 1 and 2^max_degree.
inline std::vector<Address> random_partition(std::mt19937_64& rng, std::size_t r, unsigned max_degree) {
  std::vector<Address> parts{{0u, 0u}};
  while (parts.size() < r) {
    std::vector<std::size_t> splittable;
    for (std::size_t i = 0; i < parts.size(); ++i)
      if (parts[i].first < max_degree) splittable.push_back(i);
    std::uniform_int_distribution<std::size_t> pick(0, splittable.size() - 1);
    const std::size_t i = splittable[pick(rng)];
    const auto [d, k] = parts[i];
    parts[i] = {d + 1, 2 * k};
    parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(i) + 1, Address{d + 1, 2 * k + 1});
  }
  return parts;
}

inline RawElement random_raw_element(std::mt19937_64& rng, unsigned max_degree = 4) {
  std::uniform_int_distribution<std::size_t> count(1, std::size_t{1} << max_degree);
  const std::size_t r = count(rng);
  RawElement e;
  e.source = random_partition(rng, r, max_degree);
  e.target = random_partition(rng, r, max_degree);
  std::uniform_int_distribution<std::size_t> off(0, r - 1);
  e.offset = off(rng);
  return e;
}

inline tcircle::ThompsonElement to_element(const tcircle::MapPtr& map, const RawElement& e) {
  return tcircle::element_from_addresses(map, e.source, e.target, e.offset);
}

/// Piecewise-affine evaluation for the doubling map, where the piece (n, k)
/// is [k/2^n, (k+1)/2^n] and every chart is affine.
struct AffineResult {
  double y;
  double slope;
};

inline AffineResult affine_eval(const RawElement& e, double x) {
  const std::size_t r = e.source.size();
  for (std::size_t j = 0; j < r; ++j) {
    const auto [n, k] = e.source[j];
    const double a = std::ldexp(static_cast<double>(k), -static_cast<int>(n));
    const double b = std::ldexp(static_cast<double>(k + 1), -static_cast<int>(n));
    if (x >= a && x < b) {
      const auto [m, l] = e.target[(j + e.offset) % r];
      const double c = std::ldexp(static_cast<double>(l), -static_cast<int>(m));
      const double slope = std::ldexp(1.0, static_cast<int>(n) - static_cast<int>(m));
      double y = c + (x - a) * slope;
      if (y >= 1.0) y -= 1.0;
      return {y, slope};
    }
  }
  return {NAN, NAN};
}

/// Root of an increasing function on [lo, hi] by plain bisection.
template <class F>
double bisect(F f, double lo, double hi, int iterations = 200) {
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Central difference of a function of one variable.
template <class F>
double central_difference(F f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Signed distance between circle values, in (-1/2, 1/2].
inline double circle_diff(double a, double b) {
  double d = a - b;
  d -= std::round(d);
  return d;
}

inline std::string maps_dir() { return TCIRCLE_MAPS_DIR; }

}  // namespace oracle
