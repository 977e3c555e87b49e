#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tcircle/circle.hpp"
#include "tcircle/covering_map.hpp"

namespace tcircle {

/// Deepest dyadic degree the library will construct.
inline constexpr unsigned kMaxDegree = 24;

inline void require_degree(unsigned n) {
  if (n > kMaxDegree) {
    throw Error(ErrorCode::DepthExceeded,
                "degree " + std::to_string(n) + " exceeds " + std::to_string(kMaxDegree));
  }
}

// Points of phi^{-n}(0) are addressed by (n, k), k in [0, 2^n]; (n, 2^n) is
// the point 0 seen from the left, i.e. lift value 1. The value of (n, k) with
// chart parameter t is
//
//   solve(bit_{n-1}(k) + solve(bit_{n-2}(k) + ... solve(bit_0(k) + t))),
//
// where solve inverts the lift on [0,1]. Because solve depends on its target
// only, (n, k) and (n+1, 2k) produce bitwise identical doubles, and the right
// end of one interval equals the left end of the next. Endpoint equality is
// therefore combinatorial even though the values are computed numerically.

/// The x in the degree-n interval k with phi^n(x) = k + t, as a lift in [0,1].
inline double chart_point(const CoveringMap& phi, unsigned n, std::uint64_t k, double t) {
  double v = t;
  for (unsigned j = 0; j < n; ++j) {
    v = phi.solve(static_cast<double>((k >> j) & 1U) + v);
  }
  return v;
}

/// Lift value of grid point (n, k), k in [0, 2^n].
inline double grid_point(const CoveringMap& phi, unsigned n, std::uint64_t k) {
  require_degree(n);
  const std::uint64_t count = std::uint64_t{1} << n;
  if (k > count) throw Error(ErrorCode::OutOfDomain, "grid index out of range");
  if (k == count) return 1.0;
  return chart_point(phi, n, k, 0.0);
}

/// All 2^n points of phi^{-n}(0) as lifts in [0,1), sorted. Built level by
/// level from {0} with both inverse branches.
inline std::vector<double> preimage_grid_lifts(const CoveringMap& phi, unsigned n) {
  require_degree(n);
  std::vector<double> grid{0.0};
  for (unsigned j = 1; j <= n; ++j) {
    std::vector<double> next(grid.size() * 2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      next[i] = phi.solve(grid[i]);
      next[i + grid.size()] = phi.solve(1.0 + grid[i]);
    }
    grid = std::move(next);
  }
  return grid;
}

inline std::vector<CirclePoint> preimage_grid(const CoveringMap& phi, unsigned n) {
  const auto lifts = preimage_grid_lifts(phi, n);
  std::vector<CirclePoint> out;
  out.reserve(lifts.size());
  for (double v : lifts) out.emplace_back(v);
  return out;
}

/// Closed interval between consecutive points of phi^{-n}(0). Identity is
/// the address (degree, index); `left`/`right` are lifts in [0,1].
struct DyadicInterval {
  unsigned degree = 0;
  std::uint64_t index = 0;
  double left = 0.0;
  double right = 1.0;

  double length() const { return right - left; }

  /// Position of the endpoints as numerators over 2^kMaxDegree.
  std::uint64_t left_numerator() const { return index << (kMaxDegree - degree); }
  std::uint64_t right_numerator() const { return (index + 1) << (kMaxDegree - degree); }

  bool contains(double lift) const { return lift >= left && lift <= right; }

  Arc arc() const { return Arc::from_lifts(left, right); }

  bool same_address(const DyadicInterval& o) const {
    return degree == o.degree && index == o.index;
  }
};

inline DyadicInterval dyadic_interval(const CoveringMap& phi, unsigned n, std::uint64_t k) {
  require_degree(n);
  if (k >= (std::uint64_t{1} << n)) throw Error(ErrorCode::OutOfDomain, "interval index out of range");
  return {n, k, grid_point(phi, n, k), grid_point(phi, n, k + 1)};
}

/// The two degree-(n+1) children tiling I.
inline std::pair<DyadicInterval, DyadicInterval> split(const CoveringMap& phi,
                                                       const DyadicInterval& I) {
  if (I.degree >= kMaxDegree) {
    throw Error(ErrorCode::DepthExceeded, "cannot split an interval of degree " +
                                              std::to_string(I.degree));
  }
  const unsigned n = I.degree + 1;
  const double mid = grid_point(phi, n, 2 * I.index + 1);
  return {DyadicInterval{n, 2 * I.index, I.left, mid},
          DyadicInterval{n, 2 * I.index + 1, mid, I.right}};
}

enum class ChartDirection { forward, inverse };

/// phi_I(p) = phi^n(p) - k in [0,1] for p in I; the endpoints map to 0 and 1.
inline double chart_forward(const CoveringMap& phi, const DyadicInterval& I, CirclePoint p) {
  double x = p.value();
  if (!I.contains(x)) {
    if (x == 0.0 && I.right == 1.0) {
      x = 1.0;
    } else {
      throw Error(ErrorCode::OutOfDomain, "point " + std::to_string(p.value()) +
                                              " is outside the dyadic interval");
    }
  }
  if (x == I.left) return 0.0;
  if (x == I.right) return 1.0;
  const LiftValue v = lift_power(phi, x, static_cast<int>(I.degree));
  const double t = (v.whole - static_cast<double>(I.index)) + v.frac;
  return std::clamp(t, 0.0, 1.0);
}

/// phi_I^{-1}(t) as a lift value inside I.
inline double chart_inverse(const CoveringMap& phi, const DyadicInterval& I, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::OutOfDomain, "chart parameter " + std::to_string(t) + " outside [0,1]");
  }
  if (t == 0.0) return I.left;
  if (t == 1.0) return I.right;
  return std::clamp(chart_point(phi, I.degree, I.index, t), I.left, I.right);
}

inline double chart_apply(const CoveringMap& phi, const DyadicInterval& I, double value,
                          ChartDirection direction) {
  return direction == ChartDirection::forward ? chart_forward(phi, I, CirclePoint(value))
                                              : chart_inverse(phi, I, value);
}

/// A sequence of dyadic intervals in counterclockwise order, starting at 0.
class DyadicPartition {
 public:
  DyadicPartition() = default;
  explicit DyadicPartition(std::vector<DyadicInterval> intervals)
      : intervals_(std::move(intervals)) {
    cover_ = !tiling_defect().has_value();
  }

  const std::vector<DyadicInterval>& intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  const DyadicInterval& operator[](std::size_t i) const { return intervals_[i]; }

  /// True when the intervals chain endpoint to endpoint from 0 around to 1.
  bool cover() const { return cover_; }

  /// Index of the first interval that breaks the tiling, with a reason.
  std::optional<std::pair<std::size_t, std::string>> tiling_defect() const {
    if (intervals_.empty()) return std::pair<std::size_t, std::string>{0, "empty partition"};
    std::uint64_t expected = 0;
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      const auto& I = intervals_[i];
      if (I.degree > kMaxDegree || I.index >= (std::uint64_t{1} << I.degree)) {
        return std::pair<std::size_t, std::string>{i, "invalid dyadic address"};
      }
      if (I.left_numerator() != expected) {
        return std::pair<std::size_t, std::string>{i, "does not start where the previous piece ends"};
      }
      expected = I.right_numerator();
    }
    if (expected != (std::uint64_t{1} << kMaxDegree)) {
      return std::pair<std::size_t, std::string>{intervals_.size() - 1, "does not close up at 1"};
    }
    return std::nullopt;
  }

  double total_length() const {
    double s = 0.0;
    for (const auto& I : intervals_) s += I.length();
    return s;
  }

  /// Index of the piece whose half-open span [left, right) holds x.
  std::size_t locate(double x) const {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                               [](double v, const DyadicInterval& I) { return v < I.left; });
    if (it == intervals_.begin()) return 0;
    return static_cast<std::size_t>(std::distance(intervals_.begin(), it)) - 1;
  }

 private:
  std::vector<DyadicInterval> intervals_;
  bool cover_ = false;
};

/// The 2^n degree-n intervals.
inline DyadicPartition uniform_partition(const CoveringMap& phi, unsigned n) {
  const auto grid = preimage_grid_lifts(phi, n);
  std::vector<DyadicInterval> out;
  out.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.push_back({n, k, grid[k], k + 1 < grid.size() ? grid[k + 1] : 1.0});
  }
  return DyadicPartition(std::move(out));
}

/// CSV with columns degree,index,left,right.
inline void write_grid_csv(std::ostream& os, const CoveringMap& phi, unsigned n) {
  const DyadicPartition P = uniform_partition(phi, n);
  os << "degree,index,left,right\n";
  char buf[96];
  for (const auto& I : P.intervals()) {
    std::snprintf(buf, sizeof buf, "%u,%llu,%.17g,%.17g\n", I.degree,
                  static_cast<unsigned long long>(I.index), I.left, I.right);
    os << buf;
  }
}

}  // namespace tcircle
