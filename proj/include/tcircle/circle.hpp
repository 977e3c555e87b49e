#pragma once

#include <cmath>
#include <compare>

#include "tcircle/error.hpp"

namespace tcircle {

/// Reduce a real to [0,1). Values that round up to 1 are sent to 0.
inline double wrap01(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;
  return r;
}

/// A point of the circle R/Z in additive notation.
class CirclePoint {
 public:
  constexpr CirclePoint() = default;
  explicit CirclePoint(double v) : x_(wrap01(v)) {}

  double value() const { return x_; }

  friend bool operator==(const CirclePoint&, const CirclePoint&) = default;
  friend auto operator<=>(const CirclePoint&, const CirclePoint&) = default;

 private:
  double x_ = 0.0;
};

/// Shortest distance along the circle, in [0, 1/2].
inline double distance(CirclePoint a, CirclePoint b) {
  const double d = std::abs(a.value() - b.value());
  return std::min(d, 1.0 - d);
}

/// Signed displacement from `from` to `to`, taken in (-1/2, 1/2].
inline double displacement(CirclePoint from, CirclePoint to) {
  double d = to.value() - from.value();
  if (d > 0.5) d -= 1.0;
  if (d <= -0.5) d += 1.0;
  return d;
}

/// Counterclockwise offset (p - a) mod 1.
inline double ccw_offset(CirclePoint a, CirclePoint p) { return wrap01(p.value() - a.value()); }

/// Open arc (left, right) traversed counterclockwise. The length is kept
/// explicitly so that arcs much shorter than the spacing of doubles near 1
/// survive the round trip through circle coordinates.
class Arc {
 public:
  Arc() = default;

  /// Arc starting at `left` with the given length in (0, 1).
  static Arc from_left(CirclePoint left, double length) {
    if (!(length > 0.0 && length < 1.0)) {
      throw Error(ErrorCode::InvalidInput, "arc length must lie in (0,1)");
    }
    Arc a;
    a.left_ = left;
    a.length_ = length;
    return a;
  }

  /// Arc between two lift values with 0 < right - left < 1.
  static Arc from_lifts(double left, double right) {
    return from_left(CirclePoint(left), right - left);
  }

  /// Arc between two circle points, measured counterclockwise.
  static Arc between(CirclePoint left, CirclePoint right) {
    return from_left(left, ccw_offset(left, right));
  }

  CirclePoint left() const { return left_; }
  CirclePoint right() const { return CirclePoint(left_.value() + length_); }
  double left_lift() const { return left_.value(); }
  double right_lift() const { return left_.value() + length_; }
  double length() const { return length_; }

  /// Membership in the open arc.
  bool contains(CirclePoint p) const {
    if (p == left_) return false;
    return ccw_offset(left_, p) < length_;
  }

  /// Membership in the closed arc.
  bool contains_closed(CirclePoint p) const {
    return p == left_ || ccw_offset(left_, p) <= length_ ||
           distance(p, right()) == 0.0;
  }

  /// True if `other` lies inside this arc's closure, up to `tol` at the ends.
  bool encloses(const Arc& other, double tol = 0.0) const {
    const double start = ccw_offset(left_, other.left_);
    const double from_start = start > 1.0 - tol ? start - 1.0 : start;
    return from_start >= -tol && from_start + other.length_ <= length_ + tol;
  }

  /// True if the open arcs share a point.
  bool overlaps(const Arc& other) const {
    return left_ == other.left_ || contains(other.left_) || other.contains(left_);
  }

  friend bool operator==(const Arc&, const Arc&) = default;

 private:
  CirclePoint left_;
  double length_ = 0.5;
};

}  // namespace tcircle
