#pragma once

#include <boost/math/special_functions/cos_pi.hpp>
#include <boost/math/special_functions/sin_pi.hpp>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcircle/circle.hpp"
#include "tcircle/error.hpp"
#include "tcircle/roots.hpp"

namespace tcircle {

/// Root tolerance on lift coordinates used by every inverse computation.
inline constexpr double kTolRoot = 1e-13;

/// Grid used to certify monotonicity of a lift.
inline constexpr int kMonotoneGrid = 4096;

/// A lift value split as an integer part plus a fractional part in [0,1).
/// Keeping the two apart preserves the precision of the fractional part when
/// iterates grow like 2^n.
struct LiftValue {
  double whole = 0.0;
  double frac = 0.0;

  double value() const { return whole + frac; }
  CirclePoint point() const { return CirclePoint(frac); }
};

/// A degree-two circle covering fixing 0, given by the trigonometric lift
///
///   F(x) = 2x + sum_k a_k sin(2 pi k x) + sum_k b_k (1 - cos(2 pi k x)),
///
/// k = 1, 2, ... F(x+1) = F(x) + 2 and F(0) = 0 hold by construction;
/// monotonicity is checked on a grid when the map is built.
class CoveringMap {
 public:
  /// Builds the map and checks F' > 0 on a 4096-point grid and its midpoints.
  /// Throws NonMonotoneLift otherwise. Between grid points positivity is not
  /// certified.
  static CoveringMap trig(std::vector<double> a, std::vector<double> b) {
    CoveringMap m;
    m.a_ = std::move(a);
    m.b_ = std::move(b);
    for (double c : m.a_) {
      if (!std::isfinite(c)) throw Error(ErrorCode::InvalidInput, "non-finite coefficient");
    }
    for (double c : m.b_) {
      if (!std::isfinite(c)) throw Error(ErrorCode::InvalidInput, "non-finite coefficient");
    }
    for (int i = 0; i < 2 * kMonotoneGrid; ++i) {
      const double x = static_cast<double>(i) / (2.0 * kMonotoneGrid);
      if (!(m.d1(x) > 0.0)) {
        throw Error(ErrorCode::NonMonotoneLift,
                    "F'(" + std::to_string(x) + ") = " + std::to_string(m.d1(x)));
      }
    }
    return m;
  }

  const std::vector<double>& sin_coefficients() const { return a_; }
  const std::vector<double>& cos_coefficients() const { return b_; }
  std::string family() const { return "trig"; }

  /// The lift formula evaluated as written, without periodic reduction.
  double raw_lift(double x) const {
    double v = 2.0 * x;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      v += a_[i] * boost::math::sin_pi(2.0 * static_cast<double>(i + 1) * x);
    }
    for (std::size_t i = 0; i < b_.size(); ++i) {
      v += b_[i] * (1.0 - boost::math::cos_pi(2.0 * static_cast<double>(i + 1) * x));
    }
    return v;
  }

  /// F(x) for any real x, reduced to the fundamental domain first.
  double lift(double x) const {
    const double m = std::floor(x);
    return raw_lift(x - m) + 2.0 * m;
  }

  double d1(double x) const {
    x = wrap01(x);
    double v = 2.0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const double w = 2.0 * std::numbers::pi * static_cast<double>(i + 1);
      v += w * a_[i] * boost::math::cos_pi(2.0 * static_cast<double>(i + 1) * x);
    }
    for (std::size_t i = 0; i < b_.size(); ++i) {
      const double w = 2.0 * std::numbers::pi * static_cast<double>(i + 1);
      v += w * b_[i] * boost::math::sin_pi(2.0 * static_cast<double>(i + 1) * x);
    }
    return v;
  }

  double d2(double x) const {
    x = wrap01(x);
    double v = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const double w = 2.0 * std::numbers::pi * static_cast<double>(i + 1);
      v -= w * w * a_[i] * boost::math::sin_pi(2.0 * static_cast<double>(i + 1) * x);
    }
    for (std::size_t i = 0; i < b_.size(); ++i) {
      const double w = 2.0 * std::numbers::pi * static_cast<double>(i + 1);
      v += w * w * b_[i] * boost::math::cos_pi(2.0 * static_cast<double>(i + 1) * x);
    }
    return v;
  }

  /// F(x) split into whole and fractional parts, for x in [0,1).
  LiftValue step(double x) const {
    const double y = raw_lift(x);
    const double w = std::floor(y);
    double f = y - w;
    if (f >= 1.0) return {w + 1.0, 0.0};
    return {w, f};
  }

  /// The unique x in [0,1] with F(x) = target, for target in [0,2].
  /// The result depends on `target` alone, so equal targets give bitwise
  /// equal preimages.
  double solve(double target) const {
    if (!(target >= -kTolRoot && target <= 2.0 + kTolRoot)) {
      throw Error(ErrorCode::RootNotBracketed,
                  "lift target " + std::to_string(target) + " outside [0,2]");
    }
    if (target <= 0.0) return 0.0;
    if (target >= 2.0) return 1.0;
    auto r = hybrid_root([&](double x) { return raw_lift(x) - target; },
                         [&](double x) { return d1(x); }, 0.0, 1.0,
                         RootOptions{1e-9, 30, kTolRoot});
    if (!r) throw Error(ErrorCode::RootNotBracketed, "lift is not monotone on [0,1]");
    return *r;
  }

  /// F^{-1}(y) on the real line.
  double lift_inverse(double y) const {
    const double q = std::floor(y / 2.0);
    return solve(y - 2.0 * q) + q;
  }

  friend bool operator==(const CoveringMap&, const CoveringMap&) = default;

 private:
  CoveringMap() = default;

  std::vector<double> a_;
  std::vector<double> b_;
};

using MapPtr = std::shared_ptr<const CoveringMap>;

inline CoveringMap make_trig_map(std::vector<double> a, std::vector<double> b) {
  return CoveringMap::trig(std::move(a), std::move(b));
}

namespace families {

/// F(x) = 2x.
inline CoveringMap doubling() { return make_trig_map({}, {}); }

/// F(x) = 2x - sin(2 pi x)/(2 pi): F'(0) = 1, F''(0) = 0, F' > 1 elsewhere.
inline CoveringMap parabolic_doubling() {
  return make_trig_map({-1.0 / (2.0 * std::numbers::pi)}, {});
}

/// F(x) = 2x - c sin(2 pi x)/(2 pi): F'(0) = 2 - c. For c > 1 the origin
/// attracts and the associated action has an exceptional minimal set.
inline CoveringMap gapped(double c = 1.5) {
  return make_trig_map({-c / (2.0 * std::numbers::pi)}, {});
}

}  // namespace families

inline CirclePoint eval(const CoveringMap& phi, CirclePoint p) {
  return CirclePoint(phi.step(p.value()).frac);
}

inline double derivative(const CoveringMap& phi, CirclePoint p, int order) {
  if (order == 1) return phi.d1(p.value());
  if (order == 2) return phi.d2(p.value());
  throw Error(ErrorCode::InvalidInput, "derivative order must be 1 or 2");
}

/// The preimage of y on the given branch. Branch 0 solves F(x) = y and lies in
/// [0, m), branch 1 solves F(x) = y + 1 and lies in [m, 1), where m is the
/// nonzero preimage of 0.
inline CirclePoint inverse_branch(const CoveringMap& phi, CirclePoint y, int branch) {
  if (branch != 0 && branch != 1) {
    throw Error(ErrorCode::InvalidInput, "branch must be 0 or 1");
  }
  return CirclePoint(phi.solve(y.value() + branch));
}

/// F^n(x) for a real x, tracked as whole + fraction.
inline LiftValue lift_power(const CoveringMap& phi, double x, int n) {
  const double m = std::floor(x);
  double frac = x - m;
  double whole = m;
  for (int i = 0; i < n; ++i) {
    const LiftValue s = phi.step(frac);
    whole = 2.0 * whole + s.whole;
    frac = s.frac;
  }
  return {whole, frac};
}

/// F^n(x) together with the chain-rule multiplier (F^n)'(x).
struct LiftIterate {
  LiftValue value;
  double multiplier = 1.0;
};

inline LiftIterate lift_power_with_multiplier(const CoveringMap& phi, double x, int n) {
  const double m = std::floor(x);
  double frac = x - m;
  double whole = m;
  double mult = 1.0;
  for (int i = 0; i < n; ++i) {
    mult *= phi.d1(frac);
    const LiftValue s = phi.step(frac);
    whole = 2.0 * whole + s.whole;
    frac = s.frac;
  }
  return {{whole, frac}, mult};
}

inline std::pair<CirclePoint, double> iterate_with_multiplier(const CoveringMap& phi,
                                                              CirclePoint p, int n) {
  if (n < 0) throw Error(ErrorCode::InvalidInput, "iteration count must be nonnegative");
  const LiftIterate it = lift_power_with_multiplier(phi, p.value(), n);
  return {it.value.point(), it.multiplier};
}

/// log (F^n)'(x); stays finite where the plain product would overflow.
inline double log_multiplier(const CoveringMap& phi, CirclePoint p, int n) {
  double frac = p.value();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += std::log(phi.d1(frac));
    frac = phi.step(frac).frac;
  }
  return acc;
}

struct SmoothnessReport {
  bool fixes_zero = false;
  bool unit_derivative_at_zero = false;
  bool flat_second_at_zero = false;
  bool monotone = false;
  bool degree_two = false;

  bool valid() const { return monotone && degree_two && fixes_zero; }
};

inline SmoothnessReport smoothness_report(const CoveringMap& phi, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidInput, "tolerance must be positive");
  SmoothnessReport r;
  r.fixes_zero = std::abs(phi.raw_lift(0.0)) <= tol;
  r.unit_derivative_at_zero = std::abs(phi.d1(0.0) - 1.0) <= tol;
  r.flat_second_at_zero = std::abs(phi.d2(0.0)) <= tol;
  r.degree_two = std::abs(phi.raw_lift(1.0) - phi.raw_lift(0.0) - 2.0) <= tol;
  r.monotone = true;
  for (int i = 0; i < 2 * kMonotoneGrid && r.monotone; ++i) {
    r.monotone = phi.d1(static_cast<double>(i) / (2.0 * kMonotoneGrid)) > 0.0;
  }
  return r;
}

// JSON form: {"family":"trig","a":[...],"b":[...]}

inline nlohmann::json map_to_json(const CoveringMap& phi) {
  return nlohmann::json{{"family", phi.family()},
                        {"a", phi.sin_coefficients()},
                        {"b", phi.cos_coefficients()}};
}

inline CoveringMap map_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
    throw Error(ErrorCode::InvalidInput, "map JSON needs a \"family\" string");
  }
  if (j["family"].get<std::string>() != "trig") {
    throw Error(ErrorCode::InvalidInput,
                "unknown map family \"" + j["family"].get<std::string>() + "\"");
  }
  auto coeffs = [&](const char* key) {
    std::vector<double> out;
    if (!j.contains(key)) return out;
    if (!j[key].is_array()) {
      throw Error(ErrorCode::InvalidInput, std::string("field \"") + key + "\" must be an array");
    }
    for (const auto& v : j[key]) {
      if (!v.is_number()) {
        throw Error(ErrorCode::InvalidInput, std::string("field \"") + key + "\" must hold numbers");
      }
      out.push_back(v.get<double>());
    }
    return out;
  };
  return make_trig_map(coeffs("a"), coeffs("b"));
}

}  // namespace tcircle
