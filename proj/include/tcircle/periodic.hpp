#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcircle/circle.hpp"
#include "tcircle/covering_map.hpp"
#include "tcircle/dyadic.hpp"

namespace tcircle {

/// Multipliers within this distance of 1 are parabolic candidates.
inline constexpr double kTolMult = 1e-6;

/// Largest period scanned by find_periodic_points.
inline constexpr int kMaxPeriod = 14;

/// A root of phi^s counts as a lower-period point when phi^(s/q) moves it by
/// at most this much. Periodic points of period <= 14 are ~1e-8 apart at the
/// closest for the built-in families, so this cannot merge distinct orbits.
inline constexpr double kSamePointTol = 1e-9;

enum class PeriodicClass { hyperbolic_repelling, attracting, parabolic_candidate };

inline const char* to_string(PeriodicClass c) {
  switch (c) {
    case PeriodicClass::hyperbolic_repelling: return "hyperbolic_repelling";
    case PeriodicClass::attracting: return "attracting";
    case PeriodicClass::parabolic_candidate: return "parabolic_candidate";
  }
  return "unknown";
}

inline PeriodicClass classify_multiplier(double multiplier) {
  if (multiplier > 1.0 + kTolMult) return PeriodicClass::hyperbolic_repelling;
  if (multiplier < 1.0 - kTolMult) return PeriodicClass::attracting;
  return PeriodicClass::parabolic_candidate;
}

struct PeriodicPoint {
  CirclePoint location;
  int period = 1;            // fundamental period
  double multiplier = 1.0;   // (phi^s)'(p)
  std::int64_t offset = 0;   // F^s(p) = p + offset
  PeriodicClass classification = PeriodicClass::hyperbolic_repelling;
  bool left_repelling = false;
  bool right_repelling = false;
  bool exact = false;        // parabolicity known exactly, not only numerically
};

/// A fixed point of phi^s with its lift offset: F^s(x) = x + offset.
struct IterateFixedPoint {
  double x = 0.0;
  std::int64_t offset = 0;
};

/// F^s(x) - x - k, evaluated without forming the large lift value.
inline double displacement_from(const CoveringMap& phi, double x, int s, std::int64_t k) {
  const LiftValue v = lift_power(phi, x, s);
  return (v.frac - x) + (v.whole - static_cast<double>(k));
}

/// All x in [0,1) with F^s(x) - x an integer, sorted.
///
/// H(x) = F^s(x) - x runs from 0 to 2^s - 1 over [0,1]. Each of 2^(s+6) cells
/// is scanned for sign changes of H - k, and each change is polished by the
/// hybrid solver. A root sitting exactly on a cell's left edge is recorded
/// once. Tangential roots away from grid points are not detected.
inline std::vector<IterateFixedPoint> fixed_points_of_iterate(const CoveringMap& phi, int s) {
  if (s < 1 || s > kMaxPeriod) {
    throw Error(ErrorCode::DepthExceeded, "period " + std::to_string(s) + " outside [1," +
                                              std::to_string(kMaxPeriod) + "]");
  }
  const std::uint64_t cells = std::uint64_t{1} << (s + 6);
  std::vector<double> xs(cells + 1);
  std::vector<LiftValue> hs(cells + 1);
  for (std::uint64_t i = 0; i <= cells; ++i) {
    xs[i] = static_cast<double>(i) / static_cast<double>(cells);
    hs[i] = lift_power(phi, xs[i], s);
  }
  auto h_minus = [&](std::uint64_t i, std::int64_t k) {
    return (hs[i].frac - xs[i]) + (hs[i].whole - static_cast<double>(k));
  };

  std::vector<IterateFixedPoint> out;
  for (std::uint64_t i = 0; i < cells; ++i) {
    const double h0 = hs[i].value() - xs[i];
    const double h1 = hs[i + 1].value() - xs[i + 1];
    const auto k_lo = static_cast<std::int64_t>(std::floor(std::min(h0, h1))) - 1;
    const auto k_hi = static_cast<std::int64_t>(std::ceil(std::max(h0, h1))) + 1;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
      const double a = h_minus(i, k);
      const double b = h_minus(i + 1, k);
      if (a == 0.0) {
        out.push_back({xs[i], k});
      } else if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) {
        auto root = hybrid_root(
            [&](double x) { return displacement_from(phi, x, s, k); },
            [&](double x) { return lift_power_with_multiplier(phi, x, s).multiplier - 1.0; },
            xs[i], xs[i + 1], RootOptions{1e-9, 30, kTolRoot});
        if (root && *root < 1.0) out.push_back({*root, k});
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const IterateFixedPoint& a, const IterateFixedPoint& b) { return a.x < b.x; });
  return out;
}

namespace detail {

inline std::vector<int> prime_factors(int s) {
  std::vector<int> out;
  for (int q = 2; q * q <= s; ++q) {
    if (s % q == 0) {
      out.push_back(q);
      while (s % q == 0) s /= q;
    }
  }
  if (s > 1) out.push_back(s);
  return out;
}

inline bool has_fundamental_period(const CoveringMap& phi, double x, int s) {
  for (int q : prime_factors(s)) {
    const auto [y, mult] = iterate_with_multiplier(phi, CirclePoint(x), s / q);
    (void)mult;
    if (distance(y, CirclePoint(x)) <= kSamePointTol) return false;
  }
  return true;
}

}  // namespace detail

/// Classifies a fixed point of phi^s, probing the sides of parabolic ones.
inline PeriodicPoint make_periodic_point(const CoveringMap& phi, double x, int s,
                                         std::int64_t offset, double probe) {
  PeriodicPoint p;
  p.location = CirclePoint(x);
  p.period = s;
  p.offset = offset;
  p.multiplier = lift_power_with_multiplier(phi, x, s).multiplier;
  p.classification = classify_multiplier(p.multiplier);
  switch (p.classification) {
    case PeriodicClass::hyperbolic_repelling:
      p.left_repelling = p.right_repelling = true;
      break;
    case PeriodicClass::attracting:
      p.left_repelling = p.right_repelling = false;
      break;
    case PeriodicClass::parabolic_candidate:
      p.right_repelling = displacement_from(phi, x + probe, s, offset) > 0.0;
      p.left_repelling = displacement_from(phi, x - probe, s, offset) < 0.0;
      // The origin of a trigonometric lift with F'(0) = 1 is parabolic exactly.
      p.exact = x == 0.0 && s == 1 &&
                std::abs(phi.d1(0.0) - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon();
      break;
  }
  return p;
}

/// Periodic points of every fundamental period s <= s_max, ordered by period
/// and then by position. Each point of an orbit is listed.
inline std::vector<PeriodicPoint> find_periodic_points(const CoveringMap& phi, int s_max) {
  if (s_max > kMaxPeriod) {
    throw Error(ErrorCode::DepthExceeded, "s_max " + std::to_string(s_max) + " exceeds " +
                                              std::to_string(kMaxPeriod));
  }
  std::vector<PeriodicPoint> out;
  for (int s = 1; s <= s_max; ++s) {
    const auto roots = fixed_points_of_iterate(phi, s);
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (!detail::has_fundamental_period(phi, roots[i].x, s)) continue;
      // Keep the side probe well inside the gap to the neighbouring roots.
      double gap = 1.0;
      if (roots.size() > 1) {
        const double prev = roots[(i + roots.size() - 1) % roots.size()].x;
        const double next = roots[(i + 1) % roots.size()].x;
        gap = std::min(wrap01(roots[i].x - prev), wrap01(next - roots[i].x));
        if (gap == 0.0) gap = 1.0;
      }
      out.push_back(make_periodic_point(phi, roots[i].x, s, roots[i].offset,
                                        std::min(1e-4, gap / 4.0)));
    }
  }
  return out;
}

/// The orbit of a periodic point, starting at the point itself.
inline std::vector<CirclePoint> orbit_of(const CoveringMap& phi, const PeriodicPoint& p) {
  std::vector<CirclePoint> out{p.location};
  for (int i = 1; i < p.period; ++i) out.push_back(eval(phi, out.back()));
  return out;
}

/// Groups periodic points into orbits; returns one representative (the
/// leftmost point) per orbit.
inline std::vector<PeriodicPoint> orbit_representatives(const CoveringMap& phi,
                                                        const std::vector<PeriodicPoint>& pts) {
  std::vector<PeriodicPoint> reps;
  std::vector<bool> used(pts.size(), false);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (used[i]) continue;
    const auto orbit = orbit_of(phi, pts[i]);
    PeriodicPoint rep = pts[i];
    for (std::size_t j = i; j < pts.size(); ++j) {
      if (used[j] || pts[j].period != pts[i].period) continue;
      for (const auto& q : orbit) {
        if (distance(q, pts[j].location) <= kSamePointTol) {
          used[j] = true;
          if (pts[j].location < rep.location) rep = pts[j];
          break;
        }
      }
    }
    reps.push_back(rep);
  }
  return reps;
}

struct PeriodicInterval {
  Arc arc;
  int period = 1;
  bool maximal = false;
};

/// Maximal proper intervals mapped onto themselves by some phi^s, s <= s_max.
///
/// For each s the fixed points of phi^s are ordered around the circle; the
/// arc between two consecutive ones is phi^s-invariant exactly when their
/// lift offsets agree, so maximal runs of equal offsets give the candidates.
/// An arc found again at a multiple of its period, or inside another
/// candidate, is dropped.
inline std::vector<PeriodicInterval> maximal_periodic_intervals(const CoveringMap& phi, int s_max) {
  std::vector<PeriodicInterval> candidates;
  for (int s = 1; s <= s_max; ++s) {
    const auto fp = fixed_points_of_iterate(phi, s);
    const std::size_t m = fp.size();
    if (m < 2) continue;
    const auto wrap_shift = static_cast<std::int64_t>((std::uint64_t{1} << s) - 1);
    // Start just after an offset break, then unroll once around the circle
    // so that runs never straddle the starting point.
    std::size_t start = m;
    for (std::size_t i = 0; i < m; ++i) {
      const std::int64_t next = i + 1 < m ? fp[i + 1].offset : fp[0].offset + wrap_shift;
      if (next != fp[i].offset) {
        start = (i + 1) % m;
        break;
      }
    }
    if (start == m) continue;
    std::vector<IterateFixedPoint> seq;
    for (std::size_t i = 0; i < m; ++i) {
      const bool wrapped = start + i >= m;
      const auto& f = fp[(start + i) % m];
      seq.push_back({f.x + (wrapped ? 1.0 : 0.0), f.offset + (wrapped ? wrap_shift : 0)});
    }
    for (std::size_t a = 0; a < m;) {
      std::size_t b = a;
      while (b + 1 < m && seq[b + 1].offset == seq[a].offset) ++b;
      if (b > a && seq[b].x - seq[a].x < 1.0) {
        const double left = seq[a].x;
        const double right = seq[b].x;
        // F^s must move both ends by the same integer.
        const double kl = lift_power(phi, left, s).value() - left;
        const double kr = lift_power(phi, right, s).value() - right;
        if (std::abs(kl - kr) <= 1e-9) candidates.push_back({Arc::from_lifts(left, right), s, false});
      }
      a = b + 1;
    }
  }
  std::vector<PeriodicInterval> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < candidates.size() && !dominated; ++j) {
      if (i == j) continue;
      const bool inside = candidates[j].arc.encloses(candidates[i].arc, 1e-12);
      const bool same = inside && candidates[i].arc.encloses(candidates[j].arc, 1e-12);
      dominated = same ? j < i : inside;
    }
    if (!dominated) {
      out.push_back(candidates[i]);
      out.back().maximal = true;
    }
  }
  std::sort(out.begin(), out.end(), [](const PeriodicInterval& a, const PeriodicInterval& b) {
    return a.arc.left() < b.arc.left();
  });
  return out;
}

/// Symbolic coding of p against the doubling map: bit i is 0 when phi^i(p)
/// lies in [0, m), m the nonzero preimage of 0, and 1 otherwise.
inline CirclePoint semiconjugacy(const CoveringMap& phi, CirclePoint p, int depth) {
  if (depth < 0 || depth > 48) throw Error(ErrorCode::DepthExceeded, "semiconjugacy depth must be in [0,48]");
  const double m = phi.solve(1.0);
  double acc = 0.0;
  double scale = 0.5;
  CirclePoint x = p;
  for (int i = 0; i < depth; ++i) {
    if (x.value() >= m) acc += scale;
    scale *= 0.5;
    x = eval(phi, x);
  }
  return CirclePoint(acc);
}

struct MinimalityResult {
  bool minimal = true;
  std::vector<PeriodicInterval> witnesses;  // empty when minimal
  int s_max = 0;
  unsigned density_depth = 0;
  double max_grid_gap = 0.0;  // largest spacing of phi^{-d}(0)
};

/// Largest circular spacing of the degree-d preimage grid of 0.
inline double grid_max_gap(const CoveringMap& phi, unsigned depth) {
  const auto grid = preimage_grid_lifts(phi, depth);
  double gap = 1.0 - grid.back() + grid.front();
  for (std::size_t i = 1; i < grid.size(); ++i) gap = std::max(gap, grid[i] - grid[i - 1]);
  return gap;
}

/// Exceptional if a periodic interval of period <= s_max exists; otherwise
/// minimal at this depth, with the density of the backward orbit of 0
/// recorded. Neither answer is a proof beyond the scanned depth.
inline MinimalityResult minimality_test(const CoveringMap& phi, int s_max, unsigned density_depth = 10) {
  MinimalityResult r;
  r.s_max = s_max;
  r.density_depth = density_depth;
  r.witnesses = maximal_periodic_intervals(phi, s_max);
  r.minimal = r.witnesses.empty();
  r.max_grid_gap = grid_max_gap(phi, density_depth);
  return r;
}

/// Smallest k <= k_max with (phi^k)'(p) >= lambda0.
inline std::optional<int> expansion_time(const CoveringMap& phi, CirclePoint p, double lambda0, int k_max) {
  if (!(lambda0 > 1.0)) throw Error(ErrorCode::InvalidInput, "lambda0 must exceed 1");
  double mult = 1.0;
  double x = p.value();
  for (int k = 1; k <= k_max; ++k) {
    mult *= phi.d1(x);
    if (mult >= lambda0) return k;
    x = phi.step(x).frac;
  }
  return std::nullopt;
}

/// Parabolic periodic points that no iterate of phi expands within k_max
/// steps; these are the only points that can be nonexpandable.
inline std::vector<PeriodicPoint> nonexpandable_candidates(const CoveringMap& phi, int s_max, int k_max) {
  std::vector<PeriodicPoint> out;
  for (const auto& p : find_periodic_points(phi, s_max)) {
    if (p.classification != PeriodicClass::parabolic_candidate) continue;
    if (!expansion_time(phi, p.location, 1.0 + kTolMult, k_max)) out.push_back(p);
  }
  return out;
}

}  // namespace tcircle
