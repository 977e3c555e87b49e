#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tcircle/circle.hpp"
#include "tcircle/covering_map.hpp"
#include "tcircle/periodic.hpp"

namespace tcircle {

/// Deepest pullback used for the exceptional set.
inline constexpr int kMaxLambdaDepth = 16;

/// Node budget for pullback trees.
inline constexpr std::size_t kPullbackBudget = std::size_t{1} << 16;

/// The two components of phi^{-1}(arc).
inline std::array<Arc, 2> preimage_arcs(const CoveringMap& phi, const Arc& arc) {
  std::array<Arc, 2> out;
  const double l = arc.left_lift();
  const double r = arc.right_lift();
  for (int j = 0; j < 2; ++j) {
    const double a = phi.lift_inverse(l + j);
    const double b = phi.lift_inverse(r + j);
    out[static_cast<std::size_t>(j)] = Arc::from_lifts(a, b);
  }
  return out;
}

/// Both preimages of a point.
inline std::array<CirclePoint, 2> preimages(const CoveringMap& phi, CirclePoint y) {
  return {inverse_branch(phi, y, 0), inverse_branch(phi, y, 1)};
}

struct Gap {
  Arc arc;
  int birth = 0;  // first depth at which the gap appears
  int base = 0;   // index of the maximal periodic interval it maps onto
};

/// Finite-depth picture of the exceptional set: the complement of the gaps
/// phi^{-n}(I_1 u ... u I_r), n <= depth.
struct LambdaApprox {
  int depth = 0;
  std::vector<PeriodicInterval> intervals;  // the I_j
  std::vector<Gap> gaps;                    // sorted by left endpoint
  double leb_estimate = 1.0;

  /// Left endpoints of gaps (the set L), sorted.
  std::vector<double> left_endpoints() const {
    std::vector<double> out;
    out.reserve(gaps.size());
    for (const auto& g : gaps) out.push_back(g.arc.left().value());
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Right endpoints of gaps (the set R), sorted.
  std::vector<double> right_endpoints() const {
    std::vector<double> out;
    out.reserve(gaps.size());
    for (const auto& g : gaps) out.push_back(g.arc.right().value());
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Boundary points of the union of the maximal periodic intervals.
  std::vector<CirclePoint> boundary_points() const {
    std::vector<CirclePoint> out;
    for (const auto& I : intervals) {
      out.push_back(I.arc.left());
      out.push_back(I.arc.right());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// The gap whose open arc holds p, shrunk by `margin` at both ends.
  const Gap* gap_containing(CirclePoint p, double margin = 1e-12) const {
    // Gaps are disjoint and sorted by left end, so only the last gap starting
    // at or before p, or the wrapping last gap, can contain it.
    auto it = std::upper_bound(gaps.begin(), gaps.end(), p.value(),
                               [](double v, const Gap& g) { return v < g.arc.left().value(); });
    auto test = [&](const Gap& g) {
      const double off = ccw_offset(g.arc.left(), p);
      return off > margin && off < g.arc.length() - margin;
    };
    if (it != gaps.begin() && test(*std::prev(it))) return &*std::prev(it);
    if (!gaps.empty() && test(gaps.back())) return &gaps.back();
    return nullptr;
  }

  bool in_gap(CirclePoint p, double margin = 1e-12) const { return gap_containing(p, margin) != nullptr; }
};

/// Pulls the maximal periodic intervals back breadth first. Because each
/// interval's cycle is in the list, phi^{-n}(U) grows with n, so only the
/// gaps born at the previous level need to be pulled back; a preimage that
/// matches an existing gap is dropped and the existing values are kept, so
/// endpoints never move as the depth grows.
inline LambdaApprox lambda_approx(const CoveringMap& phi, const std::vector<PeriodicInterval>& intervals,
                                  int depth) {
  if (intervals.empty()) {
    throw Error(ErrorCode::NotExceptional, "no periodic interval: the action is minimal at this depth");
  }
  if (depth < 0 || depth > kMaxLambdaDepth) {
    throw Error(ErrorCode::DepthExceeded, "lambda depth must be in [0," + std::to_string(kMaxLambdaDepth) + "]");
  }
  LambdaApprox L;
  L.depth = depth;
  L.intervals = intervals;
  for (std::size_t j = 0; j < intervals.size(); ++j) L.gaps.push_back({intervals[j].arc, 0, static_cast<int>(j)});
  auto by_left = [](const Gap& a, const Gap& b) { return a.arc.left() < b.arc.left(); };
  std::sort(L.gaps.begin(), L.gaps.end(), by_left);

  auto known = [&](const Arc& a) {
    auto it = std::lower_bound(L.gaps.begin(), L.gaps.end(), a.left(),
                               [](const Gap& g, CirclePoint v) { return g.arc.left() < v; });
    for (auto cand : {it, it == L.gaps.begin() ? L.gaps.end() : std::prev(it)}) {
      if (cand == L.gaps.end()) continue;
      const double tol = 1e-3 * cand->arc.length();
      if (distance(cand->arc.left(), a.left()) <= tol && std::abs(cand->arc.length() - a.length()) <= tol) {
        return true;
      }
    }
    return false;
  };

  std::vector<Gap> frontier = L.gaps;
  for (int n = 1; n <= depth; ++n) {
    std::vector<Gap> born;
    for (const auto& g : frontier) {
      for (const Arc& a : preimage_arcs(phi, g.arc)) {
        if (!known(a)) born.push_back({a, n, g.base});
      }
    }
    std::sort(born.begin(), born.end(), by_left);
    // Two frontier gaps can share a preimage only if they coincide; dedupe anyway.
    born.erase(std::unique(born.begin(), born.end(),
                           [](const Gap& a, const Gap& b) {
                             return distance(a.arc.left(), b.arc.left()) <= 1e-3 * a.arc.length();
                           }),
               born.end());
    std::vector<Gap> merged;
    merged.reserve(L.gaps.size() + born.size());
    std::merge(L.gaps.begin(), L.gaps.end(), born.begin(), born.end(), std::back_inserter(merged), by_left);
    L.gaps = std::move(merged);
    frontier = std::move(born);
  }
  double total = 0.0;
  for (const auto& g : L.gaps) total += g.arc.length();
  L.leb_estimate = std::clamp(1.0 - total, 0.0, 1.0);
  return L;
}

inline LambdaApprox lambda_approx(const CoveringMap& phi, int depth, int s_max = 6) {
  return lambda_approx(phi, maximal_periodic_intervals(phi, s_max), depth);
}

/// CSV with columns left,right,birth.
inline void write_lambda_csv(std::ostream& os, const LambdaApprox& L) {
  os << "left,right,birth\n";
  char buf[96];
  for (const auto& g : L.gaps) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", g.arc.left().value(), g.arc.right().value(), g.birth);
    os << buf;
  }
}

enum class Side { left, right };

inline const char* to_string(Side s) { return s == Side::left ? "left" : "right"; }

/// Forward orbits of both endpoints stay out of the open arc for `horizon`
/// steps. An orbit that reaches one of the `terminal` points (a periodic
/// cycle) is finished by checking that cycle, since repelling cycles cannot
/// be followed numerically for long.
inline bool is_nice(const CoveringMap& phi, const Arc& arc, int horizon = 100,
                    const std::vector<CirclePoint>& terminal = {}) {
  const std::vector<CirclePoint> ends{arc.left(), arc.right()};
  for (CirclePoint x : ends) {
    for (int i = 1; i <= horizon; ++i) {
      x = eval(phi, x);
      const auto hit = std::find_if(terminal.begin(), terminal.end(),
                                    [&](CirclePoint t) { return distance(t, x) <= 1e-10; });
      if (hit != terminal.end()) {
        for (CirclePoint t : terminal) {
          if (arc.contains(t) && distance(t, arc.left()) > 1e-12 && distance(t, arc.right()) > 1e-12) {
            return false;
          }
        }
        break;
      }
      if (arc.contains(x) && distance(x, arc.left()) > 1e-12 && distance(x, arc.right()) > 1e-12) {
        return false;
      }
    }
  }
  return true;
}

struct NiceInterval {
  Arc arc;
  CirclePoint x0;
  Side side = Side::right;
  std::vector<CirclePoint> anchor_orbit;  // periodic cycle the far end lands on
  int depth = 0;                          // preimage depth of the far end
};

namespace detail {

/// Nearest point of S = union_{j<=depth} phi^{-j}(orbit) strictly on the
/// given side of x0 (points within 1e-14 of x0 are ignored).
inline std::optional<CirclePoint> nearest_backward_point(const CoveringMap& phi,
                                                         const std::vector<CirclePoint>& orbit,
                                                         int depth, CirclePoint x0, Side side) {
  std::optional<CirclePoint> best;
  double best_off = 2.0;
  auto consider = [&](CirclePoint q) {
    const double off = side == Side::right ? ccw_offset(x0, q) : ccw_offset(q, x0);
    if (off > 1e-14 && off < 1.0 - 1e-14 && off < best_off) {
      best_off = off;
      best = q;
    }
  };
  std::vector<CirclePoint> level = orbit;
  for (const auto& q : level) consider(q);
  for (int j = 1; j <= depth; ++j) {
    std::vector<CirclePoint> next;
    next.reserve(level.size() * 2);
    for (const auto& q : level) {
      for (const auto& r : preimages(phi, q)) {
        consider(r);
        next.push_back(r);
      }
    }
    level = std::move(next);
  }
  return best;
}

}  // namespace detail

/// An arc with endpoint x0 on the given side, of length <= max_size, whose
/// boundary never returns to its interior.
///
/// With a LambdaApprox the far end comes from the nearest gap whose closure
/// lies within max_size of x0: that gap's near endpoint z maps after `birth`
/// steps onto an endpoint p of a maximal periodic interval, and the far end
/// is the point of union_{j<=birth} phi^{-j}(orb p) closest to x0. Without
/// one, the backward orbit of the fixed point x0 itself is used. Either way
/// the candidate set is forward invariant and holds no point between x0 and
/// the far end.
inline NiceInterval nice_interval_at(const CoveringMap& phi, CirclePoint x0, Side side, double max_size,
                                     const LambdaApprox* lambda = nullptr) {
  if (!(max_size > 0.0 && max_size < 1.0)) throw Error(ErrorCode::InvalidInput, "max_size must be in (0,1)");
  auto make_arc = [&](CirclePoint far) {
    return side == Side::right ? Arc::between(x0, far) : Arc::between(far, x0);
  };
  auto offset_of = [&](CirclePoint q) { return side == Side::right ? ccw_offset(x0, q) : ccw_offset(q, x0); };

  if (lambda != nullptr) {
    const Gap* chosen = nullptr;
    double chosen_off = 2.0;
    for (const auto& g : lambda->gaps) {
      const double near = offset_of(side == Side::right ? g.arc.left() : g.arc.right());
      const double far = near + g.arc.length();
      if (near > 1e-14 && far <= max_size && near < chosen_off) {
        chosen = &g;
        chosen_off = near;
      }
    }
    if (chosen == nullptr) {
      throw Error(ErrorCode::NoNiceIntervalFound,
                  "no gap of the depth-" + std::to_string(lambda->depth) + " approximation fits within " +
                      std::to_string(max_size) + " of the point");
    }
    const PeriodicInterval& base = lambda->intervals[static_cast<std::size_t>(chosen->base)];
    // Orientation is preserved, so the near endpoint lands on the matching end of the base interval.
    const CirclePoint p = side == Side::right ? base.arc.left() : base.arc.right();
    std::vector<CirclePoint> orbit{p};
    for (int i = 1; i < base.period; ++i) orbit.push_back(eval(phi, orbit.back()));
    auto far = detail::nearest_backward_point(phi, orbit, chosen->birth, x0, side);
    if (!far || offset_of(*far) > max_size) {
      throw Error(ErrorCode::NoNiceIntervalFound, "backward orbit of the anchor cycle missed the window");
    }
    NiceInterval out{make_arc(*far), x0, side, orbit, chosen->birth};
    out.anchor_orbit.push_back(x0);
    return out;
  }

  const CirclePoint image = eval(phi, x0);
  if (distance(image, x0) > 1e-12) {
    throw Error(ErrorCode::InvalidInput, "without a Lambda approximation x0 must be a fixed point");
  }
  for (int depth = 1; depth <= 20; ++depth) {
    auto far = detail::nearest_backward_point(phi, {x0}, depth, x0, side);
    if (far && offset_of(*far) <= max_size) return NiceInterval{make_arc(*far), x0, side, {x0}, depth};
  }
  throw Error(ErrorCode::NoNiceIntervalFound, "backward orbit of x0 did not reach the window by depth 20");
}

struct NiceChain {
  Arc base;                   // B_0
  CirclePoint x0;
  Side side = Side::right;    // side of x0 on which the chain lies
  std::vector<Arc> chain;     // B_0, B_1, ..., B_{n_max}
  std::vector<double> epsilons;  // eps_n for each B_n
  double delta0 = 0.0;        // length of B_0 \ B_1
  bool pruned = false;        // some pullback tree hit the node budget
};

/// Largest component length over phi^{-i}(B), i <= i_max, visiting at most
/// `budget` nodes breadth first. Sets `pruned` when the budget cut the tree.
inline double pullback_sup(const CoveringMap& phi, const Arc& B, int i_max, std::size_t budget, bool& pruned) {
  double best = B.length();
  std::size_t visited = 1;
  if (budget < 1) {
    pruned = true;
    return best;
  }
  std::vector<Arc> level{B};
  for (int i = 1; i <= i_max && !level.empty(); ++i) {
    std::vector<Arc> next;
    next.reserve(level.size() * 2);
    for (const Arc& a : level) {
      for (const Arc& c : preimage_arcs(phi, a)) {
        if (visited >= budget) {
          pruned = true;
          return best;
        }
        ++visited;
        best = std::max(best, c.length());
        next.push_back(c);
      }
    }
    level = std::move(next);
  }
  return best;
}

/// B_n = component of phi^{-1}(B_{n-1}) with endpoint x0, for n <= n_max,
/// and eps_n = largest component of phi^{-i}(B_n), i <= i_max.
inline NiceChain nice_chain(const CoveringMap& phi, const Arc& B0, CirclePoint x0, int n_max, int i_max,
                            std::size_t budget = kPullbackBudget) {
  NiceChain nc;
  nc.base = B0;
  nc.x0 = x0;
  if (B0.left() == x0 || distance(B0.left(), x0) <= 1e-15) {
    nc.side = Side::right;
  } else if (distance(B0.right(), x0) <= 1e-15) {
    nc.side = Side::left;
  } else {
    throw Error(ErrorCode::InvalidInput, "x0 must be an endpoint of B0");
  }
  const double fx = phi.lift(x0.value());
  const double k = std::round(fx - x0.value());
  if (std::abs(fx - x0.value() - k) > 1e-10) throw Error(ErrorCode::InvalidInput, "x0 must be a fixed point");

  const double X = x0.value();
  Arc B = B0;
  for (int n = 0; n <= n_max; ++n) {
    nc.chain.push_back(B);
    nc.epsilons.push_back(pullback_sup(phi, B, i_max, budget, nc.pruned));
    if (n == n_max) break;
    if (nc.side == Side::right) {
      const double r = X + B.length();
      B = Arc::from_lifts(X, phi.lift_inverse(r + k));
    } else {
      const double l = X - B.length();
      B = Arc::from_lifts(phi.lift_inverse(l + k), X);
    }
  }
  if (nc.chain.size() > 1) nc.delta0 = nc.chain[0].length() - nc.chain[1].length();
  return nc;
}

/// sup of component lengths of S^1 \ (L u phi^{-n}(p0)) whose left endpoint is
/// not in L, with L and the preimages both taken at depth n. Returns nullopt
/// when 2^n exceeds the point budget.
inline std::optional<double> gap_grid_epsilon(const CoveringMap& phi, const LambdaApprox& lambda, CirclePoint p0,
                                              int n, std::size_t budget) {
  if (n < 0 || (n < 63 && (std::size_t{1} << n) > budget)) return std::nullopt;
  std::vector<CirclePoint> pts{p0};
  for (int j = 1; j <= n; ++j) {
    std::vector<CirclePoint> next;
    next.reserve(pts.size() * 2);
    for (const auto& q : pts) {
      const auto pre = preimages(phi, q);
      next.push_back(pre[0]);
      next.push_back(pre[1]);
    }
    pts = std::move(next);
  }
  struct Mark {
    double x;
    bool in_l;
  };
  std::vector<Mark> marks;
  for (double l : lambda.left_endpoints()) marks.push_back({l, true});
  for (const auto& q : pts) marks.push_back({q.value(), false});
  std::sort(marks.begin(), marks.end(), [](const Mark& a, const Mark& b) {
    return a.x < b.x || (a.x == b.x && a.in_l && !b.in_l);
  });
  double best = 0.0;
  for (std::size_t i = 0; i < marks.size(); ++i) {
    if (marks[i].in_l) continue;
    // Skip duplicates of the same point.
    std::size_t j = (i + 1) % marks.size();
    double len = 0.0;
    while (true) {
      len = wrap01(marks[j].x - marks[i].x);
      if (j == i) {
        len = 1.0;
        break;
      }
      if (len > 1e-15) break;
      j = (j + 1) % marks.size();
    }
    best = std::max(best, len);
  }
  return best;
}

}  // namespace tcircle
