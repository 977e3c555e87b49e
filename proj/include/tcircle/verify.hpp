#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tcircle/covering_map.hpp"
#include "tcircle/lambda.hpp"
#include "tcircle/periodic.hpp"
#include "tcircle/report.hpp"
#include "tcircle/thompson.hpp"

namespace tcircle {

namespace detail {

inline LemmaReport new_report(const std::string& id, const CoveringMap& phi, std::uint64_t seed) {
  LemmaReport r;
  r.lemma_id = id;
  r.map = ojson::parse(map_to_json(phi).dump());
  r.seed = seed;
  return r;
}

/// The endpoint of a maximal periodic interval of lowest period from which
/// Lambda accumulates on `side`: the right endpoint for Side::right.
inline CirclePoint default_lambda_endpoint(const std::vector<PeriodicInterval>& intervals, Side side) {
  const PeriodicInterval* best = &intervals.front();
  for (const auto& I : intervals)
    if (I.period < best->period) best = &I;
  return side == Side::right ? best->arc.right() : best->arc.left();
}

inline bool in_window(CirclePoint x0, Side side, double eps, CirclePoint p) {
  const double d = displacement(x0, p);
  if (std::abs(d) <= kSamePointTol) return false;
  return side == Side::right ? (d > 0.0 && d < eps) : (d < 0.0 && -d < eps);
}

}  // namespace detail

struct MultiplierGrowthOptions {
  std::optional<CirclePoint> x0;  // default: repelling endpoint of a maximal interval
  Side side = Side::right;
  std::vector<double> K_list{2.0, 4.0};
  int s_max = 10;
  int lambda_depth = 8;
  std::uint64_t seed = 0;
};

/// Multipliers of Lambda-periodic points: minimum per period, and for each K
/// the largest window (x0, x0 + eps), eps = 2^-1 .. 2^-20, in which every
/// Lambda-periodic point has multiplier >= K.
inline LemmaReport verify_multiplier_growth(const CoveringMap& phi, const MultiplierGrowthOptions& opt = {}) {
  auto intervals = maximal_periodic_intervals(phi, std::min(opt.s_max, 6));
  if (intervals.empty()) throw Error(ErrorCode::NotExceptional, "no periodic interval: map is minimal at this depth");
  const auto lambda = lambda_approx(phi, intervals, opt.lambda_depth);
  const CirclePoint x0 = opt.x0 ? *opt.x0 : detail::default_lambda_endpoint(intervals, opt.side);

  auto report = detail::new_report("L3.5", phi, opt.seed);
  report.params["x0"] = x0.value();
  report.params["side"] = to_string(opt.side);
  report.params["K_list"] = opt.K_list;
  report.params["s_max"] = opt.s_max;
  report.params["lambda_depth"] = opt.lambda_depth;

  std::vector<PeriodicPoint> lam_points;
  for (const auto& p : find_periodic_points(phi, opt.s_max))
    if (!lambda.in_gap(p.location)) lam_points.push_back(p);

  Table periods{{"period", "lambda_points", "min_multiplier", "max_multiplier"}, {}};
  std::vector<double> mins;
  for (int s = 1; s <= opt.s_max; ++s) {
    double lo = INFINITY, hi = 0.0;
    int count = 0;
    for (const auto& p : lam_points) {
      if (p.period != s) continue;
      ++count;
      lo = std::min(lo, p.multiplier);
      hi = std::max(hi, p.multiplier);
    }
    if (count == 0) {
      periods.rows.push_back({s, 0, nullptr, nullptr});
      continue;
    }
    mins.push_back(lo);
    periods.rows.push_back({s, count, lo, hi});
  }

  Table windows{{"K", "epsilon", "points_in_window", "min_multiplier_in_window"}, {}};
  std::vector<double> eps_of_K;
  for (double K : opt.K_list) {
    double found = 0.0;
    int npts = 0;
    double wmin = INFINITY;
    for (int e = 1; e <= 20; ++e) {
      const double eps = std::ldexp(1.0, -e);
      bool ok = true;
      int n = 0;
      double m = INFINITY;
      for (const auto& p : lam_points) {
        if (!detail::in_window(x0, opt.side, eps, p.location)) continue;
        ++n;
        m = std::min(m, p.multiplier);
        if (p.multiplier < K) ok = false;
      }
      if (ok) {
        found = eps;
        npts = n;
        wmin = m;
        break;
      }
    }
    eps_of_K.push_back(found);
    windows.rows.push_back({K, found, npts, npts ? ojson(wmin) : ojson(nullptr)});
  }

  bool mins_monotone = true;
  for (std::size_t i = 1; i < mins.size(); ++i)
    if (mins[i] < mins[i - 1]) mins_monotone = false;
  bool eps_monotone = true;
  std::vector<std::size_t> order(opt.K_list.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return opt.K_list[a] < opt.K_list[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (eps_of_K[order[i]] > eps_of_K[order[i - 1]]) eps_monotone = false;

  report.add_table("periods", periods);
  report.add_table("windows", windows);
  double floor = INFINITY;
  for (double m : mins) floor = std::min(floor, m);
  report.evidence["observed_multiplier_floor"] = mins.empty() ? ojson(nullptr) : ojson(floor);
  report.evidence["min_multiplier_nondecreasing"] = mins_monotone;
  report.evidence["epsilon_nonincreasing_in_K"] = eps_monotone;
  report.notes.push_back("Lambda-periodic points are periodic points outside every gap born by depth " +
                         std::to_string(opt.lambda_depth) + "; this is a finite-depth proxy.");

  if (mins.size() < 2) {
    report.verdict = Verdict::inconclusive;
    report.budget = "s_max=" + std::to_string(opt.s_max) + " gives fewer than two periods with Lambda-periodic points";
  } else if (mins_monotone && eps_monotone) {
    report.verdict = Verdict::pass;
  } else {
    report.verdict = Verdict::fail;
    report.notes.push_back("monotone trend violated; review tolerances against the periods table");
  }
  return report;
}

enum class EpsilonMode { nice_chain, gap_grid };

inline const char* to_string(EpsilonMode m) { return m == EpsilonMode::nice_chain ? "nice_chain" : "gap_grid"; }

struct EpsilonOptions {
  EpsilonMode mode = EpsilonMode::nice_chain;
  int n_max = 8;
  int i_max = 10;
  std::size_t node_budget = kPullbackBudget;
  std::optional<CirclePoint> x0;
  int s_max = 6;
  std::uint64_t seed = 0;
};

/// The eps_n sequence of a nice chain (mode nice_chain) or of the gap grid
/// L u phi^{-n}(p0) (mode gap_grid). Pass if nonincreasing and the last
/// value is below half the first.
inline LemmaReport epsilon_sequence_report(const CoveringMap& phi, const EpsilonOptions& opt = {}) {
  const bool chain_mode = opt.mode == EpsilonMode::nice_chain;
  auto report = detail::new_report(chain_mode ? "L3.2" : "L3.4", phi, opt.seed);
  const auto intervals = maximal_periodic_intervals(phi, opt.s_max);
  const bool exceptional = !intervals.empty();
  if (!chain_mode && !exceptional)
    throw Error(ErrorCode::NotExceptional, "gap_grid mode needs a periodic interval");

  CirclePoint x0 = opt.x0 ? *opt.x0 : (exceptional ? detail::default_lambda_endpoint(intervals, Side::right)
                                                     : CirclePoint(0.0));
  report.params["mode"] = to_string(opt.mode);
  report.params["x0"] = x0.value();
  report.params["n_max"] = opt.n_max;
  report.params["i_max"] = opt.i_max;
  report.params["node_budget"] = opt.node_budget;
  report.params["s_max"] = opt.s_max;

  std::vector<double> eps;
  Table table{{"n", "epsilon"}, {}};
  bool over_budget = false;
  if (chain_mode) {
    std::optional<LambdaApprox> lambda;
    if (exceptional) lambda = lambda_approx(phi, intervals, 8);
    const double max_size = exceptional ? 0.1 : 0.3;
    const auto base = nice_interval_at(phi, x0, Side::right, max_size, lambda ? &*lambda : nullptr);
    const auto chain = nice_chain(phi, base.arc, x0, opt.n_max, opt.i_max, opt.node_budget);
    report.evidence["base_left"] = base.arc.left().value();
    report.evidence["base_right"] = base.arc.right().value();
    report.evidence["delta0"] = chain.delta0;
    report.evidence["pruned"] = chain.pruned;
    eps = chain.epsilons;
    over_budget = chain.pruned;
    Table arcs{{"n", "B_left", "B_right", "B_length"}, {}};
    for (std::size_t n = 0; n < chain.chain.size(); ++n) {
      const auto& B = chain.chain[n];
      arcs.rows.push_back({n, B.left().value(), B.right().value(), B.length()});
    }
    for (std::size_t n = 0; n < eps.size(); ++n) table.rows.push_back({n, eps[n]});
    report.add_table("epsilons", table);
    report.add_table("chain", arcs);
  } else {
    const auto lambda = lambda_approx(phi, intervals, std::min(opt.n_max, kMaxLambdaDepth));
    for (int n = 0; n <= opt.n_max; ++n) {
      LambdaApprox level = lambda;
      level.depth = n;
      std::erase_if(level.gaps, [&](const Gap& g) { return g.birth > n; });
      const auto e = gap_grid_epsilon(phi, level, x0, n, opt.node_budget);
      if (!e) {
        over_budget = true;
        break;
      }
      eps.push_back(*e);
      table.rows.push_back({n, *e});
    }
    report.add_table("epsilons", table);
    report.evidence["lambda_depth"] = std::min(opt.n_max, kMaxLambdaDepth);
  }

  bool nonincreasing = true;
  for (std::size_t i = 1; i < eps.size(); ++i)
    if (eps[i] > eps[i - 1]) nonincreasing = false;
  const bool halved = eps.size() >= 2 && eps.back() < 0.5 * eps.front();
  report.evidence["nonincreasing"] = nonincreasing;
  report.evidence["final_below_half_initial"] = halved;

  if (over_budget) {
    report.verdict = Verdict::inconclusive;
    report.budget = "node_budget=" + std::to_string(opt.node_budget);
  } else if (nonincreasing && halved) {
    report.verdict = Verdict::pass;
  } else {
    report.verdict = Verdict::fail;
    report.notes.push_back("epsilon sequence not decreasing as expected; review the chain table");
  }
  return report;
}

struct StarWitness {
  PeriodicPoint point;
  ThompsonElement element;
  unsigned degree = 0;
  bool need_left = false;
  bool need_right = false;
  bool ok = false;
};

struct StarResult {
  LemmaReport report;
  std::vector<StarWitness> witnesses;
};

struct StarOptions {
  int s_max = 6;
  unsigned n = 8;
  int k_max = 50;
  std::uint64_t seed = 0;
};

/// For each nonexpandable candidate x of period s, an element g equal to
/// phi^s near x, checked to fix x with slope 1 and to push points away from x
/// on every side from which the minimal set accumulates on x.
inline StarResult star_witnesses(MapPtr map, const StarOptions& opt = {}) {
  const CoveringMap& phi = *map;
  StarResult out;
  auto& report = out.report;
  report = detail::new_report("STAR", phi, opt.seed);
  report.params["s_max"] = opt.s_max;
  report.params["n"] = opt.n;
  report.params["k_max"] = opt.k_max;

  const auto intervals = maximal_periodic_intervals(phi, opt.s_max);
  const bool minimal = intervals.empty();
  report.evidence["minimal"] = minimal;

  Table attracting{{"location", "period", "multiplier"}, {}};
  for (const auto& p : find_periodic_points(phi, opt.s_max))
    if (p.classification == PeriodicClass::attracting) attracting.rows.push_back({p.location.value(), p.period, p.multiplier});

  Table table{{"location", "period", "multiplier", "need_left", "need_right", "degree", "g_x_error", "slope",
               "slope_error", "min_right_push", "min_left_push", "max_power_mismatch", "ok"},
              {}};
  ojson elements = ojson::array();
  bool all_ok = true;
  constexpr double kTol = 1e-9;

  for (const auto& p : nonexpandable_candidates(phi, opt.s_max, opt.k_max)) {
    const CirclePoint x = p.location;
    bool need_left = minimal, need_right = minimal;
    bool in_lambda = minimal;
    if (!minimal) {
      bool interior = false;
      for (const auto& I : intervals) {
        if (distance(I.arc.right(), x) <= kSamePointTol) {
          need_right = true;
          in_lambda = true;
        } else if (distance(I.arc.left(), x) <= kSamePointTol) {
          need_left = true;
          in_lambda = true;
        } else if (I.arc.contains(x)) {
          interior = true;
        }
      }
      if (!interior && !in_lambda) {
        need_left = need_right = true;
        in_lambda = true;
      }
    }
    if (!in_lambda) {
      report.notes.push_back("candidate at " + detail::format_double(x.value()) +
                             " lies inside a periodic interval and needs no witness");
      continue;
    }

    std::optional<ThompsonElement> g;
    unsigned degree = std::max<unsigned>(opt.n, static_cast<unsigned>(p.period) + 1);
    for (; degree <= kMaxDegree; ++degree) {
      try {
        g = build_local_power(map, x, static_cast<unsigned>(p.period), degree);
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NeighborhoodTooSmall) throw;
      }
    }
    if (!g) throw Error(ErrorCode::DepthExceeded, "no local power element up to degree 24");

    const auto [gx, slope] = eval_and_slope(*g, x);
    const double gx_err = distance(gx, x);
    const double slope_err = std::abs(slope - p.multiplier);

    // Radius of the neighborhood on which g is a single branch of phi^s.
    double radius = 0.5;
    for (const auto& piece : g->source.intervals()) {
      for (CirclePoint e : {piece.arc().left(), piece.arc().right()}) {
        const double d = distance(e, x);
        if (d > 1e-12) radius = std::min(radius, d);
      }
    }
    const double step = std::min(1e-4, radius / 11.0);
    double min_right = INFINITY, min_left = INFINITY, mismatch = 0.0;
    bool sides_ok = true;
    for (int j = 1; j <= 10; ++j) {
      const double h = (j - 0.5) * step;
      for (int sgn : {1, -1}) {
        const bool needed = sgn > 0 ? need_right : need_left;
        if (!needed) continue;
        const CirclePoint y(x.value() + sgn * h);
        const CirclePoint gy = tcircle::eval(*g, y);
        mismatch = std::max(mismatch, distance(gy, lift_power(phi, y.value(), p.period).point()));
        // Signed push away from x: positive when |g(y) - x| > |y - x| on that side.
        const double push = sgn * displacement(y, gy);
        if (sgn > 0) min_right = std::min(min_right, push);
        else min_left = std::min(min_left, push);
        if (!(push > 0.0)) sides_ok = false;
      }
    }
    const bool ok = gx_err <= kTol && slope_err <= kTol && std::abs(slope - 1.0) <= kTolMult && sides_ok &&
                    mismatch <= 1e-12;
    all_ok = all_ok && ok;
    table.rows.push_back({x.value(), p.period, p.multiplier, need_left, need_right, degree, gx_err, slope,
                          slope_err, need_right ? ojson(min_right) : ojson(nullptr),
                          need_left ? ojson(min_left) : ojson(nullptr), mismatch, ok});
    elements.push_back(ojson::parse(element_to_json(*g).dump()));
    out.witnesses.push_back({p, *g, degree, need_left, need_right, ok});
  }

  report.add_table("candidates", table);
  report.add_table("attracting", attracting);
  report.evidence["elements"] = std::move(elements);
  if (table.rows.empty()) report.notes.push_back("no nonexpandable candidate: vacuous pass");
  if (!attracting.rows.empty()) report.notes.push_back("attracting periodic points are listed separately");
  report.notes.push_back(
      "a side passes when every sample y there satisfies |g(y) - x| > |y - x|, i.e. g repels from x");
  report.verdict = all_ok ? Verdict::pass : Verdict::fail;
  return out;
}

/// leb_estimate of the depth-d approximation for each requested depth.
inline LemmaReport lambda_measure_trend(const CoveringMap& phi, const std::vector<int>& depths, int s_max = 6,
                                        std::uint64_t seed = 0) {
  const auto intervals = maximal_periodic_intervals(phi, s_max);
  if (intervals.empty()) throw Error(ErrorCode::NotExceptional, "no periodic interval: map is minimal at this depth");
  auto report = detail::new_report("LAMBDA_MEASURE", phi, seed);
  report.params["depths"] = depths;
  report.params["s_max"] = s_max;

  int deepest = 0;
  for (int d : depths) deepest = std::max(deepest, d);
  const auto lambda = lambda_approx(phi, intervals, deepest);
  Table table{{"depth", "gaps", "leb_estimate"}, {}};
  std::vector<double> leb;
  for (int d : depths) {
    if (d < 0) throw Error(ErrorCode::InvalidInput, "negative depth");
    double covered = 0.0;
    int count = 0;
    for (const auto& g : lambda.gaps) {
      if (g.birth > d) continue;
      covered += g.arc.length();
      ++count;
    }
    leb.push_back(1.0 - covered);
    table.rows.push_back({d, count, 1.0 - covered});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < leb.size(); ++i)
    if (!(leb[i] < leb[i - 1])) decreasing = false;
  report.add_table("measure", table);
  report.evidence["strictly_decreasing"] = decreasing;
  report.evidence["relative_drop"] = leb.size() >= 2 && leb.front() > 0 ? ojson(1.0 - leb.back() / leb.front())
                                                                        : ojson(nullptr);
  report.notes.push_back(
      "Strict decrease at finite depth is a proxy only; convergence of the estimate to zero is not checked.");
  if (leb.size() < 2) {
    report.verdict = Verdict::inconclusive;
    report.budget = "fewer than two depths";
  } else {
    report.verdict = decreasing ? Verdict::pass : Verdict::fail;
  }
  return report;
}

}  // namespace tcircle
