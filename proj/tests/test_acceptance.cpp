// Acceptance criteria 1-10. Each test prints one line:
//   criterion N: PASS|FAIL  <summary>
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "tcircle/cli.hpp"
#include "tcircle/tcircle.hpp"

using namespace tcircle;

namespace {

MapPtr share(CoveringMap m) { return std::make_shared<const CoveringMap>(std::move(m)); }

const MapPtr kDoubling = share(families::doubling());
const MapPtr kParabolic = share(families::parabolic_doubling());
const MapPtr kGapped = share(families::gapped());

void line(int n, bool ok, const std::string& summary) {
  std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", summary.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool dyadic_rational(double x, unsigned n) {
  const double k = std::ldexp(x, static_cast<int>(n));
  return k == std::floor(k);
}

}  // namespace

TEST(Acceptance, C1_DoublingMatchesAffineOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  bool slopes = true, breakpoints = true;
  for (int i = 0; i < 100; ++i) {
    const auto raw = oracle::random_raw_element(rng, 4);
    const auto g = oracle::to_element(kDoubling, raw);
    ASSERT_TRUE(validate(g).ok);
    for (const auto* P : {&g.source, &g.target})
      for (const auto& I : P->intervals())
        breakpoints = breakpoints && dyadic_rational(I.left, I.degree) && dyadic_rational(I.right, I.degree) &&
                      I.left == std::ldexp(static_cast<double>(I.index), -static_cast<int>(I.degree));
    for (int j = 0; j < 100; ++j) {
      const double x = u(rng);
      const auto [y, s] = eval_and_slope(g, CirclePoint(x));
      const auto ref = oracle::affine_eval(raw, x);
      worst = std::max(worst, std::abs(oracle::circle_diff(y.value(), ref.y)));
      int e = 0;
      slopes = slopes && std::frexp(s, &e) == 0.5 && s == ref.slope;
    }
  }
  const bool ok = worst < 1e-10 && slopes && breakpoints;
  line(1, ok, "100 doubling elements vs affine oracle, max error " + fmt("%.3g", worst) +
                  (slopes ? ", slopes powers of 2" : ", slope mismatch") +
                  (breakpoints ? ", breakpoints dyadic" : ", non-dyadic breakpoint"));
  EXPECT_TRUE(ok);
}

TEST(Acceptance, C2_GroupClosure) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const MapPtr maps[] = {kDoubling, kParabolic, kGapped};
  double worst = 0.0;
  bool valid = true;
  for (int i = 0; i < 100; ++i) {
    const MapPtr& m = maps[i % 3];
    const auto g = oracle::to_element(m, oracle::random_raw_element(rng, 4));
    const auto h = oracle::to_element(m, oracle::random_raw_element(rng, 4));
    const auto gh = compose(g, h);
    const auto gi = invert(g);
    valid = valid && validate(gh).ok && validate(gi).ok;
    for (int j = 0; j < 100; ++j) {
      const CirclePoint x(u(rng));
      worst = std::max(worst, distance(eval(gh, x), eval(g, eval(h, x))));
      worst = std::max(worst, distance(eval(gi, eval(g, x)), x));
    }
  }
  const bool ok = valid && worst < 1e-8;
  line(2, ok, std::string("100 pairs: compose and invert ") + (valid ? "valid" : "INVALID") +
                  ", round-trip max error " + fmt("%.3g", worst));
  EXPECT_TRUE(ok);
}

TEST(Acceptance, C3_DistortionBound) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len_exp(1, 4), steps(1, 8);
  const double bound = 2.0 * std::log(3.0) + 1e-6;
  auto run = [&](const CoveringMap& phi, double& worst) {
    int chains = 0;
    while (chains < 200) {
      const Arc J = Arc::from_left(CirclePoint(u(rng)), u(rng) * std::pow(10.0, -len_exp(rng)));
      const int n = steps(rng);
      try {
        worst = std::max(worst, chain_distortion(phi, J, n));
        ++chains;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ChainNotDisjoint) throw;
      }
    }
  };
  double parabolic = 0.0, doubling = 0.0;
  run(*kParabolic, parabolic);
  run(*kDoubling, doubling);
  const double c0 = estimate_C0(*kParabolic).c0;
  const bool ok = parabolic <= bound && doubling < 1e-12 && std::abs(c0 - 2.0 * std::log(3.0)) < 1e-9;
  line(3, ok, "200 chains each: parabolic max " + fmt("%.6g", parabolic) + " <= 2 log 3 = " +
                  fmt("%.6g", 2.0 * std::log(3.0)) + ", doubling max " + fmt("%.3g", doubling));
  EXPECT_TRUE(ok);
}

TEST(Acceptance, C4_DerivativeConsistency) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> iters(1, 3);
  const double h = 1e-7;
  double worst = 0.0;
  for (const MapPtr& m : {kDoubling, kParabolic, kGapped}) {
    for (int i = 0; i < 100; ++i) {
      const double x = u(rng);
      const int n = iters(rng);
      const double fd = oracle::central_difference([&](double t) { return lift_power(*m, t, n).value(); }, x, h);
      const double d = iterate_with_multiplier(*m, CirclePoint(x), n).second;
      worst = std::max(worst, std::abs(fd - d) / d);
    }
    const auto g = oracle::to_element(m, oracle::random_raw_element(rng, 4));
    int done = 0;
    while (done < 100) {
      const double x = u(rng);
      const std::size_t j = g.source.locate(x);
      if (x - 2 * h <= g.source[j].left || x + 2 * h >= g.source[j].right) continue;
      const double fd =
          oracle::circle_diff(eval(g, CirclePoint(x + h)).value(), eval(g, CirclePoint(x - h)).value()) / (2 * h);
      const double s = eval_and_slope(g, CirclePoint(x)).second;
      worst = std::max(worst, std::abs(fd - s) / s);
      ++done;
    }
  }
  const bool ok = worst < 1e-6;
  line(4, ok, "3 families x 100 points, iterates and elements vs central differences, max rel error " +
                  fmt("%.3g", worst));
  EXPECT_TRUE(ok);
}

TEST(Acceptance, C5_MinimalityClassification) {
  const auto d = minimality_test(*kDoubling, 6, 10);
  const auto p = minimality_test(*kParabolic, 6, 10);
  const auto g = minimality_test(*kGapped, 6, 10);
  bool endpoints = !g.minimal && !g.witnesses.empty();
  bool period_one = false;
  double worst = 0.0;
  for (const auto& I : g.witnesses) {
    if (I.period != 1) continue;
    period_one = true;
    for (CirclePoint e : {I.arc.left(), I.arc.right()}) {
      const double r = std::abs(oracle::circle_diff(kGapped->lift(e.value()), e.value()));
      worst = std::max(worst, r);
    }
  }
  endpoints = endpoints && period_one && worst < 1e-9;
  const bool dense = d.max_grid_gap <= std::ldexp(1.0, -10);
  const bool ok = d.minimal && dense && p.minimal && endpoints;
  line(5, ok, std::string("doubling ") + (d.minimal ? "minimal" : "exceptional") + " with depth-10 gap " +
                  fmt("%.6g", d.max_grid_gap) + ", parabolic " + (p.minimal ? "minimal" : "exceptional") +
                  ", gapped " + (g.minimal ? "minimal" : "exceptional") + " with period-1 interval, |F(x)-x| <= " +
                  fmt("%.3g", worst));
  // The density clause cannot hold for the parabolic map: preimages of 0
  // approach the parabolic point like n^(-1/2). Reported, not asserted.
  std::printf("criterion 5 (density clause, parabolic): %s  depth-10 gap %.6g vs 2^-10 = %.6g\n",
              p.max_grid_gap <= std::ldexp(1.0, -10) ? "PASS" : "NOT ATTAINABLE", p.max_grid_gap,
              std::ldexp(1.0, -10));
  EXPECT_TRUE(ok);
}

TEST(Acceptance, C6_LambdaMeasureTrend) {
  const auto r = lambda_measure_trend(*kGapped, {0, 2, 4, 6, 8});
  const auto& rows = r.evidence["measure"]["rows"];
  const double first = rows.front()[2].get<double>();
  const double last = rows.back()[2].get<double>();
  bool noted = false;
  for (const auto& n : r.notes) noted = noted || n.find("proxy") != std::string::npos;
  const bool ok = r.verdict == Verdict::pass && last <= 0.75 * first && noted;
  line(6, ok, "leb_estimate " + fmt("%.6g", first) + " -> " + fmt("%.6g", last) + " over depths 0..8, drop " +
                  fmt("%.1f%%", 100.0 * (1.0 - last / first)) + ", strictly decreasing: " +
                  to_string(r.verdict) + (noted ? ", proxy noted" : ", proxy note missing"));
  EXPECT_TRUE(ok);
}

TEST(Acceptance, C7_MultiplierGrowth) {
  MultiplierGrowthOptions o;
  o.s_max = 12;
  const auto r = verify_multiplier_growth(*kGapped, o);
  const auto& rows = r.evidence["periods"]["rows"];
  const double at2 = rows[1][2].get<double>();
  bool ok = true;
  double lowest = INFINITY;
  for (int s = 8; s <= 12; ++s) {
    const auto& row = rows[static_cast<std::size_t>(s - 1)];
    if (row[2].is_null()) {
      ok = false;
      continue;
    }
    lowest = std::min(lowest, row[2].get<double>());
    ok = ok && row[2].get<double>() >= at2;
  }
  line(7, ok, "min multiplier of Lambda-periodic points: s=2 " + fmt("%.6g", at2) + ", smallest over s=8..12 " +
                  fmt("%.6g", lowest));
  EXPECT_TRUE(ok);
}

TEST(Acceptance, C8_StarWitnesses) {
  const auto ne = nonexpandable_candidates(*kParabolic, 6, 50);
  const bool only_zero = ne.size() == 1 && ne[0].location.value() == 0.0;
  const auto res = star_witnesses(kParabolic);
  bool ok = only_zero && res.report.verdict == Verdict::pass && res.witnesses.size() == 1;
  double gx_err = INFINITY, slope_err = INFINITY;
  int right_ok = 0, left_ok = 0;
  if (ok) {
    const auto& g = res.witnesses[0].element;
    const auto [gx, slope] = eval_and_slope(g, CirclePoint(0.0));
    gx_err = distance(gx, CirclePoint(0.0));
    slope_err = std::abs(slope - 1.0);
    for (int j = 1; j <= 10; ++j) {
      const double h = j * 1e-4 - 5e-5;
      // Right side: g(y) > y. Left side (y = 1 - h): g moves y further from 0,
      // so g(y) < y as circle coordinates near 1.
      const CirclePoint yr(h), yl(1.0 - h);
      if (displacement(yr, eval(g, yr)) > 0.0) ++right_ok;
      if (displacement(yl, eval(g, yl)) < 0.0) ++left_ok;
    }
    ok = gx_err <= 1e-9 && slope_err <= 1e-9 && right_ok == 10 && left_ok == 10;
  }
  line(8, ok, std::string("NE = ") + (only_zero ? "{0}" : "unexpected") + ", |g(0)| = " + fmt("%.3g", gx_err) +
                  ", |slope-1| = " + fmt("%.3g", slope_err) + ", repelling at " + std::to_string(right_ok) +
                  "/10 right and " + std::to_string(left_ok) + "/10 left samples");
  EXPECT_TRUE(ok);
}

TEST(Acceptance, C9_EpsilonSequence) {
  EpsilonOptions o;
  const auto d = epsilon_sequence_report(*kDoubling, o);
  double worst = 0.0;
  const auto& rows = d.evidence["epsilons"]["rows"];
  for (const auto& row : rows) {
    const int n = row[0].get<int>();
    worst = std::max(worst, std::abs(row[1].get<double>() - std::ldexp(1.0, -n - 2)));
  }
  const auto p = epsilon_sequence_report(*kParabolic, o);
  const auto& pr = p.evidence["epsilons"]["rows"];
  bool nonincreasing = true;
  for (std::size_t i = 1; i < pr.size(); ++i) nonincreasing = nonincreasing && pr[i][1] <= pr[i - 1][1];
  const double e1 = pr[1][1].get<double>(), e5 = pr[5][1].get<double>();
  const bool ok = worst < 1e-12 && rows.size() == 9 && nonincreasing && e5 < e1;
  line(9, ok, "doubling eps_n = 2^(-n-2) to " + fmt("%.3g", worst) + "; parabolic nonincreasing, eps1 " +
                  fmt("%.6g", e1) + " > eps5 " + fmt("%.6g", e5));
  EXPECT_TRUE(ok);
}

TEST(Acceptance, C10_Determinism) {
  auto all_reports = [] {
    std::string s;
    MultiplierGrowthOptions m;
    m.seed = 5;
    s += dump_json(verify_multiplier_growth(*kGapped, m).to_json());
    s += dump_json(epsilon_sequence_report(*kParabolic).to_json());
    EpsilonOptions g;
    g.mode = EpsilonMode::gap_grid;
    s += dump_json(epsilon_sequence_report(*kGapped, g).to_json());
    s += dump_json(star_witnesses(kParabolic).report.to_json());
    s += dump_json(lambda_measure_trend(*kGapped, {0, 2, 4}).to_json());
    return s;
  };
  const std::string a = all_reports();
  const std::string b = all_reports();
  std::ostringstream o1, o2, e;
  const std::vector<std::string> args{"analyze", oracle::maps_dir() + "/gapped_1p5.json",
                                      oracle::maps_dir() + "/parabolic_doubling.json", "--jobs", "2"};
  cli_main(args, o1, e);
  cli_main(args, o2, e);
  const bool ok = a == b && o1.str() == o2.str() && !a.empty();
  line(10, ok, "5 reports and a concurrent analyze run twice: " + std::string(ok ? "byte-identical" : "DIFFER") +
                   " (" + std::to_string(a.size()) + " bytes)");
  EXPECT_TRUE(ok);
}
