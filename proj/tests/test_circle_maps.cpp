#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support/oracles.hpp"
#include "tcircle/covering_map.hpp"
#include "tcircle/roots.hpp"

using namespace tcircle;

namespace {

const CoveringMap kDoubling = families::doubling();
const CoveringMap kParabolic = families::parabolic_doubling();
const CoveringMap kGapped = families::gapped();

// Fixed point of the gapped map in (0, 1/2), from a 30-digit computation.
constexpr double kGappedFixed = 0.2380610303682942401683408;

}  // namespace

TEST(Circle, WrapAndDisplacement) {
  EXPECT_DOUBLE_EQ(wrap01(-0.25), 0.75);
  EXPECT_DOUBLE_EQ(wrap01(3.5), 0.5);
  EXPECT_EQ(CirclePoint(1.0).value(), 0.0);
  EXPECT_NEAR(displacement(CirclePoint(0.9), CirclePoint(0.1)), 0.2, 1e-15);
  EXPECT_NEAR(displacement(CirclePoint(0.1), CirclePoint(0.9)), -0.2, 1e-15);
  EXPECT_NEAR(distance(CirclePoint(0.95), CirclePoint(0.05)), 0.1, 1e-15);
  EXPECT_NEAR(ccw_offset(CirclePoint(0.9), CirclePoint(0.1)), 0.2, 1e-15);
}

TEST(Circle, ArcsAcrossZero) {
  const Arc a = Arc::from_left(CirclePoint(0.9), 0.2);
  EXPECT_TRUE(a.contains(CirclePoint(0.95)));
  EXPECT_TRUE(a.contains(CirclePoint(0.05)));
  EXPECT_FALSE(a.contains(CirclePoint(0.5)));
  EXPECT_FALSE(a.contains(CirclePoint(0.9)));
  EXPECT_TRUE(a.contains_closed(CirclePoint(0.9)));
  EXPECT_NEAR(a.right().value(), 0.1, 1e-15);
  const Arc b = Arc::between(CirclePoint(0.95), CirclePoint(0.05));
  EXPECT_NEAR(b.length(), 0.1, 1e-15);
  EXPECT_TRUE(a.encloses(b, 0.0));
  EXPECT_TRUE(a.overlaps(b));
  EXPECT_FALSE(b.overlaps(Arc::from_left(CirclePoint(0.2), 0.1)));
}

TEST(Roots, HybridRootMatchesCubeRoot) {
  const auto r = hybrid_root([](double x) { return x * x * x - 2.0; }, [](double x) { return 3 * x * x; }, 0.0, 2.0,
                             RootOptions{});
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, std::cbrt(2.0), 1e-15);
  EXPECT_FALSE(
      hybrid_root([](double x) { return x + 5.0; }, [](double) { return 1.0; }, 0.0, 1.0, RootOptions{}).has_value());
}

TEST(CoveringMap, LiftValues) {
  EXPECT_DOUBLE_EQ(kDoubling.lift(0.3), 0.6);
  EXPECT_NEAR(kParabolic.lift(0.25), 0.34084505690810466, 1e-15);
  EXPECT_EQ(kParabolic.lift(0.5), 1.0);
  EXPECT_EQ(kParabolic.lift(1.0), 2.0);
  EXPECT_NEAR(kParabolic.lift(1.25), 2.34084505690810466, 1e-15);
  EXPECT_NEAR(kGapped.lift(kGappedFixed), kGappedFixed, 1e-15);
  EXPECT_NEAR(kGapped.lift(1.0 - kGappedFixed), 2.0 - kGappedFixed, 1e-15);
}

TEST(CoveringMap, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const CoveringMap* m : {&kDoubling, &kParabolic, &kGapped}) {
    for (int i = 0; i < 100; ++i) {
      const double x = u(rng);
      const double fd1 = oracle::central_difference([&](double t) { return m->lift(t); }, x, 1e-6);
      const double fd2 = oracle::central_difference([&](double t) { return m->d1(t); }, x, 1e-6);
      EXPECT_NEAR(m->d1(x), fd1, 1e-8);
      EXPECT_NEAR(m->d2(x), fd2, 1e-6);
    }
  }
}

TEST(CoveringMap, ParabolicNormalisation) {
  EXPECT_EQ(kParabolic.raw_lift(0.0), 0.0);
  EXPECT_NEAR(kParabolic.d1(0.0), 1.0, 1e-15);
  EXPECT_NEAR(kParabolic.d2(0.0), 0.0, 1e-15);
  EXPECT_NEAR(kParabolic.d1(0.5), 3.0, 1e-15);
  EXPECT_NEAR(kGapped.d1(0.0), 0.5, 1e-15);
}

TEST(CoveringMap, SmoothnessReport) {
  const auto p = smoothness_report(kParabolic, 1e-12);
  EXPECT_TRUE(p.valid());
  EXPECT_TRUE(p.unit_derivative_at_zero);
  EXPECT_TRUE(p.flat_second_at_zero);
  const auto d = smoothness_report(kDoubling, 1e-12);
  EXPECT_TRUE(d.valid());
  EXPECT_FALSE(d.unit_derivative_at_zero);
  EXPECT_TRUE(d.flat_second_at_zero);
  EXPECT_THROW(smoothness_report(kDoubling, 0.0), Error);
}

TEST(CoveringMap, RejectsNonMonotoneLift) {
  try {
    make_trig_map({-0.5}, {});
    FAIL() << "expected NonMonotoneLift";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonMonotoneLift);
  }
  EXPECT_THROW(make_trig_map({NAN}, {}), Error);
}

TEST(CoveringMap, SolveInvertsTheLift) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (const CoveringMap* m : {&kDoubling, &kParabolic, &kGapped}) {
    EXPECT_EQ(m->solve(0.0), 0.0);
    EXPECT_EQ(m->solve(2.0), 1.0);
    for (int i = 0; i < 200; ++i) {
      const double t = u(rng);
      EXPECT_NEAR(m->lift(m->solve(t)), t, 1e-13);
    }
  }
  EXPECT_EQ(kDoubling.solve(0.75), 0.375);
}

TEST(CoveringMap, InverseBranches) {
  for (const CoveringMap* m : {&kDoubling, &kParabolic, &kGapped}) {
    for (double y : {0.0, 0.1, 0.5, 0.77}) {
      for (int b : {0, 1}) {
        const CirclePoint x = inverse_branch(*m, CirclePoint(y), b);
        EXPECT_LT(distance(eval(*m, x), CirclePoint(y)), 1e-13);
      }
      EXPECT_LT(inverse_branch(*m, CirclePoint(y), 0).value(), inverse_branch(*m, CirclePoint(y), 1).value());
    }
  }
  EXPECT_THROW(inverse_branch(kDoubling, CirclePoint(0.2), 2), Error);
}

TEST(CoveringMap, MultiplierIsMultiplicative) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const CoveringMap* m : {&kParabolic, &kGapped}) {
    for (int i = 0; i < 50; ++i) {
      const CirclePoint p(u(rng));
      const auto [q, m3] = iterate_with_multiplier(*m, p, 3);
      const auto [r, m2] = iterate_with_multiplier(*m, q, 2);
      const auto [r5, m5] = iterate_with_multiplier(*m, p, 5);
      EXPECT_LT(distance(r, r5), 1e-12);
      EXPECT_NEAR(m5, m3 * m2, 1e-12 * m5);
      EXPECT_NEAR(log_multiplier(*m, p, 5), std::log(m5), 1e-12);
    }
  }
  EXPECT_EQ(iterate_with_multiplier(kDoubling, CirclePoint(0.3), 4).second, 16.0);
  EXPECT_THROW(iterate_with_multiplier(kDoubling, CirclePoint(0.3), -1), Error);
}

TEST(CoveringMap, LiftPowerTracksWholePart) {
  const auto v = lift_power(kDoubling, 0.75, 3);
  EXPECT_EQ(v.whole + v.frac, 6.0);
  const auto w = lift_power(kParabolic, 0.5, 4);
  EXPECT_EQ(w.value(), 8.0);
}

TEST(CoveringMap, JsonRoundTrip) {
  const auto j = map_to_json(kGapped);
  EXPECT_EQ(j["family"], "trig");
  const CoveringMap back = map_from_json(j);
  EXPECT_TRUE(back == kGapped);
  EXPECT_TRUE(map_from_json(nlohmann::json::parse(R"({"family":"trig"})")) == kDoubling);
  EXPECT_THROW(map_from_json(nlohmann::json::parse(R"({"family":"poly","a":[]})")), Error);
  EXPECT_THROW(map_from_json(nlohmann::json::parse(R"({"family":"trig","a":"x"})")), Error);
  EXPECT_THROW(map_from_json(nlohmann::json::parse(R"([1,2])")), Error);
}
