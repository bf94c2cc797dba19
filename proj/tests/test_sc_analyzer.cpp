#include <gtest/gtest.h>

#include <cmath>

#include "hypersc/sc_analyzer.hpp"
#include "test_support.hpp"

using namespace hypersc;
using hypersc::testing::random_point;
using hypersc::testing::random_tangent;
using hypersc::testing::tangent_with_norm;

namespace {

// High-precision evaluations of the closed-form extremal values.
constexpr double kSc5 = 0.40004540199100969;
constexpr double kSc10 = 0.45000000206115363;
constexpr double kSc20 = 0.47500000000000000;
constexpr double kSc30 = 0.48333333333333333;
constexpr double kWsc5 = 0.26950002497309839;
constexpr double kWsc10 = 0.32716515571414153;
constexpr double kWsc20 = 0.35603266600026923;
constexpr double kWsc30 = 0.36565517048676298;
constexpr double kWsc50 = 0.37335317407595799;
constexpr double kWscLimit = 0.38490017945975051;
constexpr double kSigmaTildeR4 = 2.8422573994531512;
constexpr double kSigmaTildeLimit = 1.8027756377319946;

SamplerConfig small_config(std::uint64_t seed, double kappa = 1.0) {
  SamplerConfig cfg;
  cfg.seed = seed;
  cfg.samples = 20000;
  cfg.kappa = kappa;
  cfg.batch = 1000;
  return cfg;
}

}  // namespace

TEST(ScAnalyzer, ClosedFormProbeValues) {
  EXPECT_NEAR(sqdist_sc_probe_value(5), kSc5, 1e-15);
  EXPECT_NEAR(sqdist_sc_probe_value(10), kSc10, 1e-15);
  EXPECT_NEAR(sqdist_sc_probe_value(20), kSc20, 1e-15);
  EXPECT_NEAR(sqdist_sc_probe_value(30), kSc30, 1e-15);
  EXPECT_NEAR(sqdist_wsc_probe_value(5), kWsc5, 1e-15);
  EXPECT_NEAR(sqdist_wsc_probe_value(20), kWsc20, 1e-15);
  EXPECT_NEAR(sqdist_wsc_bound(1.0), kWscLimit, 1e-16);
}

TEST(ScAnalyzer, ProbesReproduceClosedForms) {
  const std::vector<std::pair<double, double>> sc = {{5, kSc5}, {10, kSc10}, {20, kSc20}, {30, kSc30}};
  for (auto [l, expected] : sc) {
    const ProbeCase p = sqdist_probe(l, 2, 1.0);
    const TangentFrame f(p.x);
    EXPECT_NEAR(sc_ratio(*p.field, f, p.field->hessian_matrix(f), p.u, p.v), expected, 1e-9) << l;
  }
  const std::vector<std::pair<double, double>> wsc = {{5, kWsc5}, {10, kWsc10}, {20, kWsc20}, {30, kWsc30}, {50, kWsc50}};
  for (auto [l, expected] : wsc) {
    const ProbeCase p = sqdist_probe(l, 3, 1.0);
    const TangentFrame f(p.x);
    EXPECT_NEAR(wsc_ratio(*p.field, f, p.field->hessian_matrix(f), p.w), expected, 1e-9) << l;
  }
}

TEST(ScAnalyzer, WscProbeApproachesLimitMonotonically) {
  double prev = 0.0;
  for (double l = 5.0; l <= 50.0; l += 1.0) {
    const double v = sqdist_wsc_probe_value(l);
    EXPECT_GT(v, prev);
    EXPECT_LT(v, kWscLimit);
    prev = v;
  }
}

TEST(ScAnalyzer, ProbeScalesWithCurvature) {
  for (double kappa : {0.25, 4.0}) {
    const ProbeCase p = sqdist_probe(20, 2, kappa);
    const TangentFrame f(p.x);
    const Mat h = p.field->hessian_matrix(f);
    EXPECT_NEAR(sc_ratio(*p.field, f, h, p.u, p.v), std::sqrt(kappa) * kSc20, 1e-9);
    EXPECT_NEAR(wsc_ratio(*p.field, f, h, p.w), std::sqrt(kappa) * kWsc20, 1e-9);
  }
}

TEST(ScAnalyzer, RatiosAreHomogeneous) {
  hypersc::testing::Rng rng(31);
  for (int k = 0; k < 50; ++k) {
    const HPoint p = random_point(rng, 3, 1.0);
    const ProductPoint x(random_point(rng, 3, 2.0));
    const auto f = make_sqdist(p);
    const ProductTangent u = random_tangent(rng, x), v = random_tangent(rng, x);
    const double s = sc_ratio(*f, x, u, v);
    EXPECT_NEAR(sc_ratio(*f, x, 2.0 * u, 3.0 * v), s, 1e-12);
    EXPECT_NEAR(wsc_ratio(*f, x, 5.0 * u), wsc_ratio(*f, x, u), 1e-12);
    EXPECT_LE(wsc_ratio(*f, x, u), 0.5 + 1e-12);
  }
}

TEST(ScAnalyzer, RadialDirectionHasZeroRatio) {
  const auto probe = sqdist_probe_directions({3.0, 0.0, 0.0, 0.0}, 2, 1.0);
  const TangentFrame f(probe.where.x);
  const Mat h = probe.where.field->hessian_matrix(f);
  EXPECT_NEAR(sc_ratio(*probe.where.field, f, h, probe.u, probe.u), 0.0, 1e-15);
  EXPECT_NEAR(wsc_ratio(*probe.where.field, f, h, probe.u), 0.0, 1e-15);
}

TEST(ScAnalyzer, DegenerateHessianIsReported) {
  const AffineField lin(Vec::Ones(1));
  const ProductPoint x = ProductPoint::euclidean(Vec::Zero(1));
  const ProductTangent u{HTangent::zero(x.h), Vec::Ones(1)};
  EXPECT_THROW(sc_ratio(lin, x, u, u), DegeneracyError);
  EXPECT_THROW(wsc_ratio(lin, x, u), DegeneracyError);
}

TEST(ScAnalyzer, CertifySqdistWithinBounds) {
  const SCReport rep = certify_sqdist(small_config(1));
  EXPECT_LE(rep.max_sc_ratio, 0.5 + 1e-9);
  EXPECT_GE(rep.max_sc_ratio, 0.49);
  EXPECT_LE(rep.max_wsc_ratio, kWscLimit + 1e-9);
  EXPECT_GE(rep.max_wsc_ratio, 0.38);
  EXPECT_LE(rep.max_wsc_ratio, rep.max_sc_ratio);
  EXPECT_EQ(rep.samples, 20000u);
  EXPECT_FALSE(rep.probes.empty());
}

TEST(ScAnalyzer, CertifyQuarterCurvature) {
  const SCReport rep = certify_sqdist(small_config(2, 0.25));
  EXPECT_LE(rep.max_sc_ratio, 0.25 + 1e-9);
  EXPECT_LE(rep.max_wsc_ratio, 0.19245008972987526 + 1e-9);
  EXPECT_GE(rep.max_sc_ratio, 0.245);
}

TEST(ScAnalyzer, CertifyIsDeterministicAcrossThreadCounts) {
  SamplerConfig a = small_config(9);
  a.threads = 1;
  SamplerConfig b = a;
  b.threads = 3;
  const SCReport ra = certify(sqdist_sampler(a), a);
  const SCReport rb = certify(sqdist_sampler(b), b);
  EXPECT_EQ(ra.max_sc_ratio, rb.max_sc_ratio);
  EXPECT_EQ(ra.max_wsc_ratio, rb.max_wsc_ratio);
  EXPECT_EQ(ra.sc_witness.u, rb.sc_witness.u);
  EXPECT_EQ(ra.sc_witness.x.h.coords(), rb.sc_witness.x.h.coords());
  SamplerConfig c = a;
  c.seed = 10;
  EXPECT_NE(certify(sqdist_sampler(c), c).max_sc_ratio, ra.max_sc_ratio);
}

TEST(ScAnalyzer, WitnessReplays) {
  const SCReport rep = certify_sqdist(small_config(4));
  // The best probe is the far end of the grid; rebuild it from the witness.
  ASSERT_EQ(rep.sc_witness.source, "probe");
  const ProbeCase p = sqdist_probe(rep.probes.back().l, 2, 1.0);
  const TangentFrame f(p.x);
  EXPECT_EQ(rep.max_sc_ratio, sc_ratio(*p.field, f, p.field->hessian_matrix(f), rep.sc_witness.u, rep.sc_witness.v));
}

TEST(ScAnalyzer, BarrierParameterChecks) {
  // -log(R^2 - s) on the Euclidean factor.
  const double r = 3.0;
  const auto bar = make_upper_bound_barrier(1, 0, r * r);
  auto points = [r](Rng& rng) {
    Vec s(1);
    s << r * r * (1.0 - log_uniform(rng, 1e-8, 1.0));
    return ProductPoint::euclidean(s);
  };
  const auto res = barrier_parameter_check(fixed_field_sampler(bar, points), 1.0, 2000, 3);
  EXPECT_TRUE(res.passed);
  EXPECT_NEAR(res.worst_ratio, 1.0, 1e-9);  // -log is exactly 1-SCB

  SamplerConfig cfg;
  cfg.kappa = 1.0;
  const auto ball = barrier_parameter_check(ball_barrier_sampler(2.0, cfg), 1.0, 2000, 4);
  EXPECT_TRUE(ball.passed);
  EXPECT_LE(ball.worst_ratio, 1.0 + 1e-9);

  const auto constant = std::make_shared<QuadraticField>(Mat::Identity(1, 1), Vec::Zero(1));
  auto origin = [](Rng&) { return ProductPoint::euclidean(Vec::Zero(1)); };
  const auto c = barrier_parameter_check(fixed_field_sampler(constant, origin), 1.0, 10, 5);
  EXPECT_EQ(c.worst_ratio, 0.0);
}

TEST(ScAnalyzer, LogBarrierConstant) {
  EXPECT_NEAR(ball_barrier_sc_bound(4.0, 1.0), kSigmaTildeR4, 1e-15);
  EXPECT_NEAR(log_barrier_sc_bound(0.5, 0.0, 0.0), kSigmaTildeLimit, 1e-15);
  EXPECT_NEAR(ball_barrier_sc_bound(1e-12, 1.0), kSigmaTildeLimit, 1e-12);
  SamplerConfig cfg = small_config(6);
  cfg.samples = 5000;
  const auto chk = barrier_sc_constant_check(4.0, cfg);
  EXPECT_TRUE(chk.passed);
  EXPECT_LT(chk.sampled_max, chk.bound);
}

TEST(ScAnalyzer, EuclideanLogBarrierIsOneSc) {
  const auto bar = make_upper_bound_barrier(1, 0, 4.0);
  SamplerConfig cfg;
  cfg.samples = 2000;
  cfg.batch = 500;
  auto points = [](Rng& rng) {
    Vec s(1);
    s << 4.0 * (1.0 - log_uniform(rng, 1e-6, 1.0)) - 3.0;
    return ProductPoint::euclidean(s);
  };
  const SCReport rep = certify(fixed_field_sampler(bar, points), cfg);
  EXPECT_NEAR(rep.max_sc_ratio, 1.0, 1e-9);
}

TEST(ScAnalyzer, OmegaFunctions) {
  EXPECT_NEAR(omega(1.0), 0.30685281944005469, 1e-16);
  EXPECT_NEAR(omega_star(0.5), -0.5 + std::log(2.0), 1e-16);
  EXPECT_EQ(omega(0.0), 0.0);
}

TEST(ScAnalyzer, TransportComparisonZeroLength) {
  const HPoint p = HPoint::apex(2);
  const auto f = make_ball_barrier(p, 3.0);
  hypersc::testing::Rng rng(7);
  const ProductPoint x(exp(p, tangent_with_norm(rng, p, 1.0)));
  const auto tc = transport_comparison(*f, ball_barrier_sc_bound(3.0, 1.0), x, ProductTangent::zero(x));
  EXPECT_NEAR(tc.eigenvalues.minCoeff(), 1.0, 1e-12);
  EXPECT_NEAR(tc.eigenvalues.maxCoeff(), 1.0, 1e-12);
}

TEST(ScAnalyzer, TransportComparisonHalfRadius) {
  hypersc::testing::Rng rng(8);
  const double radius = 3.0;
  const double sigma = ball_barrier_sc_bound(radius, 1.0);
  SamplerConfig cfg;
  const CaseSampler sampler = ball_barrier_sampler(radius, cfg);
  for (int k = 0; k < 200; ++k) {
    const SampleCase c = sampler(rng);
    const TangentFrame f(c.x);
    const Mat h = c.field->hessian_matrix(f);
    Vec u = unit_coords(rng, 2);
    u *= (0.5 / sigma) / local_norm(h, u);
    const auto tc = transport_comparison(*c.field, sigma, c.x, f.tangent(u));
    EXPECT_TRUE(tc.within);
    EXPECT_NEAR(tc.lower, 0.25, 1e-12);
    EXPECT_NEAR(tc.upper, 4.0, 1e-10);
    EXPECT_GT(tc.eigenvalues.minCoeff(), 0.0);
  }
}

TEST(ScAnalyzer, DikinChecksOnBallBarrier) {
  hypersc::testing::Rng rng(9);
  const double radius = 2.0;
  const double sigma = ball_barrier_sc_bound(radius, 1.0);
  SamplerConfig cfg;
  const CaseSampler sampler = ball_barrier_sampler(radius, cfg);
  for (int k = 0; k < 300; ++k) {
    const SampleCase c = sampler(rng);
    const TangentFrame f(c.x);
    Vec u = unit_coords(rng, 2);
    u *= (0.9 / sigma) / local_norm(c.field->hessian_matrix(f), u);
    const DikinCheck chk = dikin_step_check(*c.field, sigma, c.x, f.tangent(u), 1e-9, k < 30);
    EXPECT_TRUE(chk.ok()) << chk.violation;
  }
  const SampleCase c = sampler(rng);
  EXPECT_TRUE(dikin_step_check(*c.field, sigma, c.x, ProductTangent::zero(c.x)).ok());
}

TEST(ScAnalyzer, DikinCheckDetectsWrongConstant) {
  // With sigma far below the true constant the growth bounds must fail somewhere.
  hypersc::testing::Rng rng(10);
  SamplerConfig cfg;
  const CaseSampler sampler = ball_barrier_sampler(2.0, cfg);
  int failures = 0;
  for (int k = 0; k < 200; ++k) {
    const SampleCase c = sampler(rng);
    const TangentFrame f(c.x);
    Vec u = unit_coords(rng, 2);
    u *= 0.9 / local_norm(c.field->hessian_matrix(f), u) / 0.05;
    try {
      if (!dikin_step_check(*c.field, 0.05, c.x, f.tangent(u)).ok()) ++failures;
    } catch (const DomainError&) {
      ++failures;
    }
  }
  EXPECT_GT(failures, 0);
}

TEST(ScAnalyzer, SumRule) {
  hypersc::testing::Rng rng(11);
  const auto f1 = make_sqdist(random_point(rng, 2, 1.0));
  const auto f2 = make_sqdist(random_point(rng, 2, 1.0));
  auto points = [](Rng& r) { return ProductPoint(near_apex(r, 2, 1.0, 3.0)); };
  double worst = 0.0;
  EXPECT_TRUE(sum_rule_check(f1, 0.5, f2, 0.5, 1.0, 1.0, points, 2000, 1, &worst));
  EXPECT_LE(worst, 0.5);
  EXPECT_TRUE(sum_rule_check(f1, 0.5, f1, 0.5, 1.0, 1.0, points, 500, 2));
  EXPECT_TRUE(sum_rule_check(f1, 0.5, f2, 0.5, 4.0, 1.0, points, 500, 3));
  EXPECT_THROW(sum_rule_check(f1, 0.5, f2, 0.5, 0.0, 1.0, points, 1, 3), UsageError);
}

TEST(ScAnalyzer, GaussLegendreIsExactForPolynomials) {
  const auto [t, w] = gauss_legendre_unit(64);
  double s0 = 0, s5 = 0, s20 = 0;
  for (int i = 0; i < 64; ++i) {
    s0 += w[i];
    s5 += w[i] * std::pow(t[i], 5);
    s20 += w[i] * std::pow(t[i], 20);
  }
  EXPECT_NEAR(s0, 1.0, 1e-13);
  EXPECT_NEAR(s5, 1.0 / 6.0, 1e-13);
  EXPECT_NEAR(s20, 1.0 / 21.0, 1e-13);
}

TEST(ScAnalyzer, TightnessScan) {
  const auto scan = tightness_scan({1.0, 5.0, 10.0, 20.0, 40.0});
  for (const auto& p : scan) {
    EXPECT_LE(p.lower_bound, p.wsc + 1e-9) << p.radius;
    EXPECT_LE(p.wsc, p.upper_bound + 1e-9) << p.radius;
  }
  EXPECT_GE(scan[3].wsc / scan[2].wsc, 1.6);
  // The unhalved expression bounds twice the ratio.
  EXPECT_GT(scan[4].third_derivative_lower_bound, scan[4].wsc);
  EXPECT_LE(scan[4].third_derivative_lower_bound, 2.0 * scan[4].wsc);
  EXPECT_GE(scan[4].wsc / scan[3].wsc, 1.6);
  EXPECT_THROW(tightness_point(0.0), UsageError);
}

TEST(ScAnalyzer, TightnessRatioMatchesFiniteDifferences) {
  // Rebuild the configuration and measure |(F o gamma)'''| / (2 (F o gamma)''^{3/2}).
  const double radius = 10.0;
  const TightnessPoint tp = tightness_point(radius);
  const double l = radius / std::sqrt(2.0);
  const HPoint x = HPoint::apex(2);
  const HPoint pole = displaced(x, -Vec::Unit(2, 0), l);
  const auto field = make_ball_barrier(pole, radius);
  const double w = 0.25 * radius * radius;
  const double th = std::atan(std::sqrt(((w + l * l) / w) * std::tanh(l) / l));
  const TangentFrame f{ProductPoint(x)};
  Vec c(2);
  c << std::cos(th), std::sin(th);
  const ProductTangent u = f.tangent(c * 0.1);
  const double d2 = fd_oracle(*field, ProductPoint(x), u, 2);
  const double d3 = fd_oracle(*field, ProductPoint(x), u, 3);
  EXPECT_NEAR(std::abs(d3) / (2.0 * std::pow(d2, 1.5)), tp.wsc, 1e-5 * tp.wsc);
}
