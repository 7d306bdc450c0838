#include <gtest/gtest.h>

#include <cmath>

#include "lwrot/integrate.hpp"

using namespace lwrot;

namespace {

// Reference values from an independent DOP853 integration (rtol 1e-13) of
// the same system, frozen here.
constexpr double kAxisS1 = 1.690776568;
constexpr double kAxisX1 = 1.584035154;
constexpr double kBlowupS1 = 0.3726604986;
constexpr double kBlowupX1 = 0.3592902831;

ProfileCurve run(double z0, double b = -2.0, double a = 2.0) {
  return integrate(validate_params(a, b, z0));
}

}  // namespace

TEST(Integrate, InitialConditions) {
  for (double z0 : {0.5, 1.0, 1.5, 3.0}) {
    const ProfileCurve c = run(z0);
    const ProfileState& s0 = c.samples.front();
    EXPECT_EQ(s0.s, 0.0);
    EXPECT_EQ(s0.x, 0.0);
    EXPECT_EQ(s0.z, z0);
    EXPECT_EQ(s0.theta, 0.0);
    for (std::size_t i = 1; i < c.samples.size(); ++i) {
      ASSERT_GT(c.samples[i].s, c.samples[i - 1].s);
      ASSERT_GT(c.samples[i].z, 0.0);
    }
  }
}

TEST(Integrate, AxisContactEndpoint) {
  const ProfileCurve c = run(0.5);
  ASSERT_EQ(c.termination.kind, TerminationKind::AxisContact);
  // The quoted maximal domain half-width 1.69 is an arclength.
  EXPECT_NEAR(c.termination.s_event, 1.69, 0.01);
  EXPECT_NEAR(c.termination.s_event, kAxisS1, 1e-7);
  EXPECT_NEAR(c.termination.state_event.x, kAxisX1, 1e-7);
  EXPECT_EQ(c.termination.state_event.z, 0.0);
  // On the axis cos^2(theta) = -f(z0)/b.
  const double c2 = std::pow(std::cos(c.termination.state_event.theta), 2);
  EXPECT_NEAR(c2, 1.25 / 2.0, 1e-7);
  EXPECT_FALSE(c.termination.state_event.regular());
}

TEST(Integrate, BlowupEndpoint) {
  const ProfileCurve c = run(1.5);
  ASSERT_EQ(c.termination.kind, TerminationKind::DenominatorBlowup);
  EXPECT_NEAR(c.termination.s_event, 0.372, 0.001);
  EXPECT_NEAR(c.termination.s_event, kBlowupS1, 1e-8);
  EXPECT_NEAR(c.termination.state_event.x, kBlowupX1, 1e-8);
  // Meeting point of the level set with the singular curve:
  // cos^2(theta1) = a^2 f / (b Δ), z1 = -2b cos(theta1) / a.
  const double cos1 = std::sqrt(4.0 * 1.25 / 8.0);
  EXPECT_NEAR(c.termination.state_event.z, 2.0 * cos1, 1e-9);
  EXPECT_NEAR(c.termination.state_event.z, std::sqrt(2.5), 1e-9);
  EXPECT_NEAR(c.termination.state_event.theta, std::acos(cos1), 1e-6);
}

TEST(Integrate, Stationary) {
  const ProfileCurve c = run(1.0);
  EXPECT_EQ(c.termination.kind, TerminationKind::Stationary);
  for (const ProfileState& st : c.samples) {
    EXPECT_EQ(st.z, 1.0);
    EXPECT_EQ(st.theta, 0.0);
    EXPECT_EQ(st.x, st.s);
    EXPECT_EQ(st.K, 0.0);
  }
  const ProfileState mid = c.state_at(3.3);
  EXPECT_EQ(mid.x, 3.3);
}

TEST(Integrate, PeriodClosed) {
  const ProfileCurve c = run(3.0);
  ASSERT_EQ(c.termination.kind, TerminationKind::PeriodClosed);
  ASSERT_TRUE(c.period);
  const ProfileState& e = c.termination.state_event;
  EXPECT_NEAR(e.theta, -2.0 * kPi, 1e-10);
  EXPECT_NEAR(e.z, 3.0, 1e-8);
  EXPECT_NEAR(*c.period, 2.0 * kPi, 1e-8);
  EXPECT_NEAR(c.x_period(), -1.52579029, 1e-7);
  ASSERT_TRUE(c.milestones);
  EXPECT_NEAR(c.milestones->t1, 1.0895845, 1e-6);
  EXPECT_NEAR(c.milestones->t2, kPi, 1e-8);
  EXPECT_NEAR(c.milestones->t3, 5.1936008, 1e-6);
  EXPECT_NEAR(c.milestones->t1 + c.milestones->t3, *c.period, 1e-8);
}

TEST(Integrate, WeingartenAndDriftAlongTrajectories) {
  for (double z0 : {0.5, 1.5, 3.0, 0.2, 1.9, 2.1, 6.0}) {
    const ProfileCurve c = run(z0);
    EXPECT_LE(c.max_drift, 1e-8) << z0;
    const auto& p = c.params;
    for (const ProfileState& st : c.samples) {
      ASSERT_TRUE(st.regular());
      ASSERT_LE(std::abs(weingarten_residual(p, st)), 1e-9) << z0 << " " << st.s;
      ASSERT_LE(std::abs(first_integral_residual(p, st.z, st.theta)), 1e-8);
    }
  }
}

TEST(Integrate, ForwardBackwardConsistency) {
  for (double z0 : {0.5, 1.5, 3.0}) {
    const ProfileCurve c = run(z0);
    const auto& p = c.params;
    // Start from the last integration node (the event state, or the point
    // at z = eps_axis for axis contact) and run back to s = 0.
    const detail::Vec4 y_end = c.nodes.back().y;
    // Reversed orientation: at a blow-up the last steps ran in angle mode,
    // so the angle direction is reversed as well.
    const detail::DenseNode& last = c.nodes[c.nodes.size() - 2];
    const double sigma0 = last.mode == StepMode::Angle ? -last.sigma : 0.0;
    auto tr = detail::trace(p, c.config, y_end, -1.0,
                            {detail::arclength_event(0.0, -1.0, true)}, sigma0);
    const detail::Vec4 back = tr.nodes.back().y;
    EXPECT_NEAR(back[detail::kS], 0.0, 1e-10) << z0;
    EXPECT_NEAR(back[detail::kX], 0.0, 1e-6) << z0;
    EXPECT_NEAR(back[detail::kZ], z0, 1e-6) << z0;
    EXPECT_NEAR(back[detail::kTheta], 0.0, 1e-6) << z0;
  }
}

TEST(Integrate, ToleranceConvergence) {
  const auto p = validate_params(2.0, -2.0, 0.5);
  IntegrationConfig coarse;
  coarse.rel_tol = 1e-8;
  coarse.abs_tol = 1e-10;
  IntegrationConfig fine = coarse;
  fine.rel_tol = 0.5e-8;
  const ProfileCurve c1 = integrate(p, coarse);
  const ProfileCurve c2 = integrate(p, fine);
  const double dx =
      std::abs(c1.termination.state_event.x - c2.termination.state_event.x);
  EXPECT_LE(dx, 10.0 * c1.accumulated_error + 1e-14);
  EXPECT_GT(c1.accumulated_error, 0.0);
}

TEST(Integrate, PeriodicThetaStrictlyDecreasing) {
  for (double z0 : {2.5, 3.0, 5.0}) {
    const ProfileCurve c = run(z0);
    double worst = -1e300;
    for (const ProfileState& st : c.samples) worst = std::max(worst, st.kappa2 * -1.0);
    EXPECT_LT(worst, 0.0) << z0;
    for (std::size_t i = 1; i < c.samples.size(); ++i) {
      ASSERT_LT(c.samples[i].theta, c.samples[i - 1].theta);
    }
  }
}

TEST(Integrate, GraphRegimeHeightDerivatives) {
  {
    // z0 < a/2: z' < 0 and z'' = cos(theta) theta' < 0 for s > 0.
    const ProfileCurve c = run(0.5);
    for (std::size_t i = 1; i < c.samples.size(); ++i) {
      const ProfileState& st = c.samples[i];
      EXPECT_LT(std::sin(st.theta), 0.0);
      EXPECT_LT(std::cos(st.theta) * -st.kappa2, 0.0);
    }
  }
  {
    const ProfileCurve c = run(1.5);
    for (std::size_t i = 1; i < c.samples.size(); ++i) {
      EXPECT_GT(std::sin(c.samples[i].theta), 0.0);
    }
  }
}

TEST(Integrate, TenPeriodDrift) {
  const auto p = validate_params(2.0, -2.0, 3.0);
  IntegrationConfig cfg;
  cfg.stop_at_period = false;
  cfg.max_arclength = 10.0 * 2.0 * kPi;
  const ProfileCurve c = integrate(p, cfg);
  EXPECT_EQ(c.termination.kind, TerminationKind::ArclengthCap);
  EXPECT_LE(c.max_drift, 1e-8);
  EXPECT_LT(c.termination.state_event.theta, -19.0 * kPi);
}

TEST(Integrate, CapReachedIsReported) {
  const auto p = validate_params(2.0, -2.0, 3.0);
  IntegrationConfig cfg;
  cfg.max_arclength = 1.0;
  try {
    integrate(p, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CapReached);
  }
}

TEST(Integrate, DriftThresholdEnforced) {
  const auto p = validate_params(2.0, -2.0, 3.0);
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-3;
  cfg.abs_tol = 1e-3;
  cfg.drift_threshold = 1e-14;
  try {
    integrate(p, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DriftExceeded);
  }
}

TEST(Integrate, DenseOutputMatchesSamples) {
  const ProfileCurve c = run(3.0);
  for (std::size_t i = 0; i < c.samples.size(); i += 7) {
    const ProfileState st = c.state_at(c.samples[i].s);
    EXPECT_NEAR(st.x, c.samples[i].x, 1e-13);
    EXPECT_NEAR(st.z, c.samples[i].z, 1e-13);
  }
  // Between nodes the interpolant stays on the level set.
  for (int k = 1; k < 50; ++k) {
    const ProfileState st = c.state_at(*c.period * k / 50.0 + 1e-3);
    EXPECT_NEAR(first_integral_residual(c.params, st.z, st.theta), 0.0, 1e-9);
  }
}

TEST(ExtendPeriodic, IdentityForZero) {
  const ProfileCurve c = run(3.0);
  const ProfileCurve e = extend_periodic(c, 0);
  ASSERT_EQ(e.samples.size(), c.samples.size());
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    EXPECT_EQ(e.samples[i].s, c.samples[i].s);
    EXPECT_EQ(e.samples[i].x, c.samples[i].x);
  }
}

TEST(ExtendPeriodic, TranslationIsExact) {
  const ProfileCurve c = run(3.0);
  const ProfileCurve e = extend_periodic(c, 2);
  const std::size_t n = c.samples.size() - 1;
  ASSERT_EQ(e.samples.size(), 3 * n + 1);
  const double T = *c.period, xT = c.x_period();
  for (std::size_t i = 0; i < n; ++i) {
    const ProfileState& a = e.samples[i];
    const ProfileState& b = e.samples[i + n];
    EXPECT_EQ(b.z, a.z);
    EXPECT_EQ(b.x, a.x + xT);
    EXPECT_EQ(b.theta, a.theta - 2.0 * kPi);
    EXPECT_EQ(b.s, a.s + T);
  }
  EXPECT_NEAR(e.state_at(2.5 * T).z, c.state_at(0.5 * T).z, 1e-12);
}

TEST(ExtendPeriodic, BoundsOverThreePeriods) {
  const ProfileCurve e = extend_periodic(run(3.0), 3);
  double lo = 1e300, hi = -1e300;
  for (const ProfileState& st : e.samples) {
    lo = std::min(lo, st.z);
    hi = std::max(hi, st.z);
  }
  EXPECT_EQ(hi, 3.0);
  EXPECT_GE(lo, 1.0 - 1e-7);
  // Min attained at theta = -pi, found on the dense curve.
  const ProfileCurve c = run(3.0);
  EXPECT_NEAR(c.state_at(c.milestones->t2).z, 1.0, 1e-8);
}

TEST(ExtendPeriodic, RejectsNonPeriodic) {
  try {
    extend_periodic(run(0.5), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPeriodic);
  }
}

TEST(Reflect, MirrorsSamples) {
  const ProfileCurve c = run(0.5);
  const ProfileCurve r = reflect(c);
  ASSERT_EQ(r.samples.size(), 2 * c.samples.size() - 1);
  const std::size_t mid = c.samples.size() - 1;
  for (std::size_t i = 1; i < c.samples.size(); ++i) {
    const ProfileState& m = r.samples[mid - i];
    EXPECT_EQ(m.s, -c.samples[i].s);
    EXPECT_EQ(m.x, -c.samples[i].x);
    EXPECT_EQ(m.z, c.samples[i].z);
    EXPECT_EQ(m.theta, -c.samples[i].theta);
  }
  // Full domain (-x1, x1).
  const auto poly = r.polyline();
  EXPECT_EQ(poly.front().x, -c.termination.state_event.x);
  EXPECT_EQ(poly.back().x, c.termination.state_event.x);
  EXPECT_EQ(r.state_at(-0.7).z, c.state_at(0.7).z);
}

TEST(Reflect, CylinderLine) {
  const ProfileCurve r = reflect(run(1.0));
  EXPECT_EQ(r.samples.front().x, -10.0);
  EXPECT_EQ(r.samples.back().x, 10.0);
  for (const ProfileState& st : r.samples) EXPECT_EQ(st.z, 1.0);
}

TEST(Integrate, OtherParameters) {
  // a = 1, b = -1: a/2 = 0.5, -2b/a = 2.
  EXPECT_EQ(run(0.3, -1.0, 1.0).termination.kind, TerminationKind::AxisContact);
  EXPECT_EQ(run(1.2, -1.0, 1.0).termination.kind,
            TerminationKind::DenominatorBlowup);
  EXPECT_EQ(run(2.4, -1.0, 1.0).termination.kind, TerminationKind::PeriodClosed);
  EXPECT_EQ(run(0.5, -1.0, 1.0).termination.kind, TerminationKind::Stationary);
}
