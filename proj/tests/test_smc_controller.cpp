// Copyright 2026 The dubins_smc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dubins_smc/smc_controller.hpp"

using namespace dubins_smc;  // NOLINT

namespace
{

// Flat-output route to delta' of the continuous-steering law. e_dub is the
// front wheel error; its second derivative w.r.t. the rear path depends on
// delta' itself, so the affine fixed point x = f(x) is solved directly.
double flatness_pipeline(const WheelError & rear, double delta, const ControllerParams & p)
{
  const double lambda = p.lambdas[0];
  const double e1 = std::sin(rear.psi);
  const double e2 = std::cos(rear.psi) * std::tan(delta) / lambda;
  const double e_f = rear.e + lambda * std::sin(rear.psi);
  const double psi_f = rear.psi + delta;
  const double kappa_f = p.kappa_bar *
    sign_of(-e_f - (1.0 - std::cos(psi_f)) / ((1.0 - p.k_rob) * p.kappa_bar) *
      sign_of(std::sin(psi_f)));
  const double c2 = std::cos(delta) * std::cos(delta);
  const double a = std::cos(psi_f) * kappa_f / c2;
  const double b = std::sin(psi_f) * std::sin(delta) / c2;
  auto f = [&](double ddelta) {
      const double e_dub2 = a + b * ddelta;
      const double e3 = (e_dub2 - e2) / lambda;
      return flatness_ddelta(rear.e, e1, e2, e3, lambda);
    };
  const double f0 = f(0.0);
  const double slope = f(1.0) - f0;
  return f0 / (1.0 - slope);
}

// RK4 on the trailer-form joint ODE, used for finite-difference checks.
std::vector<double> integrate_joints(
  std::vector<double> x, const std::vector<double> & lambdas, double kappa, double ds, int steps)
{
  auto add = [](std::vector<double> a, const std::vector<double> & b, double k) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] += k * b[i];
      }
      return a;
    };
  for (int i = 0; i < steps; ++i) {
    const auto k1 = fictive_rates(x, lambdas, kappa);
    const auto k2 = fictive_rates(add(x, k1, ds / 2), lambdas, kappa);
    const auto k3 = fictive_rates(add(x, k2, ds / 2), lambdas, kappa);
    const auto k4 = fictive_rates(add(x, k3, ds), lambdas, kappa);
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] += ds / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
  }
  return x;
}

}  // namespace

TEST(SlidingSigma, Examples)
{
  EXPECT_DOUBLE_EQ(sliding_sigma({0.0, 0.0}, 0.2, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(sliding_sigma({1.0, 0.0}, 0.7, 0.0), -1.0);
  // -0.5 - (1 - cos(pi/3)) / 0.2
  EXPECT_NEAR(sliding_sigma({0.5, kPi / 3.0}, 0.2, 0.0), -3.0, 1e-12);
  // k_rob flattens the surface
  EXPECT_NEAR(sliding_sigma({0.5, kPi / 3.0}, 0.2, 0.5), -0.5 - 0.5 / 0.1, 1e-12);
}

TEST(DubinsKappa, Examples)
{
  EXPECT_DOUBLE_EQ(dubins_kappa(-3.0, 0.2), -0.2);
  EXPECT_DOUBLE_EQ(dubins_kappa(0.0, 0.2, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(dubins_kappa(0.0, 0.2, 1.0), 0.2);
  EXPECT_DOUBLE_EQ(dubins_kappa(1e-12, 1.0), 1.0);
}

TEST(DubinsKappa, PositiveScalingInvariance)
{
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> sig(-5.0, 5.0), scale(1e-6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double s = sig(rng);
    ASSERT_EQ(dubins_kappa(s, 0.3), dubins_kappa(s * scale(rng), 0.3));
  }
}

TEST(LiftFront, Examples)
{
  const WheelError a = lift_front({1.0, 0.0}, 0.1, 2.0);
  EXPECT_DOUBLE_EQ(a.e, 1.0);
  EXPECT_DOUBLE_EQ(a.psi, 0.1);
  const WheelError b = lift_front({0.5, kPi / 6.0}, 0.0, 2.0);
  EXPECT_NEAR(b.e, 1.5, 1e-12);
  EXPECT_NEAR(b.psi, kPi / 6.0, 1e-12);
  const WheelError c = lift_front({0.0, 0.0}, 0.0, 3.7);
  EXPECT_DOUBLE_EQ(c.e, 0.0);
  EXPECT_DOUBLE_EQ(c.psi, 0.0);
}

TEST(LiftChain, StraightPathZeroAngles)
{
  const RefPath path = build_arc_sequence({{0.0, 100.0}});
  const std::vector<double> lambdas{2.0, 1.0, 0.5};
  const ChainState st{{0.7, 0.0}, 0.0, {0.0, 0.0}};
  const auto errs = lift_chain(st, lambdas, path, {{10.0, 0.7}, 0.0});
  ASSERT_EQ(errs.size(), 4u);
  for (const auto & w : errs) {
    EXPECT_NEAR(w.e, 0.7, 1e-12);
    EXPECT_NEAR(w.psi, 0.0, 1e-12);
  }
}

TEST(LiftChain, StraightPathMatchesComposedLiftFront)
{
  const RefPath path = build_arc_sequence({{0.0, 100.0}});
  const std::vector<double> lambdas{2.0, 1.2};
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> e(-2, 2), psi(-0.8, 0.8), d(-0.4, 0.4), dd(-0.2, 0.2);
  for (int i = 0; i < 200; ++i) {
    const double y = e(rng), h = psi(rng);
    const ChainState st{{y, h}, d(rng), {dd(rng)}};
    const auto errs = lift_chain(st, lambdas, path, {{20.0, y}, h});
    const auto fict = chain_fictive_angles(st.delta, st.delta_derivs, lambdas);
    const WheelError front = lift_front(st.rear, fict[0], lambdas[0]);
    const WheelError lead = lift_front(front, fict[1], lambdas[1]);
    ASSERT_NEAR(errs[1].e, front.e, 1e-9);
    ASSERT_NEAR(errs[1].psi, front.psi, 1e-9);
    ASSERT_NEAR(errs[2].e, lead.e, 1e-9);
    ASSERT_NEAR(errs[2].psi, lead.psi, 1e-9);
  }
}

TEST(LiftChain, StationaryCorneringPutsLeadOnRealFrontTrack)
{
  // circle of radius 20 around the origin, counter-clockwise
  const double radius = 20.0;
  const RefPath path = build_arc_sequence({{1.0 / radius, 2.0 * kPi * radius * 0.9}},
      {{0.0, -radius}, 0.0});
  const double lambda_veh = 2.7;
  const double lambda_l = 1.5;
  const double lambda = std::sqrt(lambda_veh * lambda_veh - lambda_l * lambda_l);
  // rear wheel on a smaller concentric circle so that the real front wheel is on the path
  const double rear_r = std::sqrt(radius * radius - lambda_veh * lambda_veh);
  const Pose2 rear{{0.0, -rear_r}, 0.0};
  const double delta = std::atan(lambda / rear_r);
  const double front_r = std::hypot(rear_r, lambda);
  const double delta_l = std::atan(lambda_l / front_r);
  // delta' = 0 in stationary cornering reproduces delta_l
  const ChainState st{{0.0, 0.0}, delta, {0.0}};
  const auto fict = chain_fictive_angles(st.delta, st.delta_derivs, {lambda, lambda_l});
  EXPECT_NEAR(fict[1], delta_l, 1e-12);

  const auto errs = lift_chain(st, {lambda, lambda_l}, path, rear);
  const Vec2 real_front = rear.position + heading_vector(rear.heading) * lambda_veh;
  const double e_real_front = path.project(real_front).e;
  EXPECT_NEAR(e_real_front, 0.0, 1e-9);
  EXPECT_NEAR(errs[2].e, e_real_front, 1e-9);
}

TEST(ControlC0, Examples)
{
  ControllerParams p{0.1, 0.0, {2.0}, 0.0};
  // sigma > 0 requires e_f < 0
  EXPECT_NEAR(control_c0({{-1.0, 0.0}, 0.0, {}}, p), 0.1, 1e-15);
  EXPECT_NEAR(c0_rate(kPi / 6.0, 0.0, 2.0), -0.28867513459481287, 1e-14);
  const double edge = std::asin(0.1 * 2.0);
  EXPECT_NEAR(c0_rate(edge, 0.1, 2.0), 0.0, 1e-15);
  EXPECT_THROW(control_c0({{0.0, 0.0}, kPi / 2.0, {}}, p), DomainViolation);
}

TEST(ControlC1, Examples)
{
  const C1Terms t = c1_terms(0.0, 0.0, 0.3, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(t.delta_l, 0.0);
  EXPECT_DOUBLE_EQ(t.ddelta_l, 0.3);
  EXPECT_DOUBLE_EQ(t.dd_delta, 0.3);

  const C1Terms u = c1_terms(0.0, 0.2, 0.0, 2.0, 1.0);
  EXPECT_NEAR(u.delta_l, 0.19739555984988078, 1e-14);

  // on the sliding surface sign(0) = 0 leaves the chain in stationary cornering
  ControllerParams p{0.2, 0.0, {2.0, 1.0}, 0.0};
  const C1Terms s = control_c1_terms({{0.0, 0.0}, 0.0, {0.0}}, p);
  EXPECT_DOUBLE_EQ(s.sigma, 0.0);
  EXPECT_DOUBLE_EQ(s.kappa_l, 0.0);
  EXPECT_DOUBLE_EQ(s.dd_delta, 0.0);
  p.sign_zero = 1.0;
  EXPECT_DOUBLE_EQ(control_c1_terms({{0.0, 0.0}, 0.0, {0.0}}, p).kappa_l, 0.2);
}

TEST(ControlCn, MatchesClosedFormsOnRandomStates)
{
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> e(-4, 4), psi(-1.2, 1.2), d(-0.6, 0.6), dd(-0.3, 0.3);
  std::uniform_real_distribution<double> lam(0.3, 3.0), kap(0.02, 0.3), kr(0.0, 0.9);
  for (int i = 0; i < 20000; ++i) {
    const double lambda = lam(rng);
    const double lambda_l = lam(rng) / 3.0;
    const double kb = kap(rng);
    const double k_rob = kr(rng);
    const ChainState st{{e(rng), psi(rng)}, d(rng), {dd(rng)}};
    const ControllerParams p1{kb, k_rob, {lambda}, 0.0};
    ASSERT_NEAR(control_cn(st, p1), control_c0(st, p1), 1e-12);
    const ControllerParams p2{kb, k_rob, {lambda, lambda_l}, 0.0};
    ASSERT_NEAR(control_cn(st, p2), control_c1(st, p2), 1e-12);
  }
}

TEST(ControlCn, ZeroStateHoldsZero)
{
  for (std::size_t n = 1; n <= 4; ++n) {
    ControllerParams p{0.1, 0.0, std::vector<double>(n, 1.0), 0.0};
    const ChainState st{{0.0, 0.0}, 0.0, std::vector<double>(n - 1, 0.0)};
    EXPECT_DOUBLE_EQ(control_cn(st, p), 0.0) << "n = " << n;
  }
}

TEST(ChainAlgebra, ThirdOrderDerivativesMatchFiniteDifferences)
{
  const std::vector<double> lambdas{2.0, 1.0, 0.7};
  const std::vector<double> fict{0.15, -0.1, 0.2};
  const double kappa = 0.35;
  const auto derivs = derivatives_from_fictive(fict, lambdas);
  const double top = top_derivative_for_curvature(fict[0], derivs, lambdas, kappa);
  const double h = 1e-3;
  const int sub = 10;
  const double fwd = integrate_joints(fict, lambdas, kappa, h / sub, sub)[0];
  const double fwd2 = integrate_joints(fict, lambdas, kappa, h / sub, 2 * sub)[0];
  const double back = integrate_joints(fict, lambdas, kappa, -h / sub, sub)[0];
  const double back2 = integrate_joints(fict, lambdas, kappa, -h / sub, 2 * sub)[0];
  EXPECT_NEAR((fwd - back) / (2 * h), derivs[0], 1e-6);
  EXPECT_NEAR((fwd - 2 * fict[0] + back) / (h * h), derivs[1], 1e-5);
  EXPECT_NEAR((fwd2 - 2 * fwd + 2 * back - back2) / (2 * h * h * h), top, 1e-3);
}

TEST(ChainAlgebra, FictiveAnglesRoundTrip)
{
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> d(-0.5, 0.5), dd(-0.2, 0.2);
  const std::vector<double> lambdas{2.5, 1.0, 0.6, 0.4};
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> derivs{dd(rng), dd(rng), dd(rng)};
    const double delta = d(rng);
    const auto fict = chain_fictive_angles(delta, derivs, lambdas);
    const auto back = derivatives_from_fictive(fict, lambdas);
    for (std::size_t k = 0; k < derivs.size(); ++k) {
      ASSERT_NEAR(back[k], derivs[k], 1e-9 * (1.0 + std::abs(derivs[k])));
    }
  }
}

TEST(InvariantBounds, Examples)
{
  EXPECT_NEAR(invariant_bounds(0.5, 1.0), kPi / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(invariant_bounds(0.25, 4.0), kPi / 2.0);
  EXPECT_DOUBLE_EQ(invariant_bounds(0.0, 3.0), 0.0);
  EXPECT_THROW(invariant_bounds(0.5, 3.0), InvalidSpec);
}

TEST(FlatnessDdelta, Examples)
{
  EXPECT_DOUBLE_EQ(flatness_ddelta(0.0, 0.0, 0.0, 0.0, 2.0), 0.0);
  // e' = e'' = 0 collapses the formula to lambda * e'''
  EXPECT_DOUBLE_EQ(flatness_ddelta(0.0, 0.0, 0.0, 0.3, 1.0), 0.3);
  EXPECT_DOUBLE_EQ(flatness_ddelta(0.0, 0.0, 0.0, 0.3, 2.0), 0.6);
  EXPECT_THROW(flatness_ddelta(0.0, 1.0, 0.0, 0.0, 1.0), DomainViolation);
}

TEST(FlatnessDdelta, PipelineEqualsTrailerForm)
{
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> e(-4, 4), psi(-1.3, 1.3), d(-0.9, 0.9);
  std::uniform_real_distribution<double> lam(0.3, 3.0), kap(0.05, 0.5), kr(0.0, 0.8);
  for (int i = 0; i < 20000; ++i) {
    const ControllerParams p{kap(rng), kr(rng), {lam(rng)}, 0.0};
    const WheelError rear{e(rng), psi(rng)};
    const double delta = d(rng);
    const double expected = control_c0({rear, delta, {}}, p);
    ASSERT_NEAR(flatness_pipeline(rear, delta, p), expected, 1e-9);
  }
}

TEST(HosmZeta, Examples)
{
  EXPECT_DOUBLE_EQ(hosm_zeta(0.0, 0.0, 0.3, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(hosm_zeta(0.1, 0.0, 0.7, 0.2), -0.1);
  EXPECT_THROW(hosm_zeta(0.0, 1.5, 0.3, 0.0), DomainViolation);
}

TEST(HosmZeta, EqualsSlidingSigmaAtFrontWheel)
{
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> e(-4, 4), psi(-1.5, 1.5), kap(0.05, 0.5), kr(0, 0.9);
  for (int i = 0; i < 20000; ++i) {
    const WheelError front{e(rng), psi(rng)};
    const double kb = kap(rng), k_rob = kr(rng);
    ASSERT_NEAR(
      hosm_zeta(front.e, std::sin(front.psi), kb, k_rob), sliding_sigma(front, kb, k_rob), 1e-12);
  }
}

TEST(ControllerParams, Validation)
{
  EXPECT_THROW((ControllerParams{0.1, 1.0, {2.0}, 0.0}.validate()), InvalidSpec);
  EXPECT_THROW((ControllerParams{0.1, 0.0, {2.0, -1.0}, 0.0}.validate()), InvalidSpec);
  EXPECT_THROW((ControllerParams{0.5, 0.0, {2.0, 3.0}, 0.0}.validate()), InvalidSpec);
  EXPECT_THROW((ControllerParams{0.1, 0.0, {}, 0.0}.validate()), InvalidSpec);
  EXPECT_NO_THROW((ControllerParams{0.5, 0.0, {2.0, 2.0}, 0.0}.validate()));
}

namespace
{

struct RearState
{
  double e, psi;
};

// closed loop on a straight path: rear wheel integrated exactly per step with RK4,
// joint chain by the controller's own Euler integrator
template<class Fn>
void run_straight(ChainController & ctrl, RearState rear, double ds, int steps, Fn && visit)
{
  const double lambda = ctrl.params().lambdas[0];
  for (int k = 0; k < steps; ++k) {
    const auto dec = ctrl.decide_straight({rear.e, rear.psi});
    visit(k, rear, dec);
    const double curv = std::tan(ctrl.delta()) / lambda;
    auto f = [&](double psi) {return std::sin(psi);};
    const double p0 = rear.psi;
    const double k1 = f(p0), k2 = f(p0 + 0.5 * ds * curv), k4 = f(p0 + ds * curv);
    rear.e += ds / 6.0 * (k1 + 4.0 * k2 + k4);
    rear.psi += ds * curv;
    ctrl.advance(dec.kappa, ds);
  }
}

}  // namespace

TEST(ChainControllerProperty, InvariantSetsAreNeverLeft)
{
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int run = 0; run < 300; ++run) {
    const double lambda = 2.0 + 0.5 * u(rng);
    const double lambda_l = 0.8 + 0.5 * u(rng);
    const double kb = 0.15 + 0.1 * u(rng);
    ChainController ctrl({kb, 0.2, {lambda, lambda_l}, 0.0});
    const double bound_l = invariant_bounds(kb, lambda_l);
    const double kappa_f_bar = std::tan(bound_l) / lambda_l;
    const double bound = invariant_bounds(kappa_f_bar, lambda);
    ctrl.set_fictive({bound * u(rng), bound_l * u(rng)});
    run_straight(ctrl, {3.0 * u(rng), 0.9 * u(rng)}, 0.01, 800,
      [&](int, const RearState &, const ChainController::Decision &) {
        ASSERT_LE(std::abs(ctrl.fictive()[0]), bound + 1e-9);
        ASSERT_LE(std::abs(ctrl.fictive()[1]), bound_l + 1e-9);
      });
  }
}

TEST(ChainControllerProperty, LagIdentityAndReaching)
{
  ChainController ctrl({0.2, 0.0, {2.0, 0.8}, 0.0});
  const double ds = 0.005;
  std::vector<double> es, efs;
  run_straight(ctrl, {2.0, 0.3}, ds, 12000,
    [&](int, const RearState & r, const ChainController::Decision & dec) {
      es.push_back(r.e);
      efs.push_back(dec.wheels[1].e);
      // e_l = e_f + sin(psi_f) * lambda_l
      ASSERT_NEAR(dec.wheels[2].e, dec.wheels[1].e + std::sin(dec.wheels[1].psi) * 0.8, 1e-12);
    });
  for (std::size_t k = 1; k + 1 < es.size(); ++k) {
    const double de = (es[k + 1] - es[k - 1]) / (2.0 * ds);
    ASSERT_NEAR(de, (efs[k] - es[k]) / 2.0, 1e-4) << "k = " << k;
  }
  EXPECT_LT(std::abs(es.back()), 1e-3);
}
