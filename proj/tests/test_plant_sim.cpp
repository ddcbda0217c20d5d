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
#include <sstream>
#include <vector>

#include "dubins_smc/plant_sim.hpp"

using namespace dubins_smc;  // NOLINT

namespace
{

double circle_closure_error(double delta, int steps, const VehicleParams & veh)
{
  const double radius = veh.lambda_veh / std::tan(delta);
  const double ds = 2.0 * kPi * radius / steps;
  KinematicState st;
  for (int i = 0; i < steps; ++i) {
    st = step_kinematic(st, delta, ds, veh);
  }
  return std::hypot(st.x, st.y);
}

// distance to the closed-form circle point after a 1 rad turn
double arc_endpoint_error(double delta, int steps, const VehicleParams & veh)
{
  const double radius = veh.lambda_veh / std::tan(delta);
  const double ds = radius / steps;
  KinematicState st;
  for (int i = 0; i < steps; ++i) {
    st = step_kinematic(st, delta, ds, veh);
  }
  return std::hypot(st.x - radius * std::sin(1.0), st.y - radius * (1.0 - std::cos(1.0)));
}

}  // namespace

TEST(StepKinematic, StraightTranslation)
{
  const VehicleParams veh;
  KinematicState st{1.0, 2.0, 0.3, 0.0, 0.0};
  const KinematicState out = step_kinematic(st, 0.0, 0.5, veh);
  EXPECT_NEAR(out.x, 1.0 + 0.5 * std::cos(0.3), 1e-15);
  EXPECT_NEAR(out.y, 2.0 + 0.5 * std::sin(0.3), 1e-15);
  EXPECT_DOUBLE_EQ(out.psi, 0.3);
  EXPECT_DOUBLE_EQ(out.s, 0.5);
}

TEST(StepKinematic, CircleClosureAndIntegratorOrder)
{
  const VehicleParams veh;
  EXPECT_LT(circle_closure_error(0.2, 400, veh), 1e-6);
  EXPECT_LT(circle_closure_error(0.5, 37, veh), 1e-6);
  const double e1 = arc_endpoint_error(0.2, 4, veh);
  const double e2 = arc_endpoint_error(0.2, 8, veh);
  EXPECT_NEAR(e1 / e2, 16.0, 1.5);
}

TEST(StepKinematic, HeadingRateMatchesCurvature)
{
  const VehicleParams veh;
  KinematicState st;
  for (double delta : {-0.5, -0.1, 0.0, 0.25, 0.55}) {
    const KinematicState out = step_kinematic(st, delta, 0.01, veh);
    EXPECT_NEAR((out.psi - st.psi) / 0.01 * veh.lambda_veh, std::tan(delta), 1e-9);
    st = out;
  }
}

TEST(StepKinematic, Errors)
{
  const VehicleParams veh;
  EXPECT_THROW(step_kinematic({}, 0.0, 0.0, veh), DomainViolation);
  EXPECT_THROW(step_kinematic({}, veh.delta_max + 1e-6, 0.1, veh), DomainViolation);
}

TEST(StepKinetic, StraightDriving)
{
  const VehicleParams veh;
  KineticState st;
  st.v = 10.0;
  for (int i = 0; i < 100; ++i) {
    st = step_kinetic(st, 0.0, 0.01, veh);
  }
  EXPECT_NEAR(st.x, 10.0, 1e-9);
  EXPECT_NEAR(st.y, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(st.side_slip, 0.0);
  EXPECT_DOUBLE_EQ(st.yaw_rate, 0.0);
  EXPECT_NEAR(st.t, 1.0, 1e-12);
}

TEST(StepKinetic, ActuatorHasUnitDcGain)
{
  const VehicleParams veh;
  KineticState st;
  st.v = 5.0;
  for (int i = 0; i < 300; ++i) {
    st = step_kinetic(st, 0.1, 0.01, veh);
    ASSERT_LE(st.delta_veh, 0.1 + 1e-12);
  }
  EXPECT_NEAR(st.delta_veh, 0.1, 1e-9);
  const auto rates = st.steering_rates(veh.actuator_cutoff_hz);
  EXPECT_NEAR(rates[0], 0.0, 1e-7);
  EXPECT_NEAR(rates[1], 0.0, 1e-5);
}

TEST(StepKinetic, SteeringRatesMatchFiniteDifferences)
{
  const VehicleParams veh;
  KineticState st;
  st.v = 5.0;
  for (int i = 0; i < 20; ++i) {
    st = step_kinetic(st, 0.2, 0.01, veh);
  }
  const double h = 1e-4;
  const KineticState a = step_kinetic(st, 0.2, h, veh);
  const KineticState b = step_kinetic(a, 0.2, h, veh);
  const auto r0 = st.steering_rates(veh.actuator_cutoff_hz);
  EXPECT_NEAR((a.delta_veh - st.delta_veh) / h, r0[0] + 0.5 * h * r0[1], 1e-5);
  EXPECT_NEAR((b.delta_veh - 2 * a.delta_veh + st.delta_veh) / (h * h), r0[1], 1e-2);
}

TEST(StepKinetic, LowSpeedCorneringApproachesKinematic)
{
  const VehicleParams veh;
  const double delta = 0.2;
  double prev_gap = 1e9;
  for (double v : {4.0, 2.0, 1.0}) {
    KineticState st;
    st.v = v;
    st.actuator = {delta, delta, delta};
    st.delta_veh = delta;
    for (int i = 0; i < 400; ++i) {
      st = step_kinetic(st, delta, 0.01, veh);
    }
    const double gap = std::abs(st.yaw_rate * veh.lambda_veh / v - std::tan(delta));
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 2e-3);
}

TEST(StepKinetic, FollowsSpeedProfile)
{
  const VehicleParams veh;
  KineticState st;
  st.v = 5.0;
  const SpeedProfile prof = [](double t) {return 5.0 + 2.0 * t;};
  for (int i = 0; i < 100; ++i) {
    st = step_kinetic(st, 0.0, 0.01, veh, prof);
  }
  EXPECT_NEAR(st.v, 7.0, 1e-12);
  EXPECT_NEAR(st.x, 6.0, 1e-9);
  EXPECT_NEAR(st.s, 6.0, 1e-9);
}

TEST(Observe, ZeroNoiseOnPath)
{
  const RefPath path = build_arc_sequence({{0.0, 50.0}});
  Observer obs(DisturbanceSpec{});
  const WheelError e = observe(KinematicState{10.0, 0.0, 0.0, 0.0, 0.0}, path, obs);
  EXPECT_DOUBLE_EQ(e.e, 0.0);
  EXPECT_DOUBLE_EQ(e.psi, 0.0);
}

TEST(Observe, DeterministicForFixedSeed)
{
  const RefPath path = build_arc_sequence({{0.0, 50.0}});
  DisturbanceSpec d;
  d.noise_std_e = 0.1;
  d.noise_std_psi = 0.02;
  d.seed = 42;
  Observer a(d), b(d);
  for (int i = 0; i < 100; ++i) {
    const WheelError x = observe({5.0, 0.3, 0.1, 0.0, 0.0}, path, a);
    const WheelError y = observe({5.0, 0.3, 0.1, 0.0, 0.0}, path, b);
    ASSERT_EQ(x.e, y.e);
    ASSERT_EQ(x.psi, y.psi);
  }
}

TEST(Observe, SampleStandardDeviation)
{
  const RefPath path = build_arc_sequence({{0.0, 50.0}});
  DisturbanceSpec d;
  d.noise_std_e = 0.01;
  d.noise_std_psi = 0.01;
  d.seed = 7;
  Observer obs(d);
  const int n = 100000;
  double se = 0, se2 = 0, sp = 0, sp2 = 0;
  for (int i = 0; i < n; ++i) {
    const WheelError w = observe({5.0, 0.0, 0.0, 0.0, 0.0}, path, obs);
    se += w.e;
    se2 += w.e * w.e;
    sp += w.psi;
    sp2 += w.psi * w.psi;
  }
  const double std_e = std::sqrt(se2 / n - (se / n) * (se / n));
  const double std_p = std::sqrt(sp2 / n - (sp / n) * (sp / n));
  EXPECT_NEAR(std_e, 0.01, 0.03 * 0.01);
  EXPECT_NEAR(std_p, 0.01, 0.03 * 0.01);
}

TEST(Observe, NoisyPoseIsConsistentWithError)
{
  const RefPath path = build_arc_sequence({{0.05, 30.0}});
  DisturbanceSpec d;
  d.noise_std_e = 0.2;
  d.noise_std_psi = 0.05;
  Observer obs(d);
  const Pose2 rear{path.reconstruct(12.0, 0.7), path.heading_at(12.0) + 0.1};
  for (int i = 0; i < 50; ++i) {
    const Observer::Sample smp = obs.sample(rear, path);
    const PathProjection p = path.project(smp.pose.position);
    ASSERT_NEAR(p.e, smp.error.e, 1e-9);
    ASSERT_NEAR(wrap_angle(smp.pose.heading - p.theta), smp.error.psi, 1e-9);
  }
}

TEST(Observe, CorridorExceeded)
{
  const RefPath path = build_arc_sequence({{0.0, 50.0}}, {}, 5.0);
  Observer obs(DisturbanceSpec{});
  EXPECT_THROW(observe({10.0, 8.0, 0.0, 0.0, 0.0}, path, obs), CorridorExceeded);
}

TEST(Trace, CsvHeaderAndRows)
{
  std::ostringstream os;
  write_trace_csv(os, {TraceRow{}, TraceRow{}});
  const std::string out = os.str();
  EXPECT_EQ(out.substr(0, out.find('\n')),
    "t,s,x,y,psi,v,delta_cmd,delta_veh,ddelta_dt,dddelta_dt,e,e_f,e_l,beta");
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 3);
}
