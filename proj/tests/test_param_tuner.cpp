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
#include <sstream>
#include <vector>

#include "dubins_smc/param_tuner.hpp"

using namespace dubins_smc;  // NOLINT

namespace
{

// RK4 on the two-joint trailer ODE; returns delta' along the trajectory.
double rate_after(std::vector<double> x, const std::vector<double> & lambdas, double kappa, double ds)
{
  auto add = [](std::vector<double> a, const std::vector<double> & b, double k) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] += k * b[i];
      }
      return a;
    };
  const auto k1 = fictive_rates(x, lambdas, kappa);
  const auto k2 = fictive_rates(add(x, k1, ds / 2), lambdas, kappa);
  const auto k3 = fictive_rates(add(x, k2, ds / 2), lambdas, kappa);
  const auto k4 = fictive_rates(add(x, k3, ds), lambdas, kappa);
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] += ds / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
  }
  return fictive_rates(x, lambdas, kappa)[0];
}

}  // namespace

TEST(KappaLMax, Examples)
{
  EXPECT_DOUBLE_EQ(kappa_l_max(kPi / 2.0, 1.0, 0.0, FormulaVariant::kDerived), 1.0);
  EXPECT_DOUBLE_EQ(kappa_l_max(kPi / 2.0, 1.0, 0.0, FormulaVariant::kAsPrinted), 1.0);
  EXPECT_DOUBLE_EQ(kappa_l_max(kPi / 2.0, 2.0, 0.0, FormulaVariant::kAsPrinted), 0.25);
  EXPECT_DOUBLE_EQ(kappa_l_max(kPi / 2.0, 2.0, 0.0, FormulaVariant::kDerived), 0.5);
  EXPECT_NEAR(kappa_l_max(1e-12, 2.0, 1.0), 0.0, 1e-11);
  EXPECT_THROW(kappa_l_max(0.5, 0.0, 1.0), InvalidSpec);
}

TEST(KappaLMax, DerivedBoundPutsFrontSetOnSteeringLimit)
{
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> d(0.05, 1.4), lam(0.3, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double delta_max = d(rng), lambda = lam(rng), lambda_l = lam(rng);
    const double k = kappa_l_max(delta_max, lambda, lambda_l);
    // chained invariant sets at the bound
    const double bound_l = invariant_bounds(k, lambda_l);
    const double kappa_f = std::tan(bound_l) / lambda_l;
    ASSERT_NEAR(invariant_bounds(kappa_f, lambda), delta_max, 1e-9);
  }
}

TEST(KappaLMax, RealAxleBoundIsIndependentOfLeadLength)
{
  const double lambda_veh = 2.7, delta_max = 0.6;
  for (double lambda_l : {0.1, 0.8, 1.5, 2.2, 2.65}) {
    const double lambda = lambda_from_cornering(lambda_veh, lambda_l);
    const double fict = fictive_from_vehicle(delta_max, lambda, lambda_veh);
    EXPECT_NEAR(kappa_l_max(fict, lambda, lambda_l), std::sin(delta_max) / lambda_veh, 1e-12);
  }
}

TEST(KRobMin, Examples)
{
  EXPECT_DOUBLE_EQ(k_rob_min(0.0, 0.25), 0.0);
  EXPECT_NEAR(k_rob_min(0.05, 0.25), 0.2, 1e-15);
  EXPECT_THROW(k_rob_min(0.25, 0.25), InvalidSpec);
  EXPECT_THROW(k_rob_min(0.1, 0.0), InvalidSpec);
}

TEST(LambdaFromCornering, Examples)
{
  EXPECT_DOUBLE_EQ(lambda_from_cornering(2.5, 1.5), 2.0);
  EXPECT_DOUBLE_EQ(lambda_from_cornering(2.7, 0.0), 2.7);
  EXPECT_THROW(lambda_from_cornering(2.5, 2.5), InvalidSpec);
  EXPECT_THROW(lambda_from_cornering(2.5, -0.1), InvalidSpec);
}

TEST(VehicleSteering, DerivativesMatchFiniteDifferences)
{
  const double lambda = 2.2, lambda_veh = 2.7;
  const double d0 = 0.3, d1 = -0.4, d2 = 0.7;
  auto angle = [&](double s) {
      return vehicle_steering(d0 + d1 * s + 0.5 * d2 * s * s, 0, 0, lambda, lambda_veh).angle;
    };
  const VehicleSteering v = vehicle_steering(d0, d1, d2, lambda, lambda_veh);
  const double h = 1e-4;
  EXPECT_NEAR(v.angle, std::atan(lambda_veh / lambda * std::tan(d0)), 1e-15);
  EXPECT_NEAR((angle(h) - angle(-h)) / (2 * h), v.d1, 1e-8);
  EXPECT_NEAR((angle(h) - 2 * angle(0) + angle(-h)) / (h * h), v.d2, 1e-5);
  EXPECT_NEAR(fictive_from_vehicle(v.angle, lambda, lambda_veh), d0, 1e-15);
}

TEST(RateAccelMap, ZeroCurvatureHasNoActuation)
{
  const RateAccel m = rate_accel_map(0.0, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(m.max_rate, 0.0);
  EXPECT_DOUBLE_EQ(m.max_accel, 0.0);
}

TEST(RateAccelMap, RejectsInvalidInput)
{
  EXPECT_THROW(rate_accel_map(0.5, 3.0, 1.0), InvalidSpec);
  EXPECT_THROW(rate_accel_map(0.1, 1.0, 0.0), InvalidSpec);
  EXPECT_THROW(rate_accel_map(0.3, 1.0, 4.0), InvalidSpec);
  EXPECT_THROW(rate_accel_map(0.1, 1.0, 2.0, 1), InvalidSpec);
}

TEST(RateAccelMap, MaximaDominateRandomAdmissibleStates)
{
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::vector<std::array<double, 3>> cases{
    {0.2, 0.5, 2.0}, {0.1, 1.5, 2.2}, {0.3, 0.2, 1.0}, {0.05, 2.5, 1.0}};
  for (const auto & [kb, ll, lam] : cases) {
    for (double lambda_veh : {0.0, 2.7}) {
      const RateAccel m = rate_accel_map(kb, ll, lam, 40, lambda_veh);
      const double bound_l = invariant_bounds(kb, ll);
      const double bound = invariant_bounds(std::tan(bound_l) / ll, lam);
      for (int i = 0; i < 10000; ++i) {
        const double delta = bound * u(rng), delta_l = bound_l * u(rng);
        const double kappa = kb * (u(rng) < 0.0 ? -1.0 : 1.0);
        // state from the joint angles, delta'' from the chained ODE
        const double d1 = fictive_rates({delta, delta_l}, {lam, ll}, kappa)[0];
        const double h = 1e-5;
        const double d2 = (rate_after({delta, delta_l}, {lam, ll}, kappa, h) -
          rate_after({delta, delta_l}, {lam, ll}, kappa, -h)) / (2 * h);
        double r = d1, a = d2;
        if (lambda_veh > 0.0) {
          const VehicleSteering v = vehicle_steering(delta, d1, d2, lam, lambda_veh);
          r = v.d1;
          a = v.d2;
        }
        ASSERT_GE(m.max_rate + 1e-9, std::abs(r));
        ASSERT_GE(m.max_accel + 1e-6, std::abs(a));
      }
    }
  }
}

TEST(RateAccelMap, RateShrinksTowardZeroLeadLength)
{
  const double kb = 0.15, lambda = 2.0;
  const double at_zero = rate_accel_map(kb, 0.0, lambda).max_rate;
  double prev = rate_accel_map(kb, 1.6, lambda).max_rate;
  for (double ll : {0.8, 0.4, 0.2, 0.1, 0.05, 0.01}) {
    const double r = rate_accel_map(kb, ll, lambda).max_rate;
    EXPECT_LE(r, prev + 1e-12) << "lambda_l = " << ll;
    prev = r;
  }
  EXPECT_NEAR(prev, at_zero, 1e-2 * at_zero);
  EXPECT_GE(prev, at_zero - 1e-12);
}

TEST(RateAccelMap, DeterministicAndResolutionStable)
{
  const RateAccel a = rate_accel_map(0.18, 1.1, 2.4, 20, 2.7);
  const RateAccel b = rate_accel_map(0.18, 1.1, 2.4, 20, 2.7);
  EXPECT_EQ(a.max_rate, b.max_rate);
  EXPECT_EQ(a.max_accel, b.max_accel);
  const RateAccel c = rate_accel_map(0.18, 1.1, 2.4, 40, 2.7);
  EXPECT_NEAR(a.max_rate, c.max_rate, 1e-2 * c.max_rate);
  EXPECT_NEAR(a.max_accel, c.max_accel, 1e-2 * c.max_accel);
}

TEST(StaticMap, RateNonincreasingForDecreasingCurvature)
{
  const std::vector<double> ll{0.2, 1.0, 2.0};
  const std::vector<double> kb{0.2, 0.15, 0.1, 0.05, 0.01};
  const StaticMap m = build_static_map(ll, kb, 2.7, 24);
  ASSERT_EQ(m.values.size(), ll.size());
  for (const auto & row : m.values) {
    for (std::size_t k = 1; k < row.size(); ++k) {
      EXPECT_LE(row[k].max_rate, row[k - 1].max_rate);
      EXPECT_LE(row[k].max_accel, row[k - 1].max_accel);
    }
  }
}

TEST(Schedule, LowSpeedIsRegionOne)
{
  const ActuatorLimits lim;
  const ScheduleEntry e = schedule(0.2, lim, 2.7);
  EXPECT_EQ(e.region, 1);
  EXPECT_NEAR(e.kappa_l_bar, std::sin(lim.delta_max) / 2.7, 1e-12);
  EXPECT_NEAR(e.lambda_l, 0.05 * 2.7, 1e-12);
  EXPECT_NEAR(e.lambda, lambda_from_cornering(2.7, e.lambda_l), 1e-12);
}

TEST(Schedule, VelocityGridRespectsLimitsAndOrdering)
{
  const ActuatorLimits lim;
  const double lambda_veh = 2.7;
  std::vector<ScheduleEntry> rows;
  for (double v : {1.0, 2.5, 3.5, 4.5, 5.5, 6.5, 9.0, 14.0, 20.0}) {
    rows.push_back(schedule(v, lim, lambda_veh));
  }
  int prev_region = 0;
  double prev_ll = 0.0;
  std::vector<int> seen(5, 0);
  for (const ScheduleEntry & e : rows) {
    EXPECT_LE(e.max_rate, lim.ddelta_dt_max * (1.0 + 1e-6)) << "v = " << e.v;
    EXPECT_LE(e.max_accel, lim.dddelta_dt_max * (1.0 + 1e-6)) << "v = " << e.v;
    EXPECT_LE(e.kappa_l_bar * e.lambda_l, 1.0);
    EXPECT_LT(e.lambda_l, lambda_veh);
    EXPECT_GE(e.region, prev_region) << "v = " << e.v;
    if (e.region == 2 || e.region == 3) {
      EXPECT_GE(e.lambda_l, prev_ll - 1e-9) << "v = " << e.v;
    }
    prev_region = e.region;
    prev_ll = e.lambda_l;
    seen[static_cast<std::size_t>(e.region)] = 1;
  }
  EXPECT_EQ(seen[1] + seen[2] + seen[3] + seen[4], 4);
}

TEST(Schedule, InfeasibleLimits)
{
  ActuatorLimits lim;
  lim.dddelta_dt_max = 1e-9;
  EXPECT_THROW(schedule(10.0, lim, 2.7), Infeasible);
  EXPECT_THROW(schedule(0.0, ActuatorLimits{}, 2.7), InvalidSpec);
  EXPECT_THROW(schedule(1.0, ActuatorLimits{-1.0, 1.0, 1.0}, 2.7), InvalidSpec);
}

TEST(Schedule, TableHasHeader)
{
  std::ostringstream os;
  write_schedule_csv(os, {schedule(1.0, ActuatorLimits{}, 2.7)});
  const std::string out = os.str();
  EXPECT_EQ(out.substr(0, out.find('\n')),
    "v,kappa_l_bar,lambda_l,lambda,region,clamped,max_ddelta_dt,max_dddelta_dt");
  EXPECT_NE(out.find("\n1,"), std::string::npos);
}
