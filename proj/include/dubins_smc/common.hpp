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

#ifndef DUBINS_SMC__COMMON_HPP_
#define DUBINS_SMC__COMMON_HPP_

#include <cmath>
#include <numbers>

namespace dubins_smc
{

inline constexpr double kPi = std::numbers::pi;

struct Vec2
{
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+(const Vec2 & o) const {return {x + o.x, y + o.y};}
  constexpr Vec2 operator-(const Vec2 & o) const {return {x - o.x, y - o.y};}
  constexpr Vec2 operator*(double k) const {return {x * k, y * k};}
  constexpr double dot(const Vec2 & o) const {return x * o.x + y * o.y;}
  // z-component of the 3D cross product
  constexpr double cross(const Vec2 & o) const {return x * o.y - y * o.x;}
  double norm() const {return std::hypot(x, y);}
};

inline Vec2 heading_vector(double heading) {return {std::cos(heading), std::sin(heading)};}

/// Global planar pose of a wheel or vehicle reference point.
struct Pose2
{
  Vec2 position;
  double heading{0.0};
};

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a)
{
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  }
  return a;
}

/// sign() with an explicit value at zero.
inline double sign_of(double v, double sign_zero = 0.0)
{
  if (v > 0.0) {
    return 1.0;
  }
  if (v < 0.0) {
    return -1.0;
  }
  return sign_zero;
}

}  // namespace dubins_smc

#endif  // DUBINS_SMC__COMMON_HPP_
