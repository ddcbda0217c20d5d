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

#ifndef DUBINS_SMC__REF_PATH_HPP_
#define DUBINS_SMC__REF_PATH_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dubins_smc/common.hpp"
#include "dubins_smc/errors.hpp"

namespace dubins_smc
{

/**
 * @brief One constant-curvature piece of a reference path.
 *
 * A line has curvature 0. For an arc the sign of the curvature encodes the
 * turn direction (positive = counter-clockwise / left turn), so the sweep
 * angle is curvature * length.
 */
struct Segment
{
  Vec2 start;
  double heading{0.0};    // heading at the start [rad]
  double curvature{0.0};  // [1/m]
  double length{0.0};     // [m]

  bool is_line() const {return curvature == 0.0;}
  double radius() const {return 1.0 / std::abs(curvature);}
  double sweep() const {return curvature * length;}
  Vec2 center() const
  {
    const double r = 1.0 / curvature;
    return start + Vec2{-std::sin(heading), std::cos(heading)} * r;
  }

  double heading_at(double t) const {return heading + curvature * t;}

  Vec2 point_at(double t) const
  {
    if (is_line()) {
      return start + heading_vector(heading) * t;
    }
    const double r = 1.0 / curvature;
    const double h1 = heading_at(t);
    return start + Vec2{std::sin(h1) - std::sin(heading), -std::cos(h1) + std::cos(heading)} * r;
  }
};

/// Closest-point projection result. e > 0 means left of the travel direction.
struct PathProjection
{
  double s_star{0.0};
  double e{0.0};
  double theta{0.0};
  double kappa_ref{0.0};
};

/// Directed, G1-continuous line/arc reference path parameterized by arc length.
class RefPath
{
public:
  static constexpr double kJoinTolerance = 1e-9;
  static constexpr double kDefaultCorridor = 50.0;

  RefPath() = default;

  explicit RefPath(std::vector<Segment> segments, double corridor = kDefaultCorridor)
  : segments_(std::move(segments)), corridor_(corridor)
  {
    if (segments_.empty()) {
      throw InvalidSpec("reference path needs at least one segment");
    }
    if (!(corridor_ > 0.0)) {
      throw InvalidSpec("corridor must be positive");
    }
    starts_.reserve(segments_.size());
    double s = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const Segment & seg = segments_[i];
      if (!(seg.length > 0.0) || !std::isfinite(seg.length)) {
        throw InvalidSpec("segment length must be positive");
      }
      if (!std::isfinite(seg.curvature)) {
        throw InvalidSpec("segment curvature must be finite");
      }
      if (i > 0) {
        const Segment & prev = segments_[i - 1];
        const Vec2 end = prev.point_at(prev.length);
        if ((end - seg.start).norm() > kJoinTolerance ||
          std::abs(wrap_angle(prev.heading_at(prev.length) - seg.heading)) > kJoinTolerance)
        {
          throw InvalidSpec("segments are not G1-continuous at joint " + std::to_string(i));
        }
      }
      starts_.push_back(s);
      s += seg.length;
    }
    total_length_ = s;
  }

  const std::vector<Segment> & segments() const {return segments_;}
  double total_length() const {return total_length_;}
  double corridor() const {return corridor_;}
  void set_corridor(double corridor) {corridor_ = corridor;}

  /// Point on the path at arc length s; s outside [0, L] follows the tangent extensions.
  Vec2 point_at(double s) const
  {
    if (s < 0.0) {
      const Segment & first = segments_.front();
      return first.start + heading_vector(first.heading) * s;
    }
    if (s > total_length_) {
      const Segment & last = segments_.back();
      const double h = last.heading_at(last.length);
      return last.point_at(last.length) + heading_vector(h) * (s - total_length_);
    }
    const std::size_t i = index_at(s);
    return segments_[i].point_at(s - starts_[i]);
  }

  double heading_at(double s) const
  {
    if (s <= 0.0) {
      return segments_.front().heading;
    }
    if (s >= total_length_) {
      const Segment & last = segments_.back();
      return last.heading_at(last.length);
    }
    const std::size_t i = index_at(s);
    return segments_[i].heading_at(s - starts_[i]);
  }

  double curvature_at(double s) const
  {
    if (s < 0.0 || s > total_length_) {
      return 0.0;
    }
    return segments_[index_at(s)].curvature;
  }

  /// Rebuilds the point at signed offset e (left positive) from the path point at s.
  Vec2 reconstruct(double s, double e) const
  {
    const double h = heading_at(s);
    return point_at(s) + Vec2{-std::sin(h), std::cos(h)} * e;
  }

  /**
   * @brief Signed closest-point projection.
   *
   * Searches every segment plus the two tangent extensions beyond the ends
   * and returns the global minimizer of the distance. Ties are resolved to
   * the smallest arc length.
   */
  PathProjection project(const Vec2 & p) const
  {
    PathProjection best;
    double best_dist = std::numeric_limits<double>::infinity();
    auto consider = [&](double dist, const PathProjection & cand) {
        // relative tie tolerance; the candidates are visited in increasing s
        if (!std::isfinite(best_dist) || dist < best_dist - 1e-12 * std::max(1.0, best_dist)) {
          best_dist = dist;
          best = cand;
        }
      };

    {
      // backward extension of the first segment: ray s in (-inf, 0]
      const Segment & first = segments_.front();
      const Vec2 d = heading_vector(first.heading);
      const double t = std::min(0.0, (p - first.start).dot(d));
      if (t < 0.0) {
        const Vec2 foot = first.start + d * t;
        consider((p - foot).norm(), {t, d.cross(p - foot), first.heading, 0.0});
      }
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      double dist = 0.0;
      const PathProjection cand = project_segment(i, p, dist);
      consider(dist, cand);
    }
    {
      const Segment & last = segments_.back();
      const double h = last.heading_at(last.length);
      const Vec2 end = last.point_at(last.length);
      const Vec2 d = heading_vector(h);
      const double t = std::max(0.0, (p - end).dot(d));
      if (t > 0.0) {
        const Vec2 foot = end + d * t;
        consider((p - foot).norm(), {total_length_ + t, d.cross(p - foot), h, 0.0});
      }
    }
    if (best_dist > corridor_) {
      throw CorridorExceeded(
              "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") is " +
              std::to_string(best_dist) + " m from the path (corridor " +
              std::to_string(corridor_) + " m)");
    }
    return best;
  }

private:
  std::size_t index_at(double s) const
  {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), s);
    const std::size_t idx = static_cast<std::size_t>(std::distance(starts_.begin(), it));
    return idx == 0 ? 0 : idx - 1;
  }

  PathProjection project_segment(std::size_t i, const Vec2 & p, double & dist) const
  {
    const Segment & seg = segments_[i];
    double t = 0.0;
    if (seg.is_line()) {
      t = std::clamp((p - seg.start).dot(heading_vector(seg.heading)), 0.0, seg.length);
    } else {
      const Vec2 c = seg.center();
      const Vec2 rel = p - c;
      if (rel.norm() > 0.0) {
        const Vec2 rel0 = seg.start - c;
        const double turn = seg.curvature > 0.0 ? 1.0 : -1.0;
        double progress = turn * (std::atan2(rel.y, rel.x) - std::atan2(rel0.y, rel0.x));
        progress = std::fmod(progress, 2.0 * kPi);
        if (progress < 0.0) {
          progress += 2.0 * kPi;
        }
        t = progress * seg.radius();
        if (t > seg.length) {
          // outside the arc's angular range: nearer of the two endpoints
          const double d_end = (p - seg.point_at(seg.length)).norm();
          const double d_start = (p - seg.start).norm();
          t = d_start <= d_end ? 0.0 : seg.length;
        }
      }
    }
    const Vec2 foot = seg.point_at(t);
    const double h = seg.heading_at(t);
    const Vec2 diff = p - foot;
    dist = diff.norm();
    const double side = heading_vector(h).cross(diff);
    double e = 0.0;
    if (dist > 0.0) {
      e = side >= 0.0 ? dist : -dist;
    }
    return {starts_[i] + t, e, h, seg.curvature};
  }

  std::vector<Segment> segments_;
  std::vector<double> starts_;
  double total_length_{0.0};
  double corridor_{kDefaultCorridor};
};

/// (curvature, length) row of a path spec; curvature 0 encodes a line.
struct ArcSpec
{
  double curvature{0.0};
  double length{0.0};
};

/// Chains constant-curvature pieces G1-continuously from a start pose.
inline RefPath build_arc_sequence(
  const std::vector<ArcSpec> & spec, const Pose2 & start = {},
  double corridor = RefPath::kDefaultCorridor)
{
  if (spec.empty()) {
    throw InvalidSpec("arc sequence is empty");
  }
  std::vector<Segment> segs;
  segs.reserve(spec.size());
  Vec2 p = start.position;
  double h = start.heading;
  for (const ArcSpec & a : spec) {
    if (!(a.length > 0.0)) {
      throw InvalidSpec("arc sequence lengths must be positive");
    }
    Segment seg{p, h, a.curvature, a.length};
    p = seg.point_at(a.length);
    h = seg.heading_at(a.length);
    segs.push_back(seg);
  }
  return RefPath(std::move(segs), corridor);
}

/// Section lengths of a double lane change, measured along the entry direction.
struct LaneChangeConfig
{
  double lane_offset{3.5};
  // entry straight, transition, offset lane, return transition, exit straight
  std::vector<double> section_lengths{15.0, 30.0, 25.0, 25.0, 15.0};
};

/**
 * @brief Double lane change built from lines and S-shaped arc pairs.
 *
 * Each transition of longitudinal extent X and lateral offset h consists of two
 * opposite arcs with turn angle phi, tan(phi / 2) = h / X and radius X / (2 sin phi).
 * A zero offset degenerates to straight lines of the same total length.
 */
inline RefPath build_lane_change(
  double lane_offset, const std::vector<double> & section_lengths,
  const Pose2 & start = {})
{
  if (section_lengths.size() != 5) {
    throw InvalidSpec("lane change needs exactly five section lengths");
  }
  if (lane_offset < 0.0 || !std::isfinite(lane_offset)) {
    throw InvalidSpec("lane offset must be non-negative");
  }
  for (double l : section_lengths) {
    if (!(l > 0.0)) {
      throw InvalidSpec("lane change section lengths must be positive");
    }
  }
  std::vector<ArcSpec> spec;
  auto transition = [&](double x, double dir) {
      if (lane_offset == 0.0) {
        spec.push_back({0.0, x});
        return;
      }
      const double phi = 2.0 * std::atan(lane_offset / x);
      const double radius = x / (2.0 * std::sin(phi));
      spec.push_back({dir / radius, radius * phi});
      spec.push_back({-dir / radius, radius * phi});
    };
  spec.push_back({0.0, section_lengths[0]});
  transition(section_lengths[1], 1.0);
  spec.push_back({0.0, section_lengths[2]});
  transition(section_lengths[3], -1.0);
  spec.push_back({0.0, section_lengths[4]});
  return build_arc_sequence(spec, start);
}

inline RefPath build_lane_change(const LaneChangeConfig & cfg, const Pose2 & start = {})
{
  return build_lane_change(cfg.lane_offset, cfg.section_lengths, start);
}

}  // namespace dubins_smc

#endif  // DUBINS_SMC__REF_PATH_HPP_
