/*
 * Copyright 2026 The Semsteer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "semsteer/vehicle.h"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "semsteer/error.h"

namespace semsteer {
namespace {

void RequireInputs(std::span<const double> steering,
                   std::span<const double> velocities, double dt) {
  if (steering.size() != velocities.size()) {
    throw DimensionError("steering (" + std::to_string(steering.size()) +
                         ") and velocity (" + std::to_string(velocities.size()) +
                         ") sequences differ in length");
  }
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
}

}  // namespace

void WheelbaseConfig::Validate() const {
  if (!(wheelbase > 0.0)) throw ConfigError("wheelbase must be > 0");
}

double SteeringFromYaw(double velocity, double yaw_rate, double wheelbase,
                       double min_speed) {
  if (!(wheelbase > 0.0)) throw ConfigError("wheelbase must be > 0");
  if (!(std::abs(velocity) >= min_speed)) {
    throw LowSpeedError("speed " + std::to_string(velocity) +
                        " m/s is below the steering cutoff");
  }
  return std::atan(wheelbase * yaw_rate / velocity);
}

double YawFromSteering(double steering, double velocity, double wheelbase) {
  if (!(wheelbase > 0.0)) throw ConfigError("wheelbase must be > 0");
  if (!(std::abs(steering) < std::numbers::pi / 2)) {
    throw ConfigError("steering angle must satisfy |theta| < pi/2");
  }
  return velocity * std::tan(steering) / wheelbase;
}

Trajectory IntegratePathLiteral(std::span<const double> steering,
                              std::span<const double> velocities, double dt,
                              const EgoState& start) {
  RequireInputs(steering, velocities, dt);
  Trajectory out;
  out.reserve(steering.size() + 1);
  out.push_back(start);
  for (size_t i = 0; i < steering.size(); ++i) {
    const EgoState& prev = out.back();
    const double step = velocities[i] * dt;
    EgoState next;
    next.x = prev.x + step * std::cos(steering[i]);
    next.y = prev.y + step * std::sin(steering[i]);
    next.heading = steering[i];
    next.velocity = velocities[i];
    next.t = start.t + static_cast<double>(i + 1) * dt;
    out.push_back(next);
  }
  return out;
}

Trajectory IntegratePathKinematic(std::span<const double> steering,
                                  std::span<const double> velocities, double dt,
                                  const EgoState& start, double wheelbase) {
  RequireInputs(steering, velocities, dt);
  Trajectory out;
  out.reserve(steering.size() + 1);
  out.push_back(start);
  for (size_t i = 0; i < steering.size(); ++i) {
    const EgoState& prev = out.back();
    const double yaw_rate = YawFromSteering(steering[i], velocities[i], wheelbase);
    const double step = velocities[i] * dt;
    EgoState next;
    next.heading = prev.heading + yaw_rate * dt;
    next.x = prev.x + step * std::cos(next.heading);
    next.y = prev.y + step * std::sin(next.heading);
    next.velocity = velocities[i];
    next.t = start.t + static_cast<double>(i + 1) * dt;
    out.push_back(next);
  }
  return out;
}

Trajectory IntegratePath(PathMode mode, std::span<const double> steering,
                         std::span<const double> velocities, double dt,
                         const EgoState& start, double wheelbase) {
  return mode == PathMode::kLiteral
             ? IntegratePathLiteral(steering, velocities, dt, start)
             : IntegratePathKinematic(steering, velocities, dt, start,
                                      wheelbase);
}

Trajectory ResetAtWaypoints(const Trajectory& predicted,
                            const Trajectory& truth,
                            std::span<const size_t> waypoints, PathMode mode) {
  for (size_t i = 0; i < waypoints.size(); ++i) {
    if (waypoints[i] >= predicted.size() || waypoints[i] >= truth.size()) {
      throw ConfigError("waypoint index " + std::to_string(waypoints[i]) +
                        " is out of range");
    }
    if (i > 0 && waypoints[i] <= waypoints[i - 1]) {
      throw ConfigError("waypoint indices must be strictly ascending");
    }
  }
  Trajectory out = predicted;
  if (out.empty()) return out;
  size_t next_waypoint = 0;
  for (size_t i = 0; i < out.size(); ++i) {
    if (i > 0) {
      // Replay predicted step i-1 -> i from the (possibly corrected) state.
      const EgoState& a = predicted[i - 1];
      const EgoState& b = predicted[i];
      const EgoState& prev = out[i - 1];
      EgoState& cur = out[i];
      const double dx = b.x - a.x;
      const double dy = b.y - a.y;
      if (mode == PathMode::kLiteral) {
        cur.x = prev.x + dx;
        cur.y = prev.y + dy;
        cur.heading = b.heading;
      } else {
        const double rot = prev.heading - a.heading;
        const double c = std::cos(rot), s = std::sin(rot);
        cur.x = prev.x + c * dx - s * dy;
        cur.y = prev.y + s * dx + c * dy;
        cur.heading = prev.heading + (b.heading - a.heading);
      }
    }
    if (next_waypoint < waypoints.size() && waypoints[next_waypoint] == i) {
      out[i].x = truth[i].x;
      out[i].y = truth[i].y;
      out[i].heading = truth[i].heading;
      ++next_waypoint;
    }
  }
  return out;
}

void WriteTrajectoryCsv(const Trajectory& traj, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "t,x,y,heading,velocity\n";
  for (const EgoState& s : traj) {
    out << s.t << ',' << s.x << ',' << s.y << ',' << s.heading << ','
        << s.velocity << '\n';
  }
  out.precision(old_precision);
}

}  // namespace semsteer
