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

#ifndef SEMSTEER_VEHICLE_H_
#define SEMSTEER_VEHICLE_H_

#include <iosfwd>
#include <span>
#include <vector>

namespace semsteer {

inline constexpr double kDefaultWheelbase = 2.7;  // meters
// Below this speed the bicycle-model steering label is not computed.
inline constexpr double kMinSteeringSpeed = 0.5;  // m/s

struct WheelbaseConfig {
  double wheelbase = kDefaultWheelbase;
  void Validate() const;
};

// Steering angle from yaw rate under the bicycle model:
// theta = atan(L * yaw_rate / v). Throws LowSpeedError when |v| < v_min.
double SteeringFromYaw(double velocity, double yaw_rate,
                       double wheelbase = kDefaultWheelbase,
                       double min_speed = kMinSteeringSpeed);

// Inverse: yaw_rate = v * tan(theta) / L. Requires |theta| < pi/2.
double YawFromSteering(double steering, double velocity,
                       double wheelbase = kDefaultWheelbase);

struct EgoState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double velocity = 0.0;
  double t = 0.0;
};

using Trajectory = std::vector<EgoState>;

enum class PathMode { kLiteral, kKinematic };

// Literal dead-reckoning update: each step moves v_t * dt along the
// direction given by the steering angle itself. The recorded heading is the
// direction of the step taken into the state.
Trajectory IntegratePathLiteral(std::span<const double> steering,
                              std::span<const double> velocities, double dt,
                              const EgoState& start);

// Kinematic bicycle: heading += v dt tan(theta) / L, then the position
// advances v dt along the new heading.
Trajectory IntegratePathKinematic(std::span<const double> steering,
                                  std::span<const double> velocities, double dt,
                                  const EgoState& start,
                                  double wheelbase = kDefaultWheelbase);

Trajectory IntegratePath(PathMode mode, std::span<const double> steering,
                         std::span<const double> velocities, double dt,
                         const EgoState& start,
                         double wheelbase = kDefaultWheelbase);

// Snaps the prediction onto the ground truth at each waypoint index and
// continues from the corrected state. Each predicted step is replayed from
// the corrected state: literal-mode steps are world-frame displacements,
// kinematic steps are rigid motions in the body frame.
Trajectory ResetAtWaypoints(const Trajectory& predicted,
                            const Trajectory& truth,
                            std::span<const size_t> waypoints, PathMode mode);

// `t,x,y,heading,velocity` with a header row.
void WriteTrajectoryCsv(const Trajectory& traj, std::ostream& out);

}  // namespace semsteer

#endif  // SEMSTEER_VEHICLE_H_
