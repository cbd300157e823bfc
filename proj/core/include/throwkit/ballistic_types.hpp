#pragma once

#include "throwkit/types.hpp"

namespace throwkit {

struct SimConfig {
  double dt = 0.01;             // flight stepping interval [s]
  double g = 9.81;              // [m/s^2]
  double ball_radius = 0.05;    // [m]
  double box_opening_x = 0.25;  // opening footprint [m]
  double box_opening_y = 0.25;
  double wall_height = 0.05;    // reported only; collisions are unmodeled
  bool perfect_tracking = true;
};

struct SimResult {
  bool success = false;
  Vec3 landing_point = Vec3::Zero();      // ball center at the opening plane
  Vec3 crossing_velocity = Vec3::Zero();  // velocity at the crossing
  double flight_time = 0.0;
  double miss_distance = 0.0;  // 0 when success
};

struct ReleaseState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

}  // namespace throwkit
