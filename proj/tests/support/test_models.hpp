#pragma once

#include <random>

#include "throwkit/arm_kinematics.hpp"

namespace throwkit::testing {

/// Planar two-link chain (a1 = a2 = 1, everything else zero) used by the
/// hand-computable kinematics cases. Generous limits.
inline ArmModel two_link_planar() {
  ArmModel m;
  m.dh = {};
  m.dh[0].a = 1.0;
  m.dh[1].a = 1.0;
  m.base_height = 0.0;
  m.limits.q_min.setConstant(-3.0);
  m.limits.q_max.setConstant(3.0);
  m.limits.qd_max.setConstant(2.0);
  m.limits.qd_min = -m.limits.qd_max;
  return m;
}

inline ArmModel zero_length_chain() {
  ArmModel m = two_link_planar();
  m.dh = {};
  return m;
}

inline ArmModel random_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> len(-0.5, 0.5);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  ArmModel m;
  for (auto& row : m.dh) {
    row.a = len(rng);
    row.d = len(rng);
    row.alpha = ang(rng);
    row.theta_offset = ang(rng);
  }
  m.base_height = 0.0;
  m.limits.q_min.setConstant(-M_PI);
  m.limits.q_max.setConstant(M_PI);
  m.limits.qd_max.setConstant(2.5);
  m.limits.qd_min = -m.limits.qd_max;
  return m;
}

inline JointVector random_joint_vector(std::mt19937_64& rng, const JointLimits& limits) {
  JointVector q;
  for (int i = 0; i < kJointCount; ++i) {
    std::uniform_real_distribution<double> dist(limits.q_min[i], limits.q_max[i]);
    q[i] = dist(rng);
  }
  return q;
}

}  // namespace throwkit::testing
