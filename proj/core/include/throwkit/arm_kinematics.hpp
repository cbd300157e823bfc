#pragma once

#include <array>
#include <string>

#include "throwkit/errors.hpp"
#include "throwkit/types.hpp"

namespace throwkit {

/// One Denavit-Hartenberg row. Row i contributes the transform
///   RotZ(q_i + theta_offset) * TransZ(d) * TransX(a) * RotX(alpha)
/// so a joint's (a, alpha) span the link between joint i and joint i+1.
struct DhRow {
  double a = 0.0;             // link length [m]
  double d = 0.0;             // link offset [m]
  double alpha = 0.0;         // link twist [rad]
  double theta_offset = 0.0;  // joint angle offset [rad]
};

struct JointLimits {
  JointVector q_min;
  JointVector q_max;
  JointVector qd_min;
  JointVector qd_max;
};

/// Kinematic model of a 7-DOF serial arm. Immutable after load.
struct ArmModel {
  std::array<DhRow, kJointCount> dh{};
  double base_height = 0.0;  // arm base plane above the ground [m]
  JointLimits limits{};

  /// Default parameter set: a published 7-DOF arm with velocity limits
  /// in the 2.1-2.6 rad/s range.
  static ArmModel panda();
};

/// Arm parameter file: JSON with `dh` (7 rows of [a, d, alpha, theta_offset]),
/// `base_height`, `q_min`, `q_max`, `qd_min`, `qd_max`. SI units, radians.
ArmModel load_arm_model(const std::string& path);
void save_arm_model(const ArmModel& model, const std::string& path);

/// Full end-effector pose in the arm base frame.
Eigen::Matrix4d forward_transform(const ArmModel& model, const JointVector& q);

/// End-effector position in the arm base frame (X,Y horizontal, Z up).
Vec3 forward_position(const ArmModel& model, const JointVector& q);

/// Positional Jacobian: maps joint velocity to end-effector linear velocity.
Matrix3x7 jacobian_position(const ArmModel& model, const JointVector& q);

/// Position and Jacobian from one chain traversal.
struct PointKinematics {
  Vec3 position;
  Matrix3x7 jacobian;
};
PointKinematics point_kinematics(const ArmModel& model, const JointVector& q);

/// Moore-Penrose pseudoinverse via SVD; singular values below `cutoff`
/// are treated as zero.
Matrix7x3 pseudoinverse(const Matrix3x7& jacobian, double cutoff = 1e-4);

/// XY rows of the positional Jacobian.
Matrix2x7 xy_jacobian(const ArmModel& model, const JointVector& q);

/// Top singular value of J_xy with its left singular direction.
/// `valid` is false for a numerically zero matrix (direction undefined).
struct TopSingular {
  double value = 0.0;
  Eigen::Vector2d direction = Eigen::Vector2d::Zero();
  bool valid = false;
};
TopSingular max_singular(const Matrix2x7& jacobian_xy);

/// Planar angle of the end-effector's horizontal offset from the base,
/// in (-pi, pi]. Throws DegenerateYaw when the end effector sits on the
/// base vertical axis (|AE_xy| <= 1e-9).
double arm_yaw(const ArmModel& model, const JointVector& q);

/// Same, from an already-computed end-effector position.
double yaw_of(const Vec3& position);

}  // namespace throwkit
