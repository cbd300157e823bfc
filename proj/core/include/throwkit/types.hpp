#pragma once

#include <Eigen/Dense>

namespace throwkit {

inline constexpr int kJointCount = 7;

/// Joint-space vector: positions [rad] or velocities [rad/s] by context.
using JointVector = Eigen::Matrix<double, kJointCount, 1>;

/// Cartesian point or velocity, meters / meters per second. X,Y horizontal, Z up.
using Vec3 = Eigen::Vector3d;

using Matrix3x7 = Eigen::Matrix<double, 3, kJointCount>;
using Matrix7x3 = Eigen::Matrix<double, kJointCount, 3>;
using Matrix2x7 = Eigen::Matrix<double, 2, kJointCount>;

}  // namespace throwkit
