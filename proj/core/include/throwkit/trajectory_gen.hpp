#pragma once

#include <array>
#include <string>
#include <vector>

#include "throwkit/arm_kinematics.hpp"
#include "throwkit/types.hpp"

namespace throwkit {

/// Per-joint kinematic bounds for trajectory generation.
struct KinematicBounds {
  JointVector v_max;
  JointVector a_max;
  JointVector j_max;

  /// Velocity bounds from the arm limits; acceleration 15 rad/s^2 and jerk
  /// 7500 rad/s^3 per joint.
  static KinematicBounds defaults_for(const ArmModel& model);
};

/// Trajectory boundary state. Boundary accelerations are fixed to zero.
struct BoundaryState {
  JointVector q = JointVector::Zero();
  JointVector qd = JointVector::Zero();
};

struct ScalarBounds {
  double v_max = 1.0;
  double a_max = 1.0;
  double j_max = 1.0;
};

/// One constant-jerk segment.
struct JerkSegment {
  double duration = 0.0;
  double jerk = 0.0;
};

/// Piecewise-constant-jerk profile of a single joint. Position is cubic in
/// time inside each segment; acceleration is zero at both ends.
class JointProfile {
 public:
  JointProfile() = default;
  JointProfile(double q0, double v0, std::vector<JerkSegment> segments);

  double duration() const { return duration_; }
  const std::vector<JerkSegment>& segments() const { return segments_; }

  /// Exact piecewise-cubic evaluation; throws OutOfRange outside
  /// [0, duration] (with 1e-9 slack).
  void sample(double t, double& q, double& v, double& a) const;

  double end_position() const;
  double end_velocity() const;

 private:
  double q0_ = 0.0;
  double v0_ = 0.0;
  std::vector<JerkSegment> segments_;
  double duration_ = 0.0;
  double end_q_ = 0.0;
  double end_v_ = 0.0;
  // Cached state at each segment start.
  std::vector<double> seg_q_, seg_v_, seg_a_;
};

/// Minimum-duration profile from (q0, v0) to (q1, v1) with zero boundary
/// accelerations, within the 7-phase S-curve family. Throws
/// InfeasibleBoundary when a boundary velocity exceeds v_max.
JointProfile plan_single(double q0, double v0, double q1, double v1, const ScalarBounds& bounds);

/// Profile meeting the same boundary conditions with duration exactly
/// `target_duration` (>= minimal), found by slowing the peak velocity.
/// Throws SynchronizationFailure when no such profile brackets.
JointProfile stretch_single(double q0, double v0, double q1, double v1,
                            const ScalarBounds& bounds, double target_duration);

/// Time-synchronized multi-joint trajectory; all joints share one duration.
struct JointTrajectory {
  std::array<JointProfile, kJointCount> joints;
  double duration = 0.0;

  void sample(double t, JointVector& q, JointVector& qd, JointVector& qdd) const;
  BoundaryState start() const;
  BoundaryState end() const;
};

/// Common duration T* = max of per-joint minimal durations; faster joints
/// are re-solved for exactly T*.
JointTrajectory synchronize(const BoundaryState& b0, const BoundaryState& b1,
                            const KinematicBounds& bounds,
                            const std::array<JointProfile, kJointCount>& minimal);

/// plan_single per joint followed by synchronize.
JointTrajectory plan_trajectory(const BoundaryState& b0, const BoundaryState& b1,
                                const KinematicBounds& bounds);

/// CSV of (t, q1..q7, qd1..qd7) at the requested sample rate.
void export_trajectory_csv(const JointTrajectory& traj, double rate_hz,
                           const std::string& path);

}  // namespace throwkit
