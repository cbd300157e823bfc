#pragma once

#include <string>
#include <vector>

#include "throwkit/ballistic_types.hpp"
#include "throwkit/brt_classifier.hpp"
#include "throwkit/throw_planner.hpp"
#include "throwkit/trajectory_gen.hpp"
#include "throwkit/velocity_hedgehog.hpp"

namespace throwkit {

/// Release state after executing a trajectory under perfect tracking with
/// instant release at its end. Throws TerminalMismatch when the trajectory
/// terminal state disagrees with the configuration beyond 1e-6.
ReleaseState execute_throw(const JointTrajectory& traj, const ThrowConfiguration& cfg,
                           const ArmModel& model);

/// 3-D ballistic flight to the box-opening plane: closed-form stepping with
/// sub-step refinement of the downward plane crossing. Success iff the ball
/// center crosses inside the opening footprint shrunk by the ball radius.
/// Throws NoCrossing when the ball never descends through the plane in 10 s.
SimResult simulate_flight(const ReleaseState& release, const Vec3& box_center,
                          const SimConfig& sim);

/// Owning bundle of the artifacts the online pipeline reads.
struct PlannerContext {
  ArmModel model;
  VelocityHedgehog hedgehog;
  std::vector<FlyingState> brt_positives;
  MlpClassifier classifier;
  KinematicBounds bounds;

  TrajectoryPlanner trajectory_planner() const;
};

/// Home configuration used as the benchmark initial state.
BoundaryState default_home();

struct SuccessRow {
  double height = 0.0;  // target height relative to the arm base plane [m]
  long planned = 0;
  long succeeded = 0;
};

struct SuccessReport {
  std::vector<SuccessRow> rows;
  long total_planned = 0;
  long total_succeeded = 0;
  double rate = 0.0;
};

/// Plans for each height, runs every configuration through trajectory
/// generation and flight simulation, and counts box entries.
SuccessReport run_success_benchmark(const PlannerContext& ctx, const std::vector<double>& heights,
                                    std::size_t per_height_limit, const SimConfig& sim);

struct LatencyReport {
  long queries = 0;
  long solutions = 0;
  double initial_guess_us = 0.0;  // medians across queries, per solution
  double full_config_us = 0.0;
  double trajectory_us = 0.0;
  double overall_us = 0.0;
};

/// Wall-clock per-solution stage timings, medians across n_queries queries.
/// Runs single-threaded.
LatencyReport run_latency_benchmark(const PlannerContext& ctx, int n_queries);

/// Disturbance scenario: an instantaneous (q, qd) jump applied at a given
/// time while moving toward the planned throw.
struct DisturbanceScenario {
  double time = 0.0;
  JointVector joint_deltas = JointVector::Zero();
  JointVector velocity_deltas = JointVector::Zero();
  int n_sample = 100;
  ThrowQuery query;
};

DisturbanceScenario load_scenario(const std::string& path);
void save_scenario(const DisturbanceScenario& scenario, const std::string& path);

struct AdaptiveReport {
  AdaptiveComparison comparison;
  SimResult recalc_flight;
  SimResult replan_flight;
  double original_duration = 0.0;
  double disturbance_time = 0.0;
};

/// Full adaptive-throwing experiment: plan, pick the time-optimal throw,
/// disturb mid-trajectory, run both strategies, and simulate both throws.
AdaptiveReport run_adaptive_scenario(const PlannerContext& ctx,
                                     const DisturbanceScenario& scenario, const SimConfig& sim);

}  // namespace throwkit
