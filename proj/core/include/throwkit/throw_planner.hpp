#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "throwkit/arm_kinematics.hpp"
#include "throwkit/brt_classifier.hpp"
#include "throwkit/flight_dynamics.hpp"
#include "throwkit/trajectory_gen.hpp"
#include "throwkit/types.hpp"
#include "throwkit/velocity_hedgehog.hpp"

namespace throwkit {

/// Online throwing query. The incident direction is the horizontal
/// direction along which the throw approaches the target; when absent it
/// defaults to the direction from the current base position toward the
/// target. Solutions are equivariant under its rotation about the target
/// vertical axis.
struct ThrowQuery {
  Vec3 target = Vec3::Zero();         // box-opening center B, world frame [m]
  Vec3 base_position = Vec3::Zero();  // current base position, world frame [m]
  std::optional<Eigen::Vector2d> incident;
};

struct CellIndex {
  int iz = -1;
  int iphi = -1;
  int igamma = -1;
};

/// Initial guess produced by matching the hedgehog against BRT states.
struct CandidateGuess {
  JointVector q = JointVector::Zero();
  double phi = 0.0;
  FlyingState x;
  CellIndex cell;
  double cell_max_speed = 0.0;
  double gamma_lo = 0.0;  // pitch bin bounds, for refinement
  double gamma_hi = 0.0;
};

struct ConstraintMargins {
  JointVector position = JointVector::Zero();
  JointVector velocity = JointVector::Zero();
  double brt = 0.0;

  double min_slack() const;
  bool feasible() const { return min_slack() >= 0.0; }
};

/// Fully assembled release state: joint configuration and velocity, the
/// throwing triangle in world coordinates, and the flight state.
struct ThrowConfiguration {
  JointVector q = JointVector::Zero();
  JointVector qd = JointVector::Zero();
  double phi = 0.0;
  double gamma = 0.0;
  FlyingState x;  // z holds the geometric value implied by (q, B)
  Vec3 base_placement = Vec3::Zero();  // A
  Vec3 release_point = Vec3::Zero();   // E
  Vec3 target = Vec3::Zero();          // B
  double base_yaw = 0.0;
  Vec3 velocity = Vec3::Zero();  // world release velocity
  ConstraintMargins margins;
  double f_brt_value = 0.0;

  CellIndex cell;
  double cell_max_speed = 0.0;
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
};

/// BRT states binned by (height, pitch) and matched against every hedgehog
/// cell whose stored speed strictly exceeds the state speed. z_offset
/// shifts the height binning by the target height relative to the arm base
/// plane. Deterministic cell-major ordering. Throws GridMismatch when the
/// hedgehog arrays disagree with its grids.
std::vector<CandidateGuess> match_candidates(const VelocityHedgehog& hedgehog,
                                             const std::vector<FlyingState>& brt_positives,
                                             double z_offset = 0.0);

/// Closed-form chain fixing the full throwing triangle: E sits -x.r along
/// the incident direction from B and x.z above it; the base placement A
/// absorbs the rest. The flight height is re-derived from the arm geometry
/// so the triangle equalities hold exactly. Throws DegenerateTriangle for
/// near-zero range or an unresolvable incident direction.
ThrowConfiguration assemble_throw(const ArmModel& model, const CandidateGuess& guess,
                                  const ThrowQuery& query);

/// Slack of every inequality: joint position, joint velocity, -f_BRT.
ConstraintMargins verify(const ArmModel& model, const ThrowConfiguration& cfg,
                         const MlpClassifier& classifier);

/// Refinement and validity options. The landing guard keeps refined states
/// on flights that still reach the slack-widened target set; the velocity
/// slack absorbs the crossing-velocity drift induced by height rebinding.
struct PlanOptions {
  LandingTargetSet landing_set{};
  FlightParams flight{};
  double position_slack = 0.05;  // matches the dataset augmentation scale
  double velocity_slack = 0.25;
  double refine_window = 0.15;
  int refine_steps = 8;
};

/// True iff the closed-form flight from x crosses the opening plane inside
/// the position slack with crossing velocities inside the widened windows.
bool landing_within(const FlyingState& x, const PlanOptions& options);

/// Local coordinate search over (rd, zd) inside the candidate's pitch bin
/// maximizing the minimum slack, restricted to states that keep the
/// landing guard satisfied when the input satisfies it. Never returns a
/// configuration with a smaller minimum slack; steps = 0 is the identity.
ThrowConfiguration refine(const ArmModel& model, const ThrowConfiguration& cfg,
                          const MlpClassifier& classifier, int steps,
                          const PlanOptions& options = PlanOptions{});

/// match -> assemble -> verify (-> refine on near-feasible), filtered to
/// feasible configurations, truncated to limit. Throws NoSolution when no
/// feasible configuration exists. guesses_consumed, when given, receives
/// the number of matched guesses examined before the limit was reached.
std::vector<ThrowConfiguration> plan(const ArmModel& model, const VelocityHedgehog& hedgehog,
                                     const std::vector<FlyingState>& brt_positives,
                                     const MlpClassifier& classifier, const ThrowQuery& query,
                                     std::size_t limit,
                                     const PlanOptions& options = PlanOptions{},
                                     std::size_t* guesses_consumed = nullptr);

using TrajectoryPlanner =
    std::function<JointTrajectory(const BoundaryState& from, const BoundaryState& to)>;

/// Minimum trajectory-duration candidate from the current state; ties keep
/// the earlier index. Throws EmptyInput on an empty list.
std::pair<std::size_t, JointTrajectory> select_time_optimal(
    const std::vector<ThrowConfiguration>& plans, const BoundaryState& current,
    const TrajectoryPlanner& traj_gen);

struct StrategyOutcome {
  bool available = false;
  ThrowConfiguration configuration;
  JointTrajectory trajectory;
  double computation_seconds = 0.0;
  double trajectory_seconds = 0.0;

  double total_seconds() const { return computation_seconds + trajectory_seconds; }
};

/// Outcome of the two disturbance-recovery strategies:
///  (a) re-time the trajectory toward the original configuration;
///  (b) re-assemble a sample of cached guesses and take the feasible one
///      closest in time to the disturbed state.
struct AdaptiveComparison {
  StrategyOutcome recalc;  // strategy (a)
  StrategyOutcome replan;  // strategy (b)
  char winner = 'a';       // by total time; ties favor (a)
};

AdaptiveComparison adaptive_replan(const ArmModel& model, const BoundaryState& disturbed,
                                   const ThrowConfiguration& original,
                                   const std::vector<CandidateGuess>& cached, int n_sample,
                                   const MlpClassifier& classifier, const ThrowQuery& query,
                                   const TrajectoryPlanner& traj_gen,
                                   const PlanOptions& options = PlanOptions{});

/// Plan output: JSON list of configurations with the query and margins.
void save_plan(const std::vector<ThrowConfiguration>& plans, const ThrowQuery& query,
               const std::string& path);
std::vector<ThrowConfiguration> load_plan(const std::string& path,
                                          ThrowQuery* query_out = nullptr);

}  // namespace throwkit
