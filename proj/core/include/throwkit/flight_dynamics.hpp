#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "throwkit/errors.hpp"

namespace throwkit {

/// Planar object flight state in throwing-plane coordinates. The target
/// sits at the origin, so a release state has r <= 0, rd > 0, and the
/// throwing range is -r.
struct FlyingState {
  double r = 0.0;   // signed horizontal coordinate along the throwing direction [m]
  double z = 0.0;   // height above the box opening [m]
  double rd = 0.0;  // horizontal velocity toward the target [m/s]
  double zd = 0.0;  // vertical velocity [m/s]

  double speed() const;
  double pitch() const;  // atan2(zd, rd)
};

struct Interval {
  double low = 0.0;
  double high = 0.0;

  double mid() const { return 0.5 * (low + high); }
  double extent() const { return high - low; }
  bool contains(double v, double tol = 0.0) const {
    return v >= low - tol && v <= high + tol;
  }
};

/// Landing target set X_l: a position box around the origin plus velocity
/// boxes. The object must be moving toward the target and descending.
struct LandingTargetSet {
  double r_slack = 0.0;
  double z_slack = 0.0;
  Interval rd_range{0.2, 2.0};
  Interval zd_range{-5.0, -2.0};

  bool contains(const FlyingState& x, double tol = 0.0) const;
};

struct FlightParams {
  double g = 9.81;  // gravitational acceleration [m/s^2]
};

struct TimedState {
  double t = 0.0;
  FlyingState x;
};

/// Ordered flight samples with strictly increasing t.
using FlightTrajectory = std::vector<TimedState>;

inline constexpr int kDefaultLandingCount = 2160;
inline constexpr double kDefaultHorizon = 1.0;
inline constexpr double kDefaultDt = 0.025;
inline constexpr double kDefaultVelocityCap = 5.0;

/// Projectile dynamics: d/dt (r, z, rd, zd) = (rd, zd, 0, -g).
/// The returned FlyingState holds the derivative components.
FlyingState dynamics(const FlyingState& x, const FlightParams& p);

/// Closed-form projectile state tau seconds after x.
FlyingState forward_state(const FlyingState& x, double tau, const FlightParams& p);

/// Closed-form projectile state tau seconds before the given landing state.
FlyingState backward_state(const FlyingState& landing, double tau, const FlightParams& p);

/// States at times -dt, -2dt, ..., -horizon (stored with increasing t).
/// Throws InvalidHorizon when horizon <= 0 or dt <= 0.
FlightTrajectory integrate_backward(const FlyingState& landing, double horizon, double dt,
                                    const FlightParams& p);

/// Backward integration of arbitrary dynamics xdot = f(x) with a classic
/// fourth-order one-step method. Exact for the projectile case.
using DynamicsFn = std::function<FlyingState(const FlyingState&)>;
FlightTrajectory integrate_backward_rk4(const DynamicsFn& f, const FlyingState& landing,
                                        double horizon, double dt);

/// Deterministic landing-state grid over the velocity box, midpoint
/// convention, with r = z = 0. The grid dimensions multiply to exactly n.
std::vector<FlyingState> sample_landing_states(const LandingTargetSet& set, int n,
                                               std::uint64_t seed);

/// All backward-trajectory states across landing samples, velocity-filtered.
std::vector<FlyingState> generate_brt_data(const LandingTargetSet& set, int n_landing,
                                           double horizon, double dt, double v_cap,
                                           const FlightParams& p, std::uint64_t seed);

/// Same pipeline seeded from landing velocities outside the target boxes
/// (drawn within 3x their extent). No returned state reaches the target set.
std::vector<FlyingState> generate_negative_data(const LandingTargetSet& set, int n_landing,
                                                double horizon, double dt, double v_cap,
                                                const FlightParams& p, std::uint64_t seed);

/// True iff forward simulation from x enters the target set within horizon,
/// checked each step and at the refined z = 0 downward crossing.
bool membership_oracle(const FlyingState& x, const LandingTargetSet& set, double horizon,
                       double dt, const FlightParams& p, double tol = 1e-6);

struct BrtMetadata {
  std::uint64_t seed = 0;
  int n_landing = kDefaultLandingCount;
  double horizon = kDefaultHorizon;
  double dt = kDefaultDt;
  double v_cap = kDefaultVelocityCap;
  double g = 9.81;
  LandingTargetSet target;
  std::vector<double> shifts_r{0.0};
  std::vector<double> shifts_z{0.0};
};

/// Labeled in/out samples of the BRT.
struct BrtDataset {
  std::vector<FlyingState> positives;
  std::vector<FlyingState> negatives;
  BrtMetadata meta;
};

/// Cartesian product of both classes with (dr, dz) position shifts.
/// Shift lists must include 0.
BrtDataset augment_dataset(const std::vector<FlyingState>& positives,
                           const std::vector<FlyingState>& negatives,
                           const std::vector<double>& shifts_r,
                           const std::vector<double>& shifts_z);

/// CSV with header r,z,rd,zd,label (label 1 = inside BRT) plus a JSON
/// sidecar (same path with .json extension) carrying the metadata.
void save_brt_dataset(const BrtDataset& dataset, const std::string& csv_path);
BrtDataset load_brt_dataset(const std::string& csv_path);

std::string dataset_sidecar_path(const std::string& csv_path);

}  // namespace throwkit
