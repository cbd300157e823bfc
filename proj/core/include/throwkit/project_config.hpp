#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "throwkit/arm_kinematics.hpp"
#include "throwkit/ballistic_types.hpp"
#include "throwkit/brt_classifier.hpp"
#include "throwkit/flight_dynamics.hpp"
#include "throwkit/velocity_hedgehog.hpp"

namespace throwkit {

struct TrainFileConfig {
  TrainConfig config;
  std::vector<double> shifts_r{-0.05, 0.0, 0.05};
  std::vector<double> shifts_z{-0.05, 0.0, 0.05};
};

/// Project-level configuration: optional paths to parameter files plus the
/// global seed and output directory. Referenced files must exist at load.
struct ProjectConfig {
  std::string arm_path;
  std::string grids_path;
  std::string target_set_path;
  std::string train_path;
  std::string sim_path;
  std::uint64_t seed = 0;
  std::string out_dir = ".";

  static ProjectConfig load(const std::string& path);

  /// Resolved objects; compiled-in defaults apply when a path is empty.
  ArmModel arm() const;
  HedgehogGrids grids() const;
  LandingTargetSet target_set() const;
  TrainFileConfig train() const;
  SimConfig sim() const;
};

HedgehogGrids load_grids(const std::string& path);
LandingTargetSet load_target_set(const std::string& path);
TrainFileConfig load_train_config(const std::string& path);
SimConfig load_sim_config(const std::string& path);

}  // namespace throwkit
