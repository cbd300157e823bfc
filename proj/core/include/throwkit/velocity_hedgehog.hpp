#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "throwkit/arm_kinematics.hpp"
#include "throwkit/types.hpp"

namespace throwkit {

/// Cell grids of the capability map: end-effector height, throwing yaw
/// relative to the arm-stretching direction, and throwing pitch.
struct HedgehogGrids {
  std::vector<double> z;      // [m]
  std::vector<double> phi;    // [rad]
  std::vector<double> gamma;  // [rad]

  /// Z = [0:0.05:1.2], Phi = [-90:15:90] deg, Gamma = [20:5:70] deg.
  static HedgehogGrids defaults();

  /// Index of the grid value nearest to v, or -1 when v falls outside the
  /// grid by more than half the local spacing.
  static int nearest_index(const std::vector<double>& grid, double v);
};

/// Joint configuration with cached kinematics, as retained by sampling.
struct ConfigSample {
  JointVector q;
  Vec3 position;
  Matrix3x7 jacobian;
};

/// n seeded uniform-random joint configurations within position limits,
/// keeping only those whose positional Jacobian has smallest singular
/// value >= sigma_min.
std::vector<ConfigSample> sample_configurations(const ArmModel& model, int n,
                                                std::uint64_t seed, double sigma_min);

inline constexpr double kDefaultSigmaMin = 0.1;
inline constexpr double kDefaultSpeedCap = 10.0;

struct MaxSpeed {
  double speed = 0.0;
  bool capped = false;  // ratio test unbounded or above the cap
};

/// Maximum feasible end-effector speed at q along direction (phi, gamma):
/// with d = (cos g cos(psi+phi), cos g sin(psi+phi), sin g), psi the arm
/// yaw and u = pinv(J) d, the joint velocity bound ratio test
///   min_i { qd_max_i/u_i if u_i>0; qd_min_i/u_i if u_i<0 }
/// clamped to cap.
MaxSpeed max_speed_along(const ArmModel& model, const JointVector& q, double phi, double gamma,
                         double cap = kDefaultSpeedCap, double pinv_cutoff = 1e-4);

/// Offline capability map: per (z, phi, gamma) cell the best achievable
/// speed and the configuration achieving it. Unvisited cells hold 0.
struct VelocityHedgehog {
  HedgehogGrids grids;
  std::vector<double> max_speed;       // |Z| x |Phi| x |Gamma|, row-major
  std::vector<JointVector> q_at;       // same cell order
  std::vector<std::uint8_t> capped;    // cell speed hit the cap

  struct Provenance {
    std::uint64_t seed = 0;
    std::int64_t samples_requested = 0;
    std::int64_t samples_retained = 0;
    double sigma_min = kDefaultSigmaMin;
    double speed_cap = kDefaultSpeedCap;
  };
  Provenance provenance;

  std::size_t cell_count() const { return max_speed.size(); }
  std::size_t index(int iz, int iphi, int igamma) const;
  std::size_t populated_cells() const;
};

/// Cell-maximum sweep over the samples. Samples are height-binned to the
/// nearest Z value (half-spacing tolerance, others skipped); ties keep the
/// earlier sample. Deterministic in sample order.
VelocityHedgehog build_hedgehog(const ArmModel& model, const std::vector<ConfigSample>& samples,
                                const HedgehogGrids& grids, double cap = kDefaultSpeedCap,
                                double pinv_cutoff = 1e-4);

/// 2-D histogram over (s1(J_xy), |u1 . unit(AE_xy)|) across samples.
struct ManipHistogram {
  std::vector<double> s1_edges;   // size s1_bins + 1
  std::vector<double> dot_edges;  // size dot_bins + 1, spanning [0, 1]
  std::vector<long> counts;       // row-major (s1 bin, dot bin)
  long total = 0;

  long at(int i_s1, int i_dot) const {
    return counts[static_cast<std::size_t>(i_s1) * (dot_edges.size() - 1) +
                  static_cast<std::size_t>(i_dot)];
  }
};
ManipHistogram manipulability_histogram(const ArmModel& model,
                                        const std::vector<ConfigSample>& samples, int s1_bins,
                                        int dot_bins);

/// Artifact: raw little-endian doubles (max_speed, then q_at, then the
/// capped byte mask) plus a JSON manifest at the .json sibling path.
void save_hedgehog(const VelocityHedgehog& hedgehog, const std::string& bin_path);
VelocityHedgehog load_hedgehog(const std::string& bin_path);

std::string hedgehog_manifest_path(const std::string& bin_path);

}  // namespace throwkit
