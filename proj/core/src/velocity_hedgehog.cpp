#include "throwkit/velocity_hedgehog.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "throwkit/errors.hpp"
#include "throwkit/io_util.hpp"
#include "throwkit/version.hpp"

namespace throwkit {

namespace {

constexpr double kDegree = M_PI / 180.0;

std::vector<double> linear_grid(double start, double step, double stop) {
  std::vector<double> g;
  const int count = static_cast<int>(std::round((stop - start) / step)) + 1;
  g.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    g.push_back(start + i * step);
  }
  return g;
}

/// Ratio test shared by max_speed_along and the build loop so that stored
/// speeds reproduce bit-exactly when re-queried.
MaxSpeed ratio_test(const Matrix7x3& pinv, const Vec3& direction, const JointLimits& limits,
                    double cap) {
  const JointVector u = pinv * direction;
  double s = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kJointCount; ++i) {
    if (u[i] > 0.0) {
      s = std::min(s, limits.qd_max[i] / u[i]);
    } else if (u[i] < 0.0) {
      s = std::min(s, limits.qd_min[i] / u[i]);
    }
  }
  if (!(s <= cap)) {
    return MaxSpeed{cap, true};
  }
  return MaxSpeed{s, false};
}

Vec3 throw_direction(double yaw, double gamma) {
  return Vec3{std::cos(gamma) * std::cos(yaw), std::cos(gamma) * std::sin(yaw),
              std::sin(gamma)};
}

}  // namespace

HedgehogGrids HedgehogGrids::defaults() {
  HedgehogGrids g;
  g.z = linear_grid(0.0, 0.05, 1.2);
  g.phi = linear_grid(-90.0 * kDegree, 15.0 * kDegree, 90.0 * kDegree);
  g.gamma = linear_grid(20.0 * kDegree, 5.0 * kDegree, 70.0 * kDegree);
  return g;
}

int HedgehogGrids::nearest_index(const std::vector<double>& grid, double v) {
  if (grid.empty()) return -1;
  int best = 0;
  double best_dist = std::abs(v - grid[0]);
  for (int i = 1; i < static_cast<int>(grid.size()); ++i) {
    const double d = std::abs(v - grid[static_cast<std::size_t>(i)]);
    if (d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  double spacing = std::numeric_limits<double>::infinity();
  if (grid.size() > 1) {
    const std::size_t ib = static_cast<std::size_t>(best);
    spacing = ib + 1 < grid.size() ? grid[ib + 1] - grid[ib] : grid[ib] - grid[ib - 1];
  }
  return best_dist <= 0.5 * spacing + 1e-12 ? best : -1;
}

std::vector<ConfigSample> sample_configurations(const ArmModel& model, int n, std::uint64_t seed,
                                                double sigma_min) {
  if (n <= 0) {
    throw ConfigError("sample count must be positive");
  }
  std::mt19937_64 rng(seed);
  std::array<std::uniform_real_distribution<double>, kJointCount> dists;
  for (int j = 0; j < kJointCount; ++j) {
    dists[j] = std::uniform_real_distribution<double>(model.limits.q_min[j],
                                                      model.limits.q_max[j]);
  }

  std::vector<ConfigSample> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    ConfigSample s;
    for (int j = 0; j < kJointCount; ++j) {
      s.q[j] = dists[j](rng);
    }
    const PointKinematics pk = point_kinematics(model, s.q);
    if (sigma_min > 0.0) {
      // Smallest singular value of the 3x7 Jacobian via its 3x3 Gram matrix.
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(pk.jacobian * pk.jacobian.transpose());
      const double sigma = std::sqrt(std::max(eig.eigenvalues()[0], 0.0));
      if (sigma < sigma_min) continue;
    }
    s.position = pk.position;
    s.jacobian = pk.jacobian;
    samples.push_back(s);
  }
  return samples;
}

MaxSpeed max_speed_along(const ArmModel& model, const JointVector& q, double phi, double gamma,
                         double cap, double pinv_cutoff) {
  const PointKinematics pk = point_kinematics(model, q);
  const double psi = yaw_of(pk.position);
  const Matrix7x3 pinv = pseudoinverse(pk.jacobian, pinv_cutoff);
  return ratio_test(pinv, throw_direction(psi + phi, gamma), model.limits, cap);
}

std::size_t VelocityHedgehog::index(int iz, int iphi, int igamma) const {
  return (static_cast<std::size_t>(iz) * grids.phi.size() + static_cast<std::size_t>(iphi)) *
             grids.gamma.size() +
         static_cast<std::size_t>(igamma);
}

std::size_t VelocityHedgehog::populated_cells() const {
  std::size_t count = 0;
  for (double v : max_speed) {
    if (v > 0.0) ++count;
  }
  return count;
}

VelocityHedgehog build_hedgehog(const ArmModel& model, const std::vector<ConfigSample>& samples,
                                const HedgehogGrids& grids, double cap, double pinv_cutoff) {
  VelocityHedgehog hh;
  hh.grids = grids;
  const std::size_t cells = grids.z.size() * grids.phi.size() * grids.gamma.size();
  hh.max_speed.assign(cells, 0.0);
  hh.q_at.assign(cells, JointVector::Zero());
  hh.capped.assign(cells, 0);
  hh.provenance.speed_cap = cap;
  hh.provenance.samples_retained = static_cast<std::int64_t>(samples.size());

  for (const ConfigSample& sample : samples) {
    const int iz = HedgehogGrids::nearest_index(grids.z, sample.position.z());
    if (iz < 0) continue;
    if (sample.position.head<2>().norm() <= 1e-9) continue;  // yaw undefined
    const double psi = yaw_of(sample.position);
    const Matrix7x3 pinv = pseudoinverse(sample.jacobian, pinv_cutoff);

    for (std::size_t iphi = 0; iphi < grids.phi.size(); ++iphi) {
      const double yaw = psi + grids.phi[iphi];
      for (std::size_t igamma = 0; igamma < grids.gamma.size(); ++igamma) {
        const MaxSpeed res =
            ratio_test(pinv, throw_direction(yaw, grids.gamma[igamma]), model.limits, cap);
        const std::size_t cell =
            hh.index(iz, static_cast<int>(iphi), static_cast<int>(igamma));
        if (res.speed > hh.max_speed[cell]) {
          hh.max_speed[cell] = res.speed;
          hh.q_at[cell] = sample.q;
          hh.capped[cell] = res.capped ? 1 : 0;
        }
      }
    }
  }
  return hh;
}

ManipHistogram manipulability_histogram(const ArmModel& model,
                                        const std::vector<ConfigSample>& samples, int s1_bins,
                                        int dot_bins) {
  if (samples.empty() || s1_bins <= 0 || dot_bins <= 0) {
    throw ConfigError("histogram needs samples and positive bin counts");
  }
  (void)model;

  std::vector<double> s1(samples.size());
  std::vector<double> dot(samples.size());
  double s1_max = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Matrix2x7 jxy = samples[i].jacobian.topRows<2>();
    const TopSingular top = max_singular(jxy);
    s1[i] = top.value;
    s1_max = std::max(s1_max, top.value);
    const Eigen::Vector2d ae_xy = samples[i].position.head<2>();
    if (top.valid && ae_xy.norm() > 1e-12) {
      dot[i] = std::abs(top.direction.dot(ae_xy.normalized()));
    } else {
      dot[i] = 0.0;
    }
  }
  if (s1_max <= 0.0) s1_max = 1.0;

  ManipHistogram h;
  h.s1_edges.resize(static_cast<std::size_t>(s1_bins) + 1);
  for (int i = 0; i <= s1_bins; ++i) {
    h.s1_edges[static_cast<std::size_t>(i)] = s1_max * i / s1_bins;
  }
  h.dot_edges.resize(static_cast<std::size_t>(dot_bins) + 1);
  for (int i = 0; i <= dot_bins; ++i) {
    h.dot_edges[static_cast<std::size_t>(i)] = static_cast<double>(i) / dot_bins;
  }
  h.counts.assign(static_cast<std::size_t>(s1_bins) * static_cast<std::size_t>(dot_bins), 0);

  const auto bin_of = [](double v, double lo, double hi, int bins) {
    const int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    return std::clamp(b, 0, bins - 1);
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int bs = bin_of(s1[i], 0.0, s1_max, s1_bins);
    const int bd = bin_of(dot[i], 0.0, 1.0, dot_bins);
    h.counts[static_cast<std::size_t>(bs) * static_cast<std::size_t>(dot_bins) +
             static_cast<std::size_t>(bd)] += 1;
    ++h.total;
  }
  return h;
}

std::string hedgehog_manifest_path(const std::string& bin_path) {
  if (bin_path.size() >= 4 && bin_path.substr(bin_path.size() - 4) == ".bin") {
    return bin_path.substr(0, bin_path.size() - 4) + ".json";
  }
  return bin_path + ".json";
}

void save_hedgehog(const VelocityHedgehog& hedgehog, const std::string& bin_path) {
  const std::size_t cells = hedgehog.cell_count();
  std::string blob;
  const std::size_t speed_bytes = cells * sizeof(double);
  const std::size_t q_bytes = cells * kJointCount * sizeof(double);
  blob.resize(speed_bytes + q_bytes + cells);

  std::memcpy(blob.data(), hedgehog.max_speed.data(), speed_bytes);
  char* q_dst = blob.data() + speed_bytes;
  for (std::size_t c = 0; c < cells; ++c) {
    std::memcpy(q_dst + c * kJointCount * sizeof(double), hedgehog.q_at[c].data(),
                kJointCount * sizeof(double));
  }
  std::memcpy(blob.data() + speed_bytes + q_bytes, hedgehog.capped.data(), cells);
  atomic_write_file(bin_path, blob);

  nlohmann::json j;
  j["schema_version"] = 1;
  j["generator"] = kVersionString;
  j["grids"] = {{"z", hedgehog.grids.z},
                {"phi", hedgehog.grids.phi},
                {"gamma", hedgehog.grids.gamma}};
  j["shape"] = {hedgehog.grids.z.size(), hedgehog.grids.phi.size(),
                hedgehog.grids.gamma.size()};
  j["seed"] = hedgehog.provenance.seed;
  j["samples_requested"] = hedgehog.provenance.samples_requested;
  j["samples_retained"] = hedgehog.provenance.samples_retained;
  j["sigma_min"] = hedgehog.provenance.sigma_min;
  j["speed_cap"] = hedgehog.provenance.speed_cap;
  j["populated_cells"] = hedgehog.populated_cells();
  j["arrays"] = {
      {"max_speed", {{"offset", 0}, {"count", cells}}},
      {"q_at", {{"offset", speed_bytes}, {"count", cells * kJointCount}}},
      {"capped", {{"offset", speed_bytes + q_bytes}, {"count", cells}}},
  };
  j["byte_order"] = "little";
  atomic_write_file(hedgehog_manifest_path(bin_path), j.dump(2) + "\n");
}

VelocityHedgehog load_hedgehog(const std::string& bin_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(hedgehog_manifest_path(bin_path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("hedgehog manifest for " + bin_path + ": " + e.what());
  }

  VelocityHedgehog hh;
  try {
    hh.grids.z = j.at("grids").at("z").get<std::vector<double>>();
    hh.grids.phi = j.at("grids").at("phi").get<std::vector<double>>();
    hh.grids.gamma = j.at("grids").at("gamma").get<std::vector<double>>();
    hh.provenance.seed = j.value("seed", std::uint64_t{0});
    hh.provenance.samples_requested = j.value("samples_requested", std::int64_t{0});
    hh.provenance.samples_retained = j.value("samples_retained", std::int64_t{0});
    hh.provenance.sigma_min = j.value("sigma_min", kDefaultSigmaMin);
    hh.provenance.speed_cap = j.value("speed_cap", kDefaultSpeedCap);

    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 3 || shape[0] != hh.grids.z.size() || shape[1] != hh.grids.phi.size() ||
        shape[2] != hh.grids.gamma.size()) {
      throw GridMismatch("hedgehog " + bin_path + ": manifest shape disagrees with grids");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("hedgehog manifest for " + bin_path + ": " + e.what());
  }

  const std::size_t cells = hh.grids.z.size() * hh.grids.phi.size() * hh.grids.gamma.size();
  const std::string blob = read_file(bin_path);
  const std::size_t speed_bytes = cells * sizeof(double);
  const std::size_t q_bytes = cells * kJointCount * sizeof(double);
  if (blob.size() != speed_bytes + q_bytes + cells) {
    throw GridMismatch("hedgehog " + bin_path + ": blob size disagrees with manifest shape");
  }

  hh.max_speed.resize(cells);
  std::memcpy(hh.max_speed.data(), blob.data(), speed_bytes);
  hh.q_at.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    std::memcpy(hh.q_at[c].data(), blob.data() + speed_bytes + c * kJointCount * sizeof(double),
                kJointCount * sizeof(double));
  }
  hh.capped.resize(cells);
  std::memcpy(hh.capped.data(), blob.data() + speed_bytes + q_bytes, cells);
  return hh;
}

}  // namespace throwkit
