#include "throwkit/flight_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "throwkit/io_util.hpp"
#include "throwkit/version.hpp"

namespace throwkit {

double FlyingState::speed() const { return std::hypot(rd, zd); }
double FlyingState::pitch() const { return std::atan2(zd, rd); }

bool LandingTargetSet::contains(const FlyingState& x, double tol) const {
  return std::abs(x.r) <= r_slack + tol && std::abs(x.z) <= z_slack + tol &&
         rd_range.contains(x.rd, tol) && zd_range.contains(x.zd, tol);
}

FlyingState dynamics(const FlyingState& x, const FlightParams& p) {
  return FlyingState{x.rd, x.zd, 0.0, -p.g};
}

FlyingState forward_state(const FlyingState& x, double tau, const FlightParams& p) {
  return FlyingState{x.r + x.rd * tau, x.z + x.zd * tau - 0.5 * p.g * tau * tau, x.rd,
                     x.zd - p.g * tau};
}

FlyingState backward_state(const FlyingState& landing, double tau, const FlightParams& p) {
  const double zd = landing.zd + p.g * tau;
  return FlyingState{landing.r - landing.rd * tau, landing.z - zd * tau + 0.5 * p.g * tau * tau,
                     landing.rd, zd};
}

namespace {

int backward_step_count(double horizon, double dt) {
  if (!(horizon > 0.0) || !(dt > 0.0)) {
    throw InvalidHorizon("horizon and dt must be positive");
  }
  return static_cast<int>(std::floor(horizon / dt + 1e-12));
}

}  // namespace

FlightTrajectory integrate_backward(const FlyingState& landing, double horizon, double dt,
                                    const FlightParams& p) {
  const int steps = backward_step_count(horizon, dt);
  FlightTrajectory traj;
  traj.reserve(steps);
  for (int k = steps; k >= 1; --k) {
    const double tau = k * dt;
    traj.push_back(TimedState{-tau, backward_state(landing, tau, p)});
  }
  return traj;
}

FlightTrajectory integrate_backward_rk4(const DynamicsFn& f, const FlyingState& landing,
                                        double horizon, double dt) {
  const int steps = backward_step_count(horizon, dt);
  const auto add = [](const FlyingState& a, const FlyingState& b, double s) {
    return FlyingState{a.r + s * b.r, a.z + s * b.z, a.rd + s * b.rd, a.zd + s * b.zd};
  };

  FlightTrajectory traj(steps);
  FlyingState x = landing;
  for (int k = 1; k <= steps; ++k) {
    const double h = -dt;  // stepping backward in time
    const FlyingState k1 = f(x);
    const FlyingState k2 = f(add(x, k1, 0.5 * h));
    const FlyingState k3 = f(add(x, k2, 0.5 * h));
    const FlyingState k4 = f(add(x, k3, h));
    FlyingState incr = add(add(add(k1, k2, 2.0), k3, 2.0), k4, 1.0);
    x = add(x, incr, h / 6.0);
    traj[steps - k] = TimedState{-k * dt, x};
  }
  return traj;
}

std::vector<FlyingState> sample_landing_states(const LandingTargetSet& set, int n,
                                               std::uint64_t /*seed*/) {
  if (n <= 0) {
    throw ConfigError("landing sample count must be positive");
  }

  // Factor n into a grid whose aspect matches the velocity box.
  const double target_ratio = set.rd_range.extent() / set.zd_range.extent();
  int best_rd = 1;
  double best_score = std::numeric_limits<double>::infinity();
  for (int a = 1; a <= n; ++a) {
    if (n % a != 0) continue;
    const int b = n / a;
    const double score = std::abs(std::log((static_cast<double>(a) / b) / target_ratio));
    if (score < best_score) {
      best_score = score;
      best_rd = a;
    }
  }
  const int n_rd = best_rd;
  const int n_zd = n / best_rd;

  std::vector<FlyingState> out;
  out.reserve(n);
  for (int i = 0; i < n_rd; ++i) {
    const double rd = set.rd_range.low + (i + 0.5) * set.rd_range.extent() / n_rd;
    for (int j = 0; j < n_zd; ++j) {
      const double zd = set.zd_range.low + (j + 0.5) * set.zd_range.extent() / n_zd;
      out.push_back(FlyingState{0.0, 0.0, rd, zd});
    }
  }
  return out;
}

namespace {

std::vector<FlyingState> aggregate_backward(const std::vector<FlyingState>& landings,
                                            double horizon, double dt, double v_cap,
                                            const FlightParams& p) {
  std::vector<FlyingState> out;
  for (const auto& landing : landings) {
    const int steps = backward_step_count(horizon, dt);
    for (int k = 1; k <= steps; ++k) {
      const FlyingState x = backward_state(landing, k * dt, p);
      if (std::abs(x.rd) > v_cap || std::abs(x.zd) > v_cap) continue;
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace

std::vector<FlyingState> generate_brt_data(const LandingTargetSet& set, int n_landing,
                                           double horizon, double dt, double v_cap,
                                           const FlightParams& p, std::uint64_t seed) {
  return aggregate_backward(sample_landing_states(set, n_landing, seed), horizon, dt, v_cap, p);
}

std::vector<FlyingState> generate_negative_data(const LandingTargetSet& set, int n_landing,
                                                double horizon, double dt, double v_cap,
                                                const FlightParams& p, std::uint64_t seed) {
  if (n_landing <= 0) {
    throw ConfigError("landing sample count must be positive");
  }

  // Landing velocities uniform over the 3x-scaled velocity box, rejecting
  // the target box itself.
  const auto scaled = [](const Interval& iv) {
    const double c = iv.mid();
    return Interval{c - 1.5 * iv.extent(), c + 1.5 * iv.extent()};
  };
  const Interval rd_outer = scaled(set.rd_range);
  const Interval zd_outer = scaled(set.zd_range);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rd_dist(rd_outer.low, rd_outer.high);
  std::uniform_real_distribution<double> zd_dist(zd_outer.low, zd_outer.high);

  std::vector<FlyingState> landings;
  landings.reserve(n_landing);
  while (static_cast<int>(landings.size()) < n_landing) {
    const double rd = rd_dist(rng);
    const double zd = zd_dist(rng);
    if (set.rd_range.contains(rd) && set.zd_range.contains(zd)) continue;
    landings.push_back(FlyingState{0.0, 0.0, rd, zd});
  }

  // Backward states seeded outside X_l can still re-enter it forward in
  // time (e.g. ascending seeds that fall back through the opening), so the
  // aggregate is filtered through the forward membership oracle.
  std::vector<FlyingState> out;
  for (const FlyingState& x : aggregate_backward(landings, horizon, dt, v_cap, p)) {
    if (!membership_oracle(x, set, horizon, dt, p)) {
      out.push_back(x);
    }
  }
  return out;
}

bool membership_oracle(const FlyingState& x, const LandingTargetSet& set, double horizon,
                       double dt, const FlightParams& p, double tol) {
  if (set.contains(x, tol)) return true;

  FlyingState state = x;
  double t = 0.0;
  while (t < horizon - 1e-12) {
    const double step = std::min(dt, horizon - t);
    const FlyingState next = forward_state(state, step, p);

    // Event refinement: descending crossing of the z = 0 plane within the step.
    if (state.z > 0.0 && next.z <= 0.0) {
      const double disc = state.zd * state.zd + 2.0 * p.g * state.z;
      if (disc >= 0.0) {
        const double tau = (state.zd + std::sqrt(disc)) / p.g;
        if (tau >= -tol && tau <= step + tol) {
          if (set.contains(forward_state(state, tau, p), tol)) return true;
        }
      }
    }

    if (set.contains(next, tol)) return true;
    state = next;
    t += step;
  }
  return false;
}

BrtDataset augment_dataset(const std::vector<FlyingState>& positives,
                           const std::vector<FlyingState>& negatives,
                           const std::vector<double>& shifts_r,
                           const std::vector<double>& shifts_z) {
  const auto has_zero = [](const std::vector<double>& s) {
    return std::any_of(s.begin(), s.end(), [](double v) { return v == 0.0; });
  };
  if (shifts_r.empty() || shifts_z.empty() || !has_zero(shifts_r) || !has_zero(shifts_z)) {
    throw ConfigError("augmentation shift lists must include 0");
  }

  const auto shifted = [&](const std::vector<FlyingState>& states) {
    std::vector<FlyingState> out;
    out.reserve(states.size() * shifts_r.size() * shifts_z.size());
    for (double dr : shifts_r) {
      for (double dz : shifts_z) {
        for (const FlyingState& x : states) {
          out.push_back(FlyingState{x.r + dr, x.z + dz, x.rd, x.zd});
        }
      }
    }
    return out;
  };

  BrtDataset dataset;
  dataset.positives = shifted(positives);
  dataset.negatives = shifted(negatives);
  dataset.meta.shifts_r = shifts_r;
  dataset.meta.shifts_z = shifts_z;
  return dataset;
}

std::string dataset_sidecar_path(const std::string& csv_path) {
  if (csv_path.size() >= 4 && csv_path.substr(csv_path.size() - 4) == ".csv") {
    return csv_path.substr(0, csv_path.size() - 4) + ".json";
  }
  return csv_path + ".json";
}

void save_brt_dataset(const BrtDataset& dataset, const std::string& csv_path) {
  std::string csv;
  csv.reserve((dataset.positives.size() + dataset.negatives.size()) * 64 + 32);
  csv += "r,z,rd,zd,label\n";
  char line[160];
  const auto append = [&](const std::vector<FlyingState>& states, int label) {
    for (const FlyingState& x : states) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%d\n", x.r, x.z, x.rd, x.zd,
                    label);
      csv += line;
    }
  };
  append(dataset.positives, 1);
  append(dataset.negatives, 0);
  atomic_write_file(csv_path, csv);

  const BrtMetadata& m = dataset.meta;
  nlohmann::json j;
  j["schema_version"] = 1;
  j["generator"] = kVersionString;
  j["seed"] = m.seed;
  j["n_landing"] = m.n_landing;
  j["horizon"] = m.horizon;
  j["dt"] = m.dt;
  j["v_cap"] = m.v_cap;
  j["g"] = m.g;
  j["counts"] = {{"positives", dataset.positives.size()},
                 {"negatives", dataset.negatives.size()}};
  j["target_set"] = {{"r_slack", m.target.r_slack},
                     {"z_slack", m.target.z_slack},
                     {"rd_range", {m.target.rd_range.low, m.target.rd_range.high}},
                     {"zd_range", {m.target.zd_range.low, m.target.zd_range.high}}};
  j["shifts_r"] = m.shifts_r;
  j["shifts_z"] = m.shifts_z;
  atomic_write_file(dataset_sidecar_path(csv_path), j.dump(2) + "\n");
}

BrtDataset load_brt_dataset(const std::string& csv_path) {
  std::istringstream in(read_file(csv_path));
  std::string header;
  std::getline(in, header);
  if (header != "r,z,rd,zd,label") {
    throw ConfigError("BRT dataset " + csv_path + ": unexpected header '" + header + "'");
  }

  BrtDataset dataset;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    FlyingState x;
    int label = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%d", &x.r, &x.z, &x.rd, &x.zd, &label) != 5) {
      throw ConfigError("BRT dataset " + csv_path + ": bad row at line " +
                        std::to_string(line_no));
    }
    (label == 1 ? dataset.positives : dataset.negatives).push_back(x);
  }

  try {
    const nlohmann::json j = nlohmann::json::parse(read_file(dataset_sidecar_path(csv_path)));
    BrtMetadata& m = dataset.meta;
    m.seed = j.value("seed", std::uint64_t{0});
    m.n_landing = j.value("n_landing", kDefaultLandingCount);
    m.horizon = j.value("horizon", kDefaultHorizon);
    m.dt = j.value("dt", kDefaultDt);
    m.v_cap = j.value("v_cap", kDefaultVelocityCap);
    m.g = j.value("g", 9.81);
    if (j.contains("target_set")) {
      const auto& t = j["target_set"];
      m.target.r_slack = t.value("r_slack", 0.0);
      m.target.z_slack = t.value("z_slack", 0.0);
      if (t.contains("rd_range")) {
        m.target.rd_range = Interval{t["rd_range"][0], t["rd_range"][1]};
      }
      if (t.contains("zd_range")) {
        m.target.zd_range = Interval{t["zd_range"][0], t["zd_range"][1]};
      }
    }
    if (j.contains("shifts_r")) m.shifts_r = j["shifts_r"].get<std::vector<double>>();
    if (j.contains("shifts_z")) m.shifts_z = j["shifts_z"].get<std::vector<double>>();
  } catch (const ConfigError&) {
    // Sidecar is optional on load; defaults apply.
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("BRT dataset sidecar for " + csv_path + ": " + e.what());
  }
  return dataset;
}

}  // namespace throwkit
