#include "throwkit/ballistic_sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "throwkit/errors.hpp"
#include "throwkit/io_util.hpp"
#include "throwkit/version.hpp"

namespace throwkit {

namespace {

Eigen::Matrix3d rot_z(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

ReleaseState execute_throw(const JointTrajectory& traj, const ThrowConfiguration& cfg,
                           const ArmModel& model) {
  const BoundaryState terminal = traj.end();
  if ((terminal.q - cfg.q).cwiseAbs().maxCoeff() > 1e-6 ||
      (terminal.qd - cfg.qd).cwiseAbs().maxCoeff() > 1e-6) {
    throw TerminalMismatch("trajectory terminal state disagrees with the configuration");
  }

  const PointKinematics pk = point_kinematics(model, terminal.q);
  const Eigen::Matrix3d R = rot_z(cfg.base_yaw);
  ReleaseState release;
  release.position = cfg.base_placement + R * pk.position;
  release.velocity = R * (pk.jacobian * terminal.qd);
  return release;
}

SimResult simulate_flight(const ReleaseState& release, const Vec3& box_center,
                          const SimConfig& sim) {
  constexpr double kMaxFlight = 10.0;
  const double plane_z = box_center.z();

  Vec3 p = release.position;
  Vec3 v = release.velocity;
  double t = 0.0;
  const auto step_to = [&](double tau) {
    p += v * tau + Vec3{0.0, 0.0, -0.5 * sim.g * tau * tau};
    v.z() -= sim.g * tau;
    t += tau;
  };

  while (t < kMaxFlight) {
    const double rel_z = p.z() - plane_z;
    // Descending crossing within the next step, refined in closed form.
    const double disc = v.z() * v.z() + 2.0 * sim.g * rel_z;
    if (rel_z >= 0.0 && disc >= 0.0) {
      const double tau = (v.z() + std::sqrt(disc)) / sim.g;
      if (tau >= 0.0 && tau <= sim.dt) {
        step_to(tau);
        SimResult res;
        res.landing_point = p;
        res.crossing_velocity = v;
        res.flight_time = t;
        const double half_x = 0.5 * sim.box_opening_x - sim.ball_radius;
        const double half_y = 0.5 * sim.box_opening_y - sim.ball_radius;
        const double ex = std::abs(p.x() - box_center.x()) - half_x;
        const double ey = std::abs(p.y() - box_center.y()) - half_y;
        if (ex <= 0.0 && ey <= 0.0) {
          res.success = true;
          res.miss_distance = 0.0;
        } else {
          res.success = false;
          res.miss_distance = std::hypot(std::max(ex, 0.0), std::max(ey, 0.0));
        }
        return res;
      }
    }
    step_to(sim.dt);
  }
  throw NoCrossing("ball never descends through the box-opening plane within 10 s");
}

TrajectoryPlanner PlannerContext::trajectory_planner() const {
  const KinematicBounds b = bounds;
  return [b](const BoundaryState& from, const BoundaryState& to) {
    return plan_trajectory(from, to, b);
  };
}

BoundaryState default_home() {
  BoundaryState b;
  b.q << 0.0, -0.785, 0.0, -2.356, 0.0, 1.571, 0.785;
  b.qd.setZero();
  return b;
}

SuccessReport run_success_benchmark(const PlannerContext& ctx, const std::vector<double>& heights,
                                    std::size_t per_height_limit, const SimConfig& sim) {
  SuccessReport report;
  const TrajectoryPlanner traj_gen = ctx.trajectory_planner();
  const BoundaryState home = default_home();

  for (double h : heights) {
    SuccessRow row;
    row.height = h;

    ThrowQuery query;
    query.target = Vec3{2.0, 0.0, ctx.model.base_height + h};
    query.base_position = Vec3{0.0, 0.0, 0.0};

    std::vector<ThrowConfiguration> plans;
    try {
      plans = plan(ctx.model, ctx.hedgehog, ctx.brt_positives, ctx.classifier, query,
                   per_height_limit);
    } catch (const NoSolution&) {
      report.rows.push_back(row);
      continue;
    }

    for (const ThrowConfiguration& cfg : plans) {
      const JointTrajectory traj = traj_gen(home, BoundaryState{cfg.q, cfg.qd});
      const ReleaseState release = execute_throw(traj, cfg, ctx.model);
      ++row.planned;
      try {
        const SimResult res = simulate_flight(release, cfg.target, sim);
        if (res.success) ++row.succeeded;
      } catch (const NoCrossing&) {
      }
    }
    report.rows.push_back(row);
  }

  for (const SuccessRow& row : report.rows) {
    report.total_planned += row.planned;
    report.total_succeeded += row.succeeded;
  }
  report.rate = report.total_planned > 0
                    ? static_cast<double>(report.total_succeeded) /
                          static_cast<double>(report.total_planned)
                    : 0.0;
  return report;
}

LatencyReport run_latency_benchmark(const PlannerContext& ctx, int n_queries) {
  LatencyReport report;
  if (n_queries <= 0) return report;

  const TrajectoryPlanner traj_gen = ctx.trajectory_planner();
  const BoundaryState home = default_home();

  std::vector<double> guess_us, config_us, traj_us;
  for (int qi = 0; qi < n_queries; ++qi) {
    // Cycle target heights across the populated band.
    const double h = -0.2 + 0.1 * (qi % 8);
    ThrowQuery query;
    query.target = Vec3{2.0, 0.0, ctx.model.base_height + h};
    query.base_position = Vec3::Zero();

    const double t0 = now_seconds();
    const std::vector<CandidateGuess> guesses =
        match_candidates(ctx.hedgehog, ctx.brt_positives, h);
    const double t1 = now_seconds();
    if (guesses.empty()) continue;

    long assembled = 0;
    std::vector<ThrowConfiguration> feasible;
    for (const CandidateGuess& g : guesses) {
      ThrowConfiguration cfg;
      try {
        cfg = assemble_throw(ctx.model, g, query);
      } catch (const Error&) {
        continue;
      }
      cfg.margins = verify(ctx.model, cfg, ctx.classifier);
      ++assembled;
      if (cfg.margins.feasible() && feasible.size() < 256) {
        feasible.push_back(std::move(cfg));
      }
    }
    const double t2 = now_seconds();

    long trajectories = 0;
    for (const ThrowConfiguration& cfg : feasible) {
      const JointTrajectory traj = traj_gen(home, BoundaryState{cfg.q, cfg.qd});
      (void)traj;
      ++trajectories;
    }
    const double t3 = now_seconds();

    guess_us.push_back(1e6 * (t1 - t0) / static_cast<double>(guesses.size()));
    if (assembled > 0) {
      config_us.push_back(1e6 * (t2 - t1) / static_cast<double>(assembled));
    }
    if (trajectories > 0) {
      traj_us.push_back(1e6 * (t3 - t2) / static_cast<double>(trajectories));
    }
    report.solutions += static_cast<long>(feasible.size());
    ++report.queries;
  }

  report.initial_guess_us = median(guess_us);
  report.full_config_us = median(config_us);
  report.trajectory_us = median(traj_us);
  report.overall_us = report.initial_guess_us + report.full_config_us + report.trajectory_us;
  return report;
}

DisturbanceScenario load_scenario(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario " + path + ": " + e.what());
  }

  DisturbanceScenario s;
  try {
    s.time = j.at("disturbance_time").get<double>();
    for (int i = 0; i < kJointCount; ++i) {
      s.joint_deltas[i] = j.at("joint_deltas").at(static_cast<std::size_t>(i)).get<double>();
      s.velocity_deltas[i] =
          j.at("velocity_deltas").at(static_cast<std::size_t>(i)).get<double>();
    }
    s.n_sample = j.value("n_sample", 100);
    const auto& t = j.at("target");
    s.query.target = Vec3{t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
    if (j.contains("base_position")) {
      const auto& b = j["base_position"];
      s.query.base_position =
          Vec3{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario " + path + ": " + e.what());
  }
  return s;
}

void save_scenario(const DisturbanceScenario& scenario, const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["generator"] = kVersionString;
  j["disturbance_time"] = scenario.time;
  j["joint_deltas"] = std::vector<double>(scenario.joint_deltas.data(),
                                          scenario.joint_deltas.data() + kJointCount);
  j["velocity_deltas"] = std::vector<double>(scenario.velocity_deltas.data(),
                                             scenario.velocity_deltas.data() + kJointCount);
  j["n_sample"] = scenario.n_sample;
  j["target"] = {scenario.query.target.x(), scenario.query.target.y(),
                 scenario.query.target.z()};
  j["base_position"] = {scenario.query.base_position.x(), scenario.query.base_position.y(),
                        scenario.query.base_position.z()};
  atomic_write_file(path, j.dump(2) + "\n");
}

AdaptiveReport run_adaptive_scenario(const PlannerContext& ctx,
                                     const DisturbanceScenario& scenario, const SimConfig& sim) {
  const TrajectoryPlanner traj_gen = ctx.trajectory_planner();
  const BoundaryState home = default_home();

  const double z_offset = scenario.query.target.z() - ctx.model.base_height;
  std::vector<CandidateGuess> cached =
      match_candidates(ctx.hedgehog, ctx.brt_positives, z_offset);

  // Keep the replan cache aligned with the guesses the plan examined, so
  // the original selection is time-optimal over the same pool strategy (b)
  // samples from.
  std::size_t consumed = cached.size();
  const std::vector<ThrowConfiguration> plans =
      plan(ctx.model, ctx.hedgehog, ctx.brt_positives, ctx.classifier, scenario.query, 4096,
           PlanOptions{}, &consumed);
  cached.resize(consumed);
  const auto [best_index, original_traj] = select_time_optimal(plans, home, traj_gen);
  const ThrowConfiguration& original = plans[best_index];

  AdaptiveReport report;
  report.original_duration = original_traj.duration;
  report.disturbance_time = std::clamp(scenario.time, 0.0, original_traj.duration);

  BoundaryState disturbed;
  JointVector qdd;
  original_traj.sample(report.disturbance_time, disturbed.q, disturbed.qd, qdd);
  disturbed.q += scenario.joint_deltas;
  disturbed.qd += scenario.velocity_deltas;

  report.comparison = adaptive_replan(ctx.model, disturbed, original, cached, scenario.n_sample,
                                      ctx.classifier, scenario.query, traj_gen);

  const auto fly = [&](const StrategyOutcome& outcome) {
    const ReleaseState release =
        execute_throw(outcome.trajectory, outcome.configuration, ctx.model);
    return simulate_flight(release, outcome.configuration.target, sim);
  };
  report.recalc_flight = fly(report.comparison.recalc);
  report.replan_flight = fly(report.comparison.replan);
  return report;
}

}  // namespace throwkit
