#include "throwkit/throw_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "throwkit/io_util.hpp"
#include "throwkit/version.hpp"

namespace throwkit {

namespace {

double half_spacing(const std::vector<double>& grid, std::size_t i) {
  if (grid.size() < 2) return std::numeric_limits<double>::infinity();
  const double spacing =
      i + 1 < grid.size() ? grid[i + 1] - grid[i] : grid[i] - grid[i - 1];
  return 0.5 * spacing;
}

Eigen::Vector2d resolve_incident(const ThrowQuery& query) {
  if (query.incident) {
    const double n = query.incident->norm();
    if (n <= 1e-9) {
      throw DegenerateTriangle("incident direction has zero norm");
    }
    return *query.incident / n;
  }
  const Eigen::Vector2d toward =
      (query.target - query.base_position).head<2>();
  if (toward.norm() <= 1e-9) {
    throw DegenerateTriangle("base sits on the target vertical axis; give an incident direction");
  }
  return toward.normalized();
}

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

bool landing_within(const FlyingState& x, const PlanOptions& options) {
  const double g = options.flight.g;
  const double disc = x.zd * x.zd + 2.0 * g * x.z;
  if (disc < 0.0) return false;
  const double t_cross = (x.zd + std::sqrt(disc)) / g;
  if (t_cross < 0.0) return false;

  const LandingTargetSet& set = options.landing_set;
  const double r_land = x.r + x.rd * t_cross;
  if (std::abs(r_land) > set.r_slack + options.position_slack) return false;
  if (!set.rd_range.contains(x.rd)) return false;
  const double zd_cross = x.zd - g * t_cross;
  return set.zd_range.contains(zd_cross, options.velocity_slack);
}

double ConstraintMargins::min_slack() const {
  return std::min(brt, std::min(position.minCoeff(), velocity.minCoeff()));
}

std::vector<CandidateGuess> match_candidates(const VelocityHedgehog& hedgehog,
                                             const std::vector<FlyingState>& brt_positives,
                                             double z_offset) {
  const HedgehogGrids& grids = hedgehog.grids;
  const std::size_t cells = grids.z.size() * grids.phi.size() * grids.gamma.size();
  if (hedgehog.max_speed.size() != cells || hedgehog.q_at.size() != cells) {
    throw GridMismatch("hedgehog arrays disagree with its grid shape");
  }

  // Group BRT states by (shifted height bin, pitch bin).
  std::map<std::pair<int, int>, std::vector<std::size_t>> bins;
  for (std::size_t i = 0; i < brt_positives.size(); ++i) {
    const FlyingState& x = brt_positives[i];
    const int iz = HedgehogGrids::nearest_index(grids.z, x.z + z_offset);
    if (iz < 0) continue;
    const int ig = HedgehogGrids::nearest_index(grids.gamma, x.pitch());
    if (ig < 0) continue;
    bins[{iz, ig}].push_back(i);
  }

  std::vector<CandidateGuess> guesses;
  for (std::size_t iz = 0; iz < grids.z.size(); ++iz) {
    for (std::size_t iphi = 0; iphi < grids.phi.size(); ++iphi) {
      for (std::size_t ig = 0; ig < grids.gamma.size(); ++ig) {
        const std::size_t cell =
            hedgehog.index(static_cast<int>(iz), static_cast<int>(iphi), static_cast<int>(ig));
        const double cap = hedgehog.max_speed[cell];
        if (cap <= 0.0) continue;
        const auto it = bins.find({static_cast<int>(iz), static_cast<int>(ig)});
        if (it == bins.end()) continue;
        for (std::size_t idx : it->second) {
          const FlyingState& x = brt_positives[idx];
          if (!(x.speed() < cap)) continue;  // strict inequality
          CandidateGuess g;
          g.q = hedgehog.q_at[cell];
          g.phi = grids.phi[iphi];
          g.x = x;
          g.cell = CellIndex{static_cast<int>(iz), static_cast<int>(iphi),
                             static_cast<int>(ig)};
          g.cell_max_speed = cap;
          g.gamma_lo = grids.gamma[ig] - half_spacing(grids.gamma, ig);
          g.gamma_hi = grids.gamma[ig] + half_spacing(grids.gamma, ig);
          guesses.push_back(g);
        }
      }
    }
  }
  return guesses;
}

ThrowConfiguration assemble_throw(const ArmModel& model, const CandidateGuess& guess,
                                  const ThrowQuery& query) {
  const double range = -guess.x.r;
  if (range < 1e-6) {
    throw DegenerateTriangle("throwing range below 1e-6");
  }
  const Eigen::Vector2d e = resolve_incident(query);

  // Arm-frame quantities are independent of the incident direction, which
  // makes the planned (q, qd, phi, gamma, x) exactly rotation-equivariant.
  const PointKinematics pk = point_kinematics(model, guess.q);
  const double psi = yaw_of(pk.position);
  const double throw_yaw_arm = psi + guess.phi;
  const Vec3 v_arm{guess.x.rd * std::cos(throw_yaw_arm), guess.x.rd * std::sin(throw_yaw_arm),
                   guess.x.zd};
  const Matrix7x3 pinv = pseudoinverse(pk.jacobian);

  ThrowConfiguration cfg;
  cfg.q = guess.q;
  cfg.qd = pinv * v_arm;
  cfg.phi = guess.phi;
  cfg.gamma = guess.x.pitch();
  cfg.x = guess.x;
  cfg.x.z = model.base_height + pk.position.z() - query.target.z();
  cfg.target = query.target;
  cfg.cell = guess.cell;
  cfg.cell_max_speed = guess.cell_max_speed;
  cfg.gamma_lo = guess.gamma_lo;
  cfg.gamma_hi = guess.gamma_hi;

  const double chi = std::atan2(e.y(), e.x());
  cfg.base_yaw = chi - throw_yaw_arm;
  cfg.release_point =
      query.target - Vec3{range * e.x(), range * e.y(), -cfg.x.z};
  const Eigen::Rotation2Dd rot(cfg.base_yaw);
  const Eigen::Vector2d ae_xy_world = rot * pk.position.head<2>();
  cfg.base_placement =
      cfg.release_point - Vec3{ae_xy_world.x(), ae_xy_world.y(), pk.position.z()};
  cfg.velocity = Vec3{guess.x.rd * e.x(), guess.x.rd * e.y(), guess.x.zd};
  return cfg;
}

ConstraintMargins verify(const ArmModel& model, const ThrowConfiguration& cfg,
                         const MlpClassifier& classifier) {
  ConstraintMargins m;
  for (int i = 0; i < kJointCount; ++i) {
    m.position[i] =
        std::min(cfg.q[i] - model.limits.q_min[i], model.limits.q_max[i] - cfg.q[i]);
    m.velocity[i] =
        std::min(cfg.qd[i] - model.limits.qd_min[i], model.limits.qd_max[i] - cfg.qd[i]);
  }
  m.brt = -f_brt(classifier, cfg.x);
  return m;
}

ThrowConfiguration refine(const ArmModel& model, const ThrowConfiguration& cfg,
                          const MlpClassifier& classifier, int steps,
                          const PlanOptions& options) {
  if (steps <= 0) return cfg;
  // Only constrain the search by the landing guard when the input passes
  // it, so refine never turns a valid flight into an invalid one and still
  // improves callers that feed it an out-of-guard state.
  const bool guard = landing_within(cfg.x, options);

  const PointKinematics pk = point_kinematics(model, cfg.q);
  const double psi = yaw_of(pk.position);
  const double throw_yaw_arm = psi + cfg.phi;
  const double cos_yaw = std::cos(throw_yaw_arm);
  const double sin_yaw = std::sin(throw_yaw_arm);
  const Matrix7x3 pinv = pseudoinverse(pk.jacobian);

  // Incident direction recovered from the assembled triangle.
  const Eigen::Vector2d eb_xy = (cfg.target - cfg.release_point).head<2>();
  const double range = eb_xy.norm();
  const Eigen::Vector2d e = range > 1e-12 ? Eigen::Vector2d(eb_xy / range)
                                          : Eigen::Vector2d(1.0, 0.0);

  struct Eval {
    ThrowConfiguration cfg;
    double slack = -std::numeric_limits<double>::infinity();
  };
  const auto evaluate = [&](double rd, double zd) -> Eval {
    Eval ev;
    if (rd <= 0.0) return ev;
    const double pitch = std::atan2(zd, rd);
    if (pitch < cfg.gamma_lo || pitch > cfg.gamma_hi) return ev;
    if (!(std::hypot(rd, zd) < cfg.cell_max_speed)) return ev;
    if (guard) {
      FlyingState moved = cfg.x;
      moved.rd = rd;
      moved.zd = zd;
      if (!landing_within(moved, options)) return ev;
    }
    ev.cfg = cfg;
    ev.cfg.x.rd = rd;
    ev.cfg.x.zd = zd;
    ev.cfg.gamma = pitch;
    ev.cfg.qd = pinv * Vec3{rd * cos_yaw, rd * sin_yaw, zd};
    ev.cfg.velocity = Vec3{rd * e.x(), rd * e.y(), zd};
    ev.cfg.margins = verify(model, ev.cfg, classifier);
    ev.cfg.f_brt_value = -ev.cfg.margins.brt;
    ev.slack = ev.cfg.margins.min_slack();
    return ev;
  };

  Eval best = evaluate(cfg.x.rd, cfg.x.zd);
  if (!std::isfinite(best.slack)) {
    // The input violates its own bin bounds; leave it untouched.
    return cfg;
  }

  double step = 0.05;
  int evals = 0;
  for (int iter = 0; iter < steps && evals < 50; ++iter) {
    bool improved = false;
    const double dirs[4][2] = {{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}};
    for (const auto& d : dirs) {
      if (evals >= 50) break;
      ++evals;
      Eval candidate = evaluate(best.cfg.x.rd + d[0], best.cfg.x.zd + d[1]);
      if (candidate.slack > best.slack) {
        best = candidate;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  return best.cfg;
}

std::vector<ThrowConfiguration> plan(const ArmModel& model, const VelocityHedgehog& hedgehog,
                                     const std::vector<FlyingState>& brt_positives,
                                     const MlpClassifier& classifier, const ThrowQuery& query,
                                     std::size_t limit, const PlanOptions& options,
                                     std::size_t* guesses_consumed) {
  const double z_offset = query.target.z() - model.base_height;
  const std::vector<CandidateGuess> guesses =
      match_candidates(hedgehog, brt_positives, z_offset);

  std::size_t consumed = 0;
  std::vector<ThrowConfiguration> feasible;
  for (const CandidateGuess& guess : guesses) {
    if (feasible.size() >= limit) break;
    ++consumed;
    ThrowConfiguration cfg;
    try {
      cfg = assemble_throw(model, guess, query);
    } catch (const DegenerateTriangle&) {
      continue;
    } catch (const DegenerateYaw&) {
      continue;
    }
    cfg.margins = verify(model, cfg, classifier);
    cfg.f_brt_value = -cfg.margins.brt;
    if (!landing_within(cfg.x, options)) {
      continue;  // height rebinding pushed the flight off the target set
    }
    if (cfg.margins.feasible()) {
      feasible.push_back(cfg);
      continue;
    }
    if (cfg.margins.min_slack() >= -options.refine_window) {
      ThrowConfiguration refined = refine(model, cfg, classifier, options.refine_steps, options);
      if (refined.margins.feasible()) {
        feasible.push_back(refined);
      }
    }
  }

  if (guesses_consumed != nullptr) {
    *guesses_consumed = consumed;
  }
  if (feasible.empty()) {
    throw NoSolution("no feasible throwing configuration for this query");
  }
  return feasible;
}

std::pair<std::size_t, JointTrajectory> select_time_optimal(
    const std::vector<ThrowConfiguration>& plans, const BoundaryState& current,
    const TrajectoryPlanner& traj_gen) {
  if (plans.empty()) {
    throw EmptyInput("select_time_optimal needs a nonempty candidate list");
  }
  std::size_t best_index = 0;
  JointTrajectory best_traj;
  double best_duration = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < plans.size(); ++i) {
    JointTrajectory traj = traj_gen(current, BoundaryState{plans[i].q, plans[i].qd});
    if (traj.duration < best_duration) {
      best_duration = traj.duration;
      best_index = i;
      best_traj = std::move(traj);
    }
  }
  return {best_index, std::move(best_traj)};
}

AdaptiveComparison adaptive_replan(const ArmModel& model, const BoundaryState& disturbed,
                                   const ThrowConfiguration& original,
                                   const std::vector<CandidateGuess>& cached, int n_sample,
                                   const MlpClassifier& classifier, const ThrowQuery& query,
                                   const TrajectoryPlanner& traj_gen,
                                   const PlanOptions& options) {
  AdaptiveComparison out;

  // Strategy (a): keep the original throwing configuration, re-time only.
  {
    const auto t0 = std::chrono::steady_clock::now();
    JointTrajectory traj = traj_gen(disturbed, BoundaryState{original.q, original.qd});
    out.recalc.computation_seconds = elapsed_seconds(t0);
    out.recalc.trajectory_seconds = traj.duration;
    out.recalc.trajectory = std::move(traj);
    out.recalc.configuration = original;
    out.recalc.available = true;
  }

  // Strategy (b): re-assemble a spread of cached guesses and take the
  // feasible configuration closest in time. n_sample = 0 falls back to (a).
  const int n = std::min<int>(n_sample, static_cast<int>(cached.size()));
  if (n <= 0) {
    out.replan = out.recalc;
    out.winner = 'a';
    return out;
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    double best_duration = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      const std::size_t idx =
          static_cast<std::size_t>(k) * cached.size() / static_cast<std::size_t>(n);
      ThrowConfiguration cfg;
      try {
        cfg = assemble_throw(model, cached[idx], query);
      } catch (const DegenerateTriangle&) {
        continue;
      } catch (const DegenerateYaw&) {
        continue;
      }
      cfg.margins = verify(model, cfg, classifier);
      cfg.f_brt_value = -cfg.margins.brt;
      if (!cfg.margins.feasible() || !landing_within(cfg.x, options)) continue;
      JointTrajectory traj = traj_gen(disturbed, BoundaryState{cfg.q, cfg.qd});
      if (traj.duration < best_duration) {
        best_duration = traj.duration;
        out.replan.configuration = cfg;
        out.replan.trajectory = std::move(traj);
        out.replan.available = true;
      }
    }
    out.replan.computation_seconds = elapsed_seconds(t0);
    out.replan.trajectory_seconds = best_duration;
  }

  if (!out.replan.available) {
    out.replan = out.recalc;
    out.winner = 'a';
    return out;
  }
  out.winner = out.replan.total_seconds() < out.recalc.total_seconds() ? 'b' : 'a';
  return out;
}

namespace {

nlohmann::json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec3_from(const nlohmann::json& j) {
  return Vec3{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

nlohmann::json joint_json(const JointVector& v) {
  return std::vector<double>(v.data(), v.data() + kJointCount);
}

JointVector joint_from(const nlohmann::json& j) {
  JointVector v;
  for (int i = 0; i < kJointCount; ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

}  // namespace

void save_plan(const std::vector<ThrowConfiguration>& plans, const ThrowQuery& query,
               const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["generator"] = kVersionString;
  j["query"]["target"] = vec3_json(query.target);
  j["query"]["base_position"] = vec3_json(query.base_position);
  if (query.incident) {
    j["query"]["incident"] = {query.incident->x(), query.incident->y()};
  }
  j["configurations"] = nlohmann::json::array();
  for (const ThrowConfiguration& c : plans) {
    nlohmann::json jc;
    jc["q"] = joint_json(c.q);
    jc["qd"] = joint_json(c.qd);
    jc["phi"] = c.phi;
    jc["gamma"] = c.gamma;
    jc["x"] = {{"r", c.x.r}, {"z", c.x.z}, {"rd", c.x.rd}, {"zd", c.x.zd}};
    jc["A"] = vec3_json(c.base_placement);
    jc["E"] = vec3_json(c.release_point);
    jc["B"] = vec3_json(c.target);
    jc["base_yaw"] = c.base_yaw;
    jc["v"] = vec3_json(c.velocity);
    jc["margins"] = {{"position", joint_json(c.margins.position)},
                     {"velocity", joint_json(c.margins.velocity)},
                     {"brt", c.margins.brt}};
    jc["f_brt"] = c.f_brt_value;
    j["configurations"].push_back(std::move(jc));
  }
  atomic_write_file(path, j.dump(2) + "\n");
}

std::vector<ThrowConfiguration> load_plan(const std::string& path, ThrowQuery* query_out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("plan " + path + ": " + e.what());
  }

  std::vector<ThrowConfiguration> plans;
  try {
    if (query_out != nullptr && j.contains("query")) {
      query_out->target = vec3_from(j["query"].at("target"));
      query_out->base_position = vec3_from(j["query"].at("base_position"));
      if (j["query"].contains("incident")) {
        query_out->incident = Eigen::Vector2d(j["query"]["incident"].at(0).get<double>(),
                                              j["query"]["incident"].at(1).get<double>());
      }
    }
    for (const auto& jc : j.at("configurations")) {
      ThrowConfiguration c;
      c.q = joint_from(jc.at("q"));
      c.qd = joint_from(jc.at("qd"));
      c.phi = jc.at("phi").get<double>();
      c.gamma = jc.at("gamma").get<double>();
      c.x.r = jc.at("x").at("r").get<double>();
      c.x.z = jc.at("x").at("z").get<double>();
      c.x.rd = jc.at("x").at("rd").get<double>();
      c.x.zd = jc.at("x").at("zd").get<double>();
      c.base_placement = vec3_from(jc.at("A"));
      c.release_point = vec3_from(jc.at("E"));
      c.target = vec3_from(jc.at("B"));
      c.base_yaw = jc.at("base_yaw").get<double>();
      c.velocity = vec3_from(jc.at("v"));
      c.margins.position = joint_from(jc.at("margins").at("position"));
      c.margins.velocity = joint_from(jc.at("margins").at("velocity"));
      c.margins.brt = jc.at("margins").at("brt").get<double>();
      c.f_brt_value = jc.at("f_brt").get<double>();
      plans.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("plan " + path + ": " + e.what());
  }
  return plans;
}

}  // namespace throwkit
