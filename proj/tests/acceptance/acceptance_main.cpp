// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// any criterion fails. Builds the default-scale artifacts once up front.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/profile_oracle.hpp"
#include "throwkit/ballistic_sim.hpp"
#include "throwkit/throw_planner.hpp"

using namespace throwkit;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Suite {
  int failures = 0;

  void run(const std::string& name, const std::function<std::string()>& body) {
    std::string detail;
    bool ok = true;
    try {
      detail = body();
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    if (detail.rfind("FAIL", 0) == 0) {
      ok = false;
      detail = detail.substr(4);
      if (!detail.empty() && detail[0] == ' ') detail = detail.substr(1);
    }
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

struct Artifacts {
  ArmModel model = ArmModel::panda();
  LandingTargetSet target_set;
  FlightParams params;
  std::uint64_t seed = 12345;

  std::vector<FlyingState> positives;
  std::vector<FlyingState> negatives;
  double generation_seconds = 0.0;

  BrtDataset dataset;  // augmented
  MlpClassifier classifier;
  TrainMetrics train_metrics;
  double training_seconds = 0.0;

  VelocityHedgehog hedgehog;
  PlannerContext ctx;

  void build() {
    std::printf("building artifacts (default scale)...\n");
    std::fflush(stdout);

    double t0 = now_seconds();
    positives = generate_brt_data(target_set, kDefaultLandingCount, kDefaultHorizon,
                                  kDefaultDt, kDefaultVelocityCap, params, seed);
    generation_seconds = now_seconds() - t0;
    negatives = generate_negative_data(target_set, kDefaultLandingCount, kDefaultHorizon,
                                       kDefaultDt, kDefaultVelocityCap, params, seed);

    const std::vector<double> shifts{-0.05, 0.0, 0.05};
    dataset = augment_dataset(positives, negatives, shifts, shifts);
    dataset.meta.seed = seed;
    dataset.meta.target = target_set;

    TrainConfig cfg;
    cfg.seed = seed;
    t0 = now_seconds();
    auto [model_out, metrics] = train(dataset, cfg);
    training_seconds = now_seconds() - t0;
    classifier = std::move(model_out);
    train_metrics = metrics;
    std::printf("  trained: test accuracy %.4f in %.0f s\n", metrics.test_accuracy,
                training_seconds);
    std::fflush(stdout);

    t0 = now_seconds();
    const auto samples = sample_configurations(model, 100000, seed, kDefaultSigmaMin);
    hedgehog = build_hedgehog(model, samples, HedgehogGrids::defaults());
    hedgehog.provenance.seed = seed;
    hedgehog.provenance.samples_requested = 100000;
    std::printf("  hedgehog: %zu populated cells in %.0f s\n", hedgehog.populated_cells(),
                now_seconds() - t0);
    std::fflush(stdout);

    ctx.model = model;
    ctx.hedgehog = hedgehog;
    ctx.brt_positives = positives;
    ctx.classifier = classifier;
    ctx.bounds = KinematicBounds::defaults_for(model);
  }

  ThrowQuery query_at(double relative_height) const {
    ThrowQuery q;
    q.target = Vec3{2.0, 0.0, model.base_height + relative_height};
    q.base_position = Vec3::Zero();
    return q;
  }
};

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

std::string criterion_brt_pipeline(const Artifacts& a) {
  const std::size_t count = a.positives.size();
  if (count < 50000 || count > 120000) {
    return format("FAIL positive count %zu outside [50000, 120000]", count);
  }
  if (a.generation_seconds >= 10.0) {
    return format("FAIL generation took %.1f s (budget 10 s)", a.generation_seconds);
  }

  std::mt19937_64 rng(987);
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  long passed = 0;
  for (int i = 0; i < 1000; ++i) {
    if (membership_oracle(a.positives[pick(rng)], a.target_set, kDefaultHorizon, kDefaultDt,
                          a.params)) {
      ++passed;
    }
  }
  if (passed != 1000) {
    return format("FAIL only %ld/1000 sampled states pass the membership oracle", passed);
  }
  return format("%zu positives in %.2f s; 1000/1000 membership subsample", count,
                a.generation_seconds);
}

std::string criterion_classifier(const Artifacts& a) {
  if (a.train_metrics.test_accuracy < 0.95) {
    return format("FAIL test accuracy %.4f < 0.95", a.train_metrics.test_accuracy);
  }

  // Gradient check at 1e-5 relative on 10 parameters x 10 inputs.
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> feat(-2.0, 2.0);
  const double h = 1e-6;
  for (int input = 0; input < 10; ++input) {
    Eigen::MatrixXd X(8, 4);
    std::vector<int> y(8);
    for (int i = 0; i < 8; ++i) {
      for (int c = 0; c < 4; ++c) X(i, c) = feat(rng);
      y[static_cast<std::size_t>(i)] = (rng() & 1) ? 1 : 0;
    }
    const Gradients g = batch_gradients(a.classifier, X, y);
    for (int probe = 0; probe < 10; ++probe) {
      const std::size_t layer = rng() % 3;
      const Eigen::Index r = static_cast<Eigen::Index>(
          rng() % static_cast<std::uint64_t>(a.classifier.weights[layer].rows()));
      const Eigen::Index c = static_cast<Eigen::Index>(
          rng() % static_cast<std::uint64_t>(a.classifier.weights[layer].cols()));
      MlpClassifier perturbed = a.classifier;
      perturbed.weights[layer](r, c) += h;
      const double lp = batch_loss(perturbed, X, y);
      perturbed.weights[layer](r, c) -= 2.0 * h;
      const double lm = batch_loss(perturbed, X, y);
      const double fd = (lp - lm) / (2.0 * h);
      const double an = g.weights[layer](r, c);
      if (std::abs(an - fd) > 1e-5 * std::max(1.0, std::abs(fd))) {
        return format("FAIL gradient mismatch %.3e vs %.3e at layer %zu", an, fd, layer);
      }
    }
  }

  // Determinism, demonstrated at reduced scale through the same train().
  BrtDataset small;
  small.positives.assign(a.positives.begin(),
                         a.positives.begin() + std::min<std::size_t>(10000, a.positives.size()));
  small.negatives.assign(a.negatives.begin(),
                         a.negatives.begin() + std::min<std::size_t>(10000, a.negatives.size()));
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 2024;
  const auto [m1, r1] = train(small, cfg);
  const auto [m2, r2] = train(small, cfg);
  for (std::size_t l = 0; l < m1.weights.size(); ++l) {
    if ((m1.weights[l].array() != m2.weights[l].array()).any() ||
        (m1.biases[l].array() != m2.biases[l].array()).any()) {
      return format("FAIL training is not bit-deterministic at layer %zu", l);
    }
  }
  (void)r1;
  (void)r2;
  return format("test accuracy %.4f; gradients at 1e-5; bit-deterministic",
                a.train_metrics.test_accuracy);
}

std::string criterion_hedgehog(const Artifacts& a) {
  const VelocityHedgehog& hh = a.hedgehog;
  const std::size_t populated = hh.populated_cells();
  if (populated <= 2000) {
    return format("FAIL only %zu populated cells (need > 2000)", populated);
  }

  const HedgehogGrids& grids = hh.grids;
  long checked = 0, capped = 0;
  for (std::size_t iz = 0; iz < grids.z.size(); ++iz) {
    for (std::size_t ip = 0; ip < grids.phi.size(); ++ip) {
      for (std::size_t ig = 0; ig < grids.gamma.size(); ++ig) {
        const std::size_t cell =
            hh.index(static_cast<int>(iz), static_cast<int>(ip), static_cast<int>(ig));
        const double speed = hh.max_speed[cell];
        if (speed <= 0.0) continue;
        const JointVector& q = hh.q_at[cell];
        for (int j = 0; j < kJointCount; ++j) {
          if (q[j] < a.model.limits.q_min[j] || q[j] > a.model.limits.q_max[j]) {
            return format("FAIL stored configuration violates position limits in cell %zu",
                          cell);
          }
        }

        const PointKinematics pk = point_kinematics(a.model, q);
        const double psi = yaw_of(pk.position);
        const double yaw = psi + grids.phi[ip];
        const double gamma = grids.gamma[ig];
        const Vec3 dir{std::cos(gamma) * std::cos(yaw), std::cos(gamma) * std::sin(yaw),
                       std::sin(gamma)};
        const JointVector qd = pseudoinverse(pk.jacobian) * dir * speed;

        bool active = false;
        for (int j = 0; j < kJointCount; ++j) {
          if (qd[j] < a.model.limits.qd_min[j] - 1e-9 ||
              qd[j] > a.model.limits.qd_max[j] + 1e-9) {
            return format("FAIL cell %zu velocity-infeasible at joint %d", cell, j);
          }
          if (std::abs(qd[j] - a.model.limits.qd_max[j]) <= 1e-9 ||
              std::abs(qd[j] - a.model.limits.qd_min[j]) <= 1e-9) {
            active = true;
          }
        }
        if (hh.capped[cell]) {
          ++capped;
        } else if (!active) {
          return format("FAIL cell %zu has no active velocity constraint", cell);
        }
        ++checked;
      }
    }
  }
  return format("%zu populated cells, all feasible with active constraints (%ld capped)",
                populated, capped);
}

std::string criterion_planner_feasibility(const Artifacts& a) {
  const std::vector<double> heights{-0.2, 0.0, 0.2, 0.5};
  std::vector<std::size_t> counts;
  PlanOptions options;
  options.landing_set = a.target_set;
  for (double h : heights) {
    const auto plans = plan(a.model, a.hedgehog, a.ctx.brt_positives, a.classifier,
                            a.query_at(h), 2000000, options);
    counts.push_back(plans.size());
  }
  std::ostringstream detail;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    detail << (i > 0 ? " / " : "") << counts[i];
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 100) {
      return "FAIL counts " + detail.str() + " (need >= 100 each)";
    }
    if (i > 0 && counts[i] >= counts[i - 1]) {
      return "FAIL counts " + detail.str() + " not strictly decreasing with height";
    }
  }
  return "solution counts " + detail.str() + " for heights -0.2 / 0.0 / 0.2 / 0.5";
}

std::string criterion_validity(const Artifacts& a) {
  SimConfig sim;
  std::vector<double> heights;
  for (int i = 0; i <= 21; ++i) heights.push_back(-1.2 + 0.1 * i);
  const SuccessReport report = run_success_benchmark(a.ctx, heights, 500, sim);
  if (report.total_planned < 5000) {
    return format("FAIL only %ld trajectories (need >= 5000)", report.total_planned);
  }
  if (report.rate < 0.99) {
    return format("FAIL success rate %.4f < 0.99 (%ld/%ld)", report.rate,
                  report.total_succeeded, report.total_planned);
  }
  return format("%ld/%ld throws landed (%.2f%%) across %zu heights", report.total_succeeded,
                report.total_planned, 100.0 * report.rate, heights.size());
}

std::string criterion_latency(const Artifacts& a) {
  const LatencyReport report = run_latency_benchmark(a.ctx, 16);
  if (report.solutions <= 0) {
    return "FAIL latency benchmark produced no solutions";
  }
  if (report.overall_us >= 5000.0) {
    return format("FAIL per-solution overall %.0f us >= 5 ms", report.overall_us);
  }
  if (report.initial_guess_us >= report.full_config_us) {
    return format("FAIL initial guess %.1f us not below full configuration %.1f us",
                  report.initial_guess_us, report.full_config_us);
  }
  return format("per solution: guess %.1f us, config %.1f us, trajectory %.1f us, overall "
                "%.1f us",
                report.initial_guess_us, report.full_config_us, report.trajectory_us,
                report.overall_us);
}

std::string criterion_trajectory(const Artifacts&) {
  using testing::oracle_min_duration;

  const ScalarBounds trapezoid{1.0, 1.0, 1e6};
  const JointProfile limit_case = plan_single(0.0, 0.0, 1.0, 0.0, trapezoid);
  if (std::abs(limit_case.duration() - 2.0) > 1e-3) {
    return format("FAIL trapezoid-limit duration %.6f != 2.0 within 1e-3",
                  limit_case.duration());
  }

  std::mt19937_64 rng(321);
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> vmax_dist(0.5, 3.0);
  std::uniform_real_distribution<double> amax_dist(1.0, 20.0);
  std::uniform_real_distribution<double> jmax_dist(5.0, 10000.0);
  double worst_gap = 0.0;
  for (int i = 0; i < 200; ++i) {
    ScalarBounds b;
    b.v_max = vmax_dist(rng);
    b.a_max = amax_dist(rng);
    b.j_max = jmax_dist(rng);
    std::uniform_real_distribution<double> vel(-b.v_max, b.v_max);
    const double q0 = pos(rng), q1 = pos(rng), v0 = vel(rng), v1 = vel(rng);

    const JointProfile p = plan_single(q0, v0, q1, v1, b);
    if (std::abs(p.end_position() - q1) > 1e-6 || std::abs(p.end_velocity() - v1) > 1e-6) {
      return format("FAIL case %d boundary error above 1e-6", i);
    }
    for (int k = 0; k <= 200; ++k) {
      double q, v, acc;
      p.sample(p.duration() * k / 200.0, q, v, acc);
      if (std::abs(v) > b.v_max + 1e-9 || std::abs(acc) > b.a_max + 1e-9) {
        return format("FAIL case %d violates kinematic limits", i);
      }
    }
    const double oracle = oracle_min_duration(q0, v0, q1, v1, b);
    worst_gap = std::max(worst_gap, std::abs(p.duration() - oracle));
    if (std::abs(p.duration() - oracle) > 1e-4) {
      return format("FAIL case %d duration %.6f vs oracle %.6f", i, p.duration(), oracle);
    }
  }
  return format("200 random cases within 1e-4 of the oracle (worst gap %.2e); trapezoid "
                "limit ok",
                worst_gap);
}

std::string criterion_adaptive(const Artifacts& a) {
  SimConfig sim;
  const std::string dir = THROWKIT_DATA_DIR "/scenarios";

  const DisturbanceScenario large = load_scenario(dir + "/large_disturbance.json");
  const AdaptiveReport big = run_adaptive_scenario(a.ctx, large, sim);
  if (big.comparison.replan.total_seconds() > big.comparison.recalc.total_seconds()) {
    return format("FAIL large disturbance: (b) %.0f ms > (a) %.0f ms",
                  1e3 * big.comparison.replan.total_seconds(),
                  1e3 * big.comparison.recalc.total_seconds());
  }
  if (!big.recalc_flight.success || !big.replan_flight.success) {
    return "FAIL large disturbance: a recovered throw missed the box";
  }

  const DisturbanceScenario zero = load_scenario(dir + "/zero_disturbance.json");
  const AdaptiveReport none = run_adaptive_scenario(a.ctx, zero, sim);
  if (none.comparison.winner != 'a') {
    return "FAIL zero disturbance: strategy (a) did not win";
  }
  if (std::abs(none.comparison.recalc.trajectory_seconds - none.original_duration) > 1e-9) {
    return "FAIL zero disturbance: (a) duration differs from the original remainder";
  }
  return format("large: (b) %.0f ms <= (a) %.0f ms, both landed; zero: (a) wins",
                1e3 * big.comparison.replan.total_seconds(),
                1e3 * big.comparison.recalc.total_seconds());
}

std::string criterion_equivariance(const Artifacts& a) {
  PlanOptions options;
  options.landing_set = a.target_set;

  ThrowQuery base_query = a.query_at(0.0);
  base_query.incident = Eigen::Vector2d(1.0, 0.0);
  const auto base = plan(a.model, a.hedgehog, a.ctx.brt_positives, a.classifier, base_query,
                         64, options);
  if (base.empty()) return "FAIL no base solutions";

  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  for (int trial = 0; trial < 10; ++trial) {
    const double theta = angle(rng);
    ThrowQuery rotated_query = base_query;
    rotated_query.incident = Eigen::Rotation2Dd(theta) * (*base_query.incident);
    const auto rotated = plan(a.model, a.hedgehog, a.ctx.brt_positives, a.classifier,
                              rotated_query, 64, options);
    if (rotated.size() != base.size()) {
      return format("FAIL angle %d changed the solution count %zu -> %zu", trial, base.size(),
                    rotated.size());
    }
    const Eigen::Rotation2Dd R(theta);
    for (std::size_t i = 0; i < base.size(); ++i) {
      const ThrowConfiguration& u = base[i];
      const ThrowConfiguration& v = rotated[i];
      const bool bitwise = (u.q.array() == v.q.array()).all() &&
                           (u.qd.array() == v.qd.array()).all() && u.phi == v.phi &&
                           u.gamma == v.gamma && u.x.r == v.x.r && u.x.z == v.x.z &&
                           u.x.rd == v.x.rd && u.x.zd == v.x.zd;
      if (!bitwise) {
        return format("FAIL angle %d solution %zu differs in (q, qd, phi, gamma, x)", trial,
                      i);
      }
      const Eigen::Vector2d expected =
          u.target.head<2>() + R * (u.base_placement - u.target).head<2>();
      if ((v.base_placement.head<2>() - expected).norm() > 1e-9 ||
          std::abs(v.base_placement.z() - u.base_placement.z()) > 1e-9) {
        return format("FAIL angle %d base placement not rotated exactly", trial);
      }
    }
  }
  return format("10 rotations leave %zu solutions bit-identical with rotated bases",
                base.size());
}

}  // namespace

int main() {
  Artifacts artifacts;
  artifacts.build();

  Suite suite;
  suite.run("1. BRT pipeline",
            [&] { return criterion_brt_pipeline(artifacts); });
  suite.run("2. Classifier", [&] { return criterion_classifier(artifacts); });
  suite.run("3. Velocity hedgehog", [&] { return criterion_hedgehog(artifacts); });
  suite.run("4. Planner feasibility",
            [&] { return criterion_planner_feasibility(artifacts); });
  suite.run("5. End-to-end validity", [&] { return criterion_validity(artifacts); });
  suite.run("6. Online latency", [&] { return criterion_latency(artifacts); });
  suite.run("7. Trajectory generator", [&] { return criterion_trajectory(artifacts); });
  suite.run("8. Adaptive throwing", [&] { return criterion_adaptive(artifacts); });
  suite.run("9. Rotation equivariance", [&] { return criterion_equivariance(artifacts); });

  if (suite.failures > 0) {
    std::printf("%d criterion(s) failed\n", suite.failures);
    return 1;
  }
  std::printf("all 9 criteria passed\n");
  return 0;
}
