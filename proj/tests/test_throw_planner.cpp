#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "support/test_models.hpp"
#include "throwkit/ballistic_sim.hpp"
#include "throwkit/throw_planner.hpp"

using namespace throwkit;

namespace {

// Small but real artifact set shared across the planner tests.
struct MiniArtifacts {
  ArmModel model = ArmModel::panda();
  VelocityHedgehog hedgehog;
  std::vector<FlyingState> brt;
  MlpClassifier classifier;
  LandingTargetSet target_set;
  FlightParams params{9.81};

  MiniArtifacts() {
    const auto samples = sample_configurations(model, 20000, 99, kDefaultSigmaMin);
    hedgehog = build_hedgehog(model, samples, HedgehogGrids::defaults());

    brt = generate_brt_data(target_set, 400, 1.0, 0.025, 5.0, params, 1);
    const auto neg = generate_negative_data(target_set, 400, 1.0, 0.025, 5.0, params, 1);
    const BrtDataset dataset =
        augment_dataset(brt, neg, {-0.05, 0.0, 0.05}, {-0.05, 0.0, 0.05});
    TrainConfig cfg;
    cfg.epochs = 6;
    cfg.seed = 7;
    classifier = train(dataset, cfg).first;
  }
};

const MiniArtifacts& artifacts() {
  static const MiniArtifacts a;
  return a;
}

ThrowQuery default_query(double target_height_rel) {
  ThrowQuery q;
  q.target = Vec3{2.0, 0.0, artifacts().model.base_height + target_height_rel};
  q.base_position = Vec3::Zero();
  return q;
}

bool same_config(const ThrowConfiguration& a, const ThrowConfiguration& b) {
  return (a.q.array() == b.q.array()).all() && (a.qd.array() == b.qd.array()).all() &&
         a.phi == b.phi && a.gamma == b.gamma && a.x.r == b.x.r && a.x.z == b.x.z &&
         a.x.rd == b.x.rd && a.x.zd == b.x.zd;
}

}  // namespace

TEST_SUITE_BEGIN("throw_planner");

TEST_CASE("matching respects the strict speed inequality") {
  VelocityHedgehog hh;
  hh.grids.z = {0.4, 0.5, 0.6};
  hh.grids.phi = {0.0};
  hh.grids.gamma = {M_PI / 4.0};
  hh.max_speed.assign(3, 0.0);
  hh.q_at.assign(3, JointVector::Zero());
  hh.capped.assign(3, 0);
  hh.max_speed[hh.index(1, 0, 0)] = 2.0;

  const double c = std::sqrt(0.5);
  const std::vector<FlyingState> states{
      FlyingState{-0.5, 0.5, 1.0 * c, 1.0 * c},  // speed 1.0 -> guess
      FlyingState{-0.5, 0.5, 2.0 * c, 2.0 * c},  // speed 2.0 -> boundary, dropped
      FlyingState{-0.5, 0.5, 3.0 * c, 3.0 * c},  // speed 3.0 -> dropped
  };
  const auto guesses = match_candidates(hh, states, 0.0);
  REQUIRE(guesses.size() == 1);
  CHECK(guesses[0].x.rd == states[0].rd);
  CHECK(guesses[0].cell.iz == 1);
  CHECK(guesses[0].cell_max_speed == 2.0);

  VelocityHedgehog broken = hh;
  broken.max_speed.pop_back();
  CHECK_THROWS_AS(match_candidates(broken, states, 0.0), GridMismatch);
}

TEST_CASE("matching shifts height bins by the target offset") {
  VelocityHedgehog hh;
  hh.grids.z = {0.4, 0.5, 0.6};
  hh.grids.phi = {0.0};
  hh.grids.gamma = {M_PI / 4.0};
  hh.max_speed.assign(3, 1.5);
  hh.q_at.assign(3, JointVector::Zero());
  hh.capped.assign(3, 0);

  const double c = std::sqrt(0.5);
  const std::vector<FlyingState> states{FlyingState{-0.5, 0.38, c, c}};
  // Height 0.38 + offset 0.12 bins to the middle cell only.
  const auto guesses = match_candidates(hh, states, 0.12);
  REQUIRE(guesses.size() == 1);
  CHECK(guesses[0].cell.iz == 1);

  // Without the offset the same state bins to the bottom cell.
  const auto unshifted = match_candidates(hh, states, 0.0);
  REQUIRE(unshifted.size() == 1);
  CHECK(unshifted[0].cell.iz == 0);

  // Far outside every bin: no guesses.
  CHECK(match_candidates(hh, states, 5.0).empty());
}

TEST_CASE("assemble: hand-computed planar triangle") {
  ArmModel planar = testing::two_link_planar();
  planar.limits.qd_max.setConstant(5.0);
  planar.limits.qd_min = -planar.limits.qd_max;

  CandidateGuess guess;
  guess.q = JointVector::Zero();  // stretched along +X, AE = (2, 0, 0)
  guess.phi = 0.0;
  guess.x = FlyingState{-1.0, 0.3, 1.0, 1.905};
  guess.cell_max_speed = 10.0;
  guess.gamma_lo = 0.0;
  guess.gamma_hi = M_PI / 2.0;

  ThrowQuery query;
  query.target = Vec3{3.0, 0.0, -0.3};
  query.base_position = Vec3::Zero();

  const ThrowConfiguration cfg = assemble_throw(planar, guess, query);
  CHECK((cfg.target - cfg.base_placement).head<2>().norm() == doctest::Approx(3.0));
  CHECK(cfg.release_point.x() == doctest::Approx(2.0));
  CHECK(cfg.release_point.z() == doctest::Approx(0.0));
  CHECK(cfg.base_placement.norm() == doctest::Approx(0.0));
  CHECK(cfg.target.z() - cfg.release_point.z() == doctest::Approx(-0.3));
  CHECK(cfg.x.z == doctest::Approx(0.3));
  CHECK(cfg.velocity.z() == doctest::Approx(1.905));
  CHECK(cfg.velocity.z() > 0.0);  // zd sign propagates

  // Triangle identity: AB = AE + EB.
  const Vec3 ab = cfg.target - cfg.base_placement;
  const Vec3 ae = cfg.release_point - cfg.base_placement;
  const Vec3 eb = cfg.target - cfg.release_point;
  CHECK((ab - ae - eb).cwiseAbs().maxCoeff() < 1e-12);

  CandidateGuess degenerate = guess;
  degenerate.x.r = -1e-9;
  CHECK_THROWS_AS(assemble_throw(planar, degenerate, query), DegenerateTriangle);
}

TEST_CASE("assemble is exactly equivariant under incident rotation") {
  const auto& a = artifacts();
  const auto guesses = match_candidates(a.hedgehog, a.brt, 0.0);
  REQUIRE(!guesses.empty());

  ThrowQuery query = default_query(0.0);
  query.incident = Eigen::Vector2d(1.0, 0.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  int tested = 0;
  for (std::size_t gi = 0; gi < guesses.size() && tested < 20; gi += guesses.size() / 20) {
    const ThrowConfiguration base = assemble_throw(a.model, guesses[gi], query);
    const double theta = angle(rng);
    ThrowQuery rotated = query;
    rotated.incident = Eigen::Rotation2Dd(theta) * (*query.incident);
    const ThrowConfiguration rot = assemble_throw(a.model, guesses[gi], rotated);

    CHECK(same_config(base, rot));

    const Eigen::Rotation2Dd R(theta);
    const Eigen::Vector2d a_rel = R * (base.base_placement - base.target).head<2>();
    CHECK((rot.base_placement.head<2>() - (rot.target.head<2>() + a_rel)).norm() < 1e-9);
    CHECK(rot.base_placement.z() == doctest::Approx(base.base_placement.z()));
    const Eigen::Vector2d v_rel = R * base.velocity.head<2>();
    CHECK((rot.velocity.head<2>() - v_rel).norm() < 1e-9);
    CHECK(rot.velocity.z() == base.velocity.z());
    ++tested;
  }
  CHECK(tested >= 10);
}

TEST_CASE("verify: slacks from construction, doubled velocity violates") {
  const auto& a = artifacts();

  // Synthetic guess exactly at a populated cell grid point.
  const HedgehogGrids& grids = a.hedgehog.grids;
  CandidateGuess guess;
  bool found = false;
  for (std::size_t iz = 0; iz < grids.z.size() && !found; ++iz) {
    for (std::size_t ip = 0; ip < grids.phi.size() && !found; ++ip) {
      for (std::size_t ig = 0; ig < grids.gamma.size() && !found; ++ig) {
        const std::size_t cell =
            a.hedgehog.index(static_cast<int>(iz), static_cast<int>(ip), static_cast<int>(ig));
        if (a.hedgehog.max_speed[cell] < 1.0 || a.hedgehog.capped[cell]) continue;
        const double gamma = grids.gamma[ig];
        const double speed = 0.9 * a.hedgehog.max_speed[cell];
        guess.q = a.hedgehog.q_at[cell];
        guess.phi = grids.phi[ip];
        guess.x = FlyingState{-0.5, grids.z[iz], speed * std::cos(gamma),
                              speed * std::sin(gamma)};
        guess.cell = CellIndex{static_cast<int>(iz), static_cast<int>(ip),
                               static_cast<int>(ig)};
        guess.cell_max_speed = a.hedgehog.max_speed[cell];
        guess.gamma_lo = gamma - 0.05;
        guess.gamma_hi = gamma + 0.05;
        found = true;
      }
    }
  }
  REQUIRE(found);

  const ThrowConfiguration cfg = assemble_throw(a.model, guess, default_query(0.0));
  const ConstraintMargins margins = verify(a.model, cfg, a.classifier);
  CHECK(margins.velocity.minCoeff() >= 0.0);
  CHECK(margins.position.minCoeff() >= 0.0);

  // Doubling the throwing velocity must break at least one velocity bound:
  // the stored cell speed has an active constraint and 1.8x exceeds it.
  ThrowConfiguration doubled = cfg;
  doubled.qd *= 2.0;
  const ConstraintMargins m2 = verify(a.model, doubled, a.classifier);
  CHECK(m2.velocity.minCoeff() < 0.0);

  // A state far outside the tube has negative BRT slack.
  ThrowConfiguration outside = cfg;
  outside.x = FlyingState{-1.0, 0.0, 4.9, 4.9};
  const ConstraintMargins m3 = verify(a.model, outside, a.classifier);
  CHECK(m3.brt < 0.0);
}

TEST_CASE("refine: identity at zero steps and monotone minimum slack") {
  const auto& a = artifacts();
  const auto guesses = match_candidates(a.hedgehog, a.brt, 0.0);
  REQUIRE(!guesses.empty());
  const ThrowQuery query = default_query(0.0);

  int refined = 0;
  for (std::size_t gi = 0; gi < guesses.size() && refined < 20;
       gi += std::max<std::size_t>(1, guesses.size() / 40)) {
    ThrowConfiguration cfg;
    try {
      cfg = assemble_throw(a.model, guesses[gi], query);
    } catch (const Error&) {
      continue;
    }
    cfg.margins = verify(a.model, cfg, a.classifier);

    const ThrowConfiguration same = refine(a.model, cfg, a.classifier, 0);
    CHECK(same_config(cfg, same));

    const ThrowConfiguration better = refine(a.model, cfg, a.classifier, 8);
    CHECK(better.margins.min_slack() >= cfg.margins.min_slack());
    ++refined;
  }
  CHECK(refined >= 10);
}

TEST_CASE("plan: feasibility, landing validity, determinism, limit") {
  const auto& a = artifacts();
  const ThrowQuery query = default_query(0.0);
  const auto plans = plan(a.model, a.hedgehog, a.brt, a.classifier, query, 200);
  REQUIRE(!plans.empty());
  CHECK(plans.size() <= 200);

  for (const ThrowConfiguration& cfg : plans) {
    // Re-check feasibility independently of the pipeline internals.
    const ConstraintMargins m = verify(a.model, cfg, a.classifier);
    CHECK(m.min_slack() >= 0.0);

    // Triangle identities.
    const Vec3 ab = cfg.target - cfg.base_placement;
    const Vec3 ae = cfg.release_point - cfg.base_placement;
    const Vec3 eb = cfg.target - cfg.release_point;
    CHECK((ab - ae - eb).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(eb.head<2>().norm() == doctest::Approx(-cfg.x.r).epsilon(1e-9));
    CHECK(cfg.velocity.norm() == doctest::Approx(cfg.x.speed()).epsilon(1e-9));

    // Landing validity, recomputed in closed form: the flight reaches the
    // slack-widened target set (height rebinding shifts crossings slightly).
    const double g = a.params.g;
    const double t_cross =
        (cfg.x.zd + std::sqrt(cfg.x.zd * cfg.x.zd + 2.0 * g * cfg.x.z)) / g;
    CHECK(t_cross >= 0.0);
    CHECK(std::abs(cfg.x.r + cfg.x.rd * t_cross) <= 0.055);
    CHECK(cfg.x.rd >= a.target_set.rd_range.low);
    CHECK(cfg.x.rd <= a.target_set.rd_range.high);
    const double zd_cross = cfg.x.zd - g * t_cross;
    CHECK(zd_cross <= a.target_set.zd_range.high + 0.26);
    CHECK(zd_cross >= a.target_set.zd_range.low - 0.26);
  }

  const auto again = plan(a.model, a.hedgehog, a.brt, a.classifier, query, 200);
  REQUIRE(again.size() == plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    CHECK(same_config(plans[i], again[i]));
  }

  const auto one = plan(a.model, a.hedgehog, a.brt, a.classifier, query, 1);
  CHECK(one.size() == 1);
  CHECK(same_config(one[0], plans[0]));

  // An unreachable target yields NoSolution.
  CHECK_THROWS_AS(plan(a.model, a.hedgehog, a.brt, a.classifier, default_query(5.0), 10),
                  NoSolution);
}

TEST_CASE("select_time_optimal picks the nearest-in-time candidate") {
  const auto& a = artifacts();
  const auto plans = plan(a.model, a.hedgehog, a.brt, a.classifier, default_query(0.0), 50);
  REQUIRE(plans.size() >= 2);

  const KinematicBounds bounds = KinematicBounds::defaults_for(a.model);
  const TrajectoryPlanner traj_gen = [&](const BoundaryState& from, const BoundaryState& to) {
    return plan_trajectory(from, to, bounds);
  };

  // A candidate equal to the current state has duration zero and wins.
  BoundaryState current{plans[3].q, plans[3].qd};
  const auto [index, traj] = select_time_optimal(plans, current, traj_gen);
  CHECK(index == 3);
  CHECK(traj.duration == 0.0);

  // Argmin contract from the home state.
  const auto [best, best_traj] = select_time_optimal(plans, default_home(), traj_gen);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const JointTrajectory t = traj_gen(default_home(), BoundaryState{plans[i].q, plans[i].qd});
    CHECK(best_traj.duration <= t.duration + 1e-12);
  }
  (void)best;

  const std::vector<ThrowConfiguration> single{plans[0]};
  CHECK(select_time_optimal(single, default_home(), traj_gen).first == 0);

  CHECK_THROWS_AS(select_time_optimal({}, default_home(), traj_gen), EmptyInput);
}

TEST_CASE("adaptive_replan: zero-sample fallback and winner contract") {
  const auto& a = artifacts();
  const ThrowQuery query = default_query(0.0);
  const auto plans = plan(a.model, a.hedgehog, a.brt, a.classifier, query, 100);
  const auto cached = match_candidates(a.hedgehog, a.brt, 0.0);
  REQUIRE(!plans.empty());
  REQUIRE(!cached.empty());

  const KinematicBounds bounds = KinematicBounds::defaults_for(a.model);
  const TrajectoryPlanner traj_gen = [&](const BoundaryState& from, const BoundaryState& to) {
    return plan_trajectory(from, to, bounds);
  };

  const BoundaryState disturbed = default_home();

  const AdaptiveComparison zero =
      adaptive_replan(a.model, disturbed, plans[0], cached, 0, a.classifier, query, traj_gen);
  CHECK(zero.winner == 'a');
  CHECK(zero.replan.trajectory_seconds == zero.recalc.trajectory_seconds);

  const AdaptiveComparison cmp =
      adaptive_replan(a.model, disturbed, plans[0], cached, 50, a.classifier, query, traj_gen);
  CHECK(cmp.recalc.available);
  CHECK(cmp.replan.available);
  if (cmp.winner == 'b') {
    CHECK(cmp.replan.total_seconds() <= cmp.recalc.total_seconds());
  } else {
    CHECK(cmp.recalc.total_seconds() <= cmp.replan.total_seconds());
  }
}

TEST_CASE("plan JSON round trip") {
  const auto& a = artifacts();
  const ThrowQuery query = default_query(0.0);
  const auto plans = plan(a.model, a.hedgehog, a.brt, a.classifier, query, 5);

  const std::string path = (std::filesystem::temp_directory_path() / "tk_plan.json").string();
  save_plan(plans, query, path);
  ThrowQuery loaded_query;
  const auto loaded = load_plan(path, &loaded_query);
  REQUIRE(loaded.size() == plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    CHECK(same_config(plans[i], loaded[i]));
    CHECK((plans[i].base_placement - loaded[i].base_placement).cwiseAbs().maxCoeff() == 0.0);
    CHECK(plans[i].margins.brt == loaded[i].margins.brt);
  }
  CHECK((loaded_query.target - query.target).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_SUITE_END();
