#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "throwkit/flight_dynamics.hpp"

using namespace throwkit;

namespace {

const FlightParams kParams{9.81};

FlyingState random_landing(std::mt19937_64& rng, const LandingTargetSet& set) {
  std::uniform_real_distribution<double> rd(set.rd_range.low, set.rd_range.high);
  std::uniform_real_distribution<double> zd(set.zd_range.low, set.zd_range.high);
  return FlyingState{0.0, 0.0, rd(rng), zd(rng)};
}

}  // namespace

TEST_SUITE_BEGIN("flight_dynamics");

TEST_CASE("projectile derivative") {
  const FlyingState d = dynamics(FlyingState{0.0, 0.0, 1.0, -3.0}, kParams);
  CHECK(d.r == 1.0);
  CHECK(d.z == -3.0);
  CHECK(d.rd == 0.0);
  CHECK(d.zd == -9.81);

  const FlyingState rest = dynamics(FlyingState{0.3, -0.2, 0.0, 0.0}, kParams);
  CHECK(rest.r == 0.0);
  CHECK(rest.z == 0.0);
  CHECK(rest.zd == -9.81);

  // Translation invariance: the derivative ignores r and z.
  const FlyingState a = dynamics(FlyingState{0.0, 0.0, 1.2, -0.7}, kParams);
  const FlyingState b = dynamics(FlyingState{5.0, -2.0, 1.2, -0.7}, kParams);
  CHECK(a.r == b.r);
  CHECK(a.z == b.z);
  CHECK(a.rd == b.rd);
  CHECK(a.zd == b.zd);
}

TEST_CASE("backward state closed form") {
  const FlyingState landing{0.0, 0.0, 1.0, -3.0};
  const FlyingState x = backward_state(landing, 0.5, kParams);
  CHECK(x.r == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(x.z == doctest::Approx(0.27375).epsilon(1e-12));
  CHECK(x.rd == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x.zd == doctest::Approx(1.905).epsilon(1e-12));

  const FlyingState same = backward_state(landing, 0.0, kParams);
  CHECK(same.r == landing.r);
  CHECK(same.z == landing.z);
  CHECK(same.zd == landing.zd);
}

TEST_CASE("integrate_backward round trips through forward_state") {
  const FlyingState landing{0.0, 0.0, 1.4, -2.5};
  const FlightTrajectory traj = integrate_backward(landing, 1.0, 0.025, kParams);
  CHECK(traj.size() == 40);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    CHECK(traj[i].t > traj[i - 1].t);
  }
  for (const TimedState& ts : traj) {
    const FlyingState back = forward_state(ts.x, -ts.t, kParams);
    CHECK(std::abs(back.r - landing.r) < 1e-9);
    CHECK(std::abs(back.z - landing.z) < 1e-9);
    CHECK(std::abs(back.rd - landing.rd) < 1e-9);
    CHECK(std::abs(back.zd - landing.zd) < 1e-9);
  }

  CHECK_THROWS_AS(integrate_backward(landing, -1.0, 0.025, kParams), InvalidHorizon);
  CHECK_THROWS_AS(integrate_backward(landing, 1.0, 0.0, kParams), InvalidHorizon);
}

TEST_CASE("round trip over 1000 random landing states") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> tau_dist(1e-3, 1.0);
  const LandingTargetSet set;
  for (int i = 0; i < 1000; ++i) {
    const FlyingState landing = random_landing(rng, set);
    const double tau = tau_dist(rng);
    const FlyingState back = backward_state(landing, tau, kParams);
    const FlyingState fwd = forward_state(back, tau, kParams);
    CHECK(std::abs(fwd.r - landing.r) < 1e-9);
    CHECK(std::abs(fwd.z - landing.z) < 1e-9);
    CHECK(std::abs(fwd.rd - landing.rd) < 1e-9);
    CHECK(std::abs(fwd.zd - landing.zd) < 1e-9);
  }
}

TEST_CASE("RK4 integration matches the projectile closed form") {
  const DynamicsFn f = [](const FlyingState& x) { return dynamics(x, kParams); };
  const FlyingState landing{0.0, 0.0, 0.8, -4.0};
  for (double dt : {0.05, 0.025, 0.01}) {
    const FlightTrajectory rk = integrate_backward_rk4(f, landing, 1.0, dt);
    const FlightTrajectory exact = integrate_backward(landing, 1.0, dt, kParams);
    REQUIRE(rk.size() == exact.size());
    for (std::size_t i = 0; i < rk.size(); ++i) {
      CHECK(std::abs(rk[i].x.r - exact[i].x.r) < 1e-9);
      CHECK(std::abs(rk[i].x.z - exact[i].x.z) < 1e-9);
      CHECK(std::abs(rk[i].x.rd - exact[i].x.rd) < 1e-9);
      CHECK(std::abs(rk[i].x.zd - exact[i].x.zd) < 1e-9);
    }
  }
}

TEST_CASE("energy identity along backward trajectories") {
  std::mt19937_64 rng(5);
  const LandingTargetSet set;
  for (int i = 0; i < 20; ++i) {
    const FlyingState landing = random_landing(rng, set);
    const double e0 = 0.5 * landing.speed() * landing.speed() + kParams.g * landing.z;
    for (const TimedState& ts : integrate_backward(landing, 1.0, 0.05, kParams)) {
      const double e = 0.5 * ts.x.speed() * ts.x.speed() + kParams.g * ts.x.z;
      CHECK(std::abs(e - e0) < 1e-9);
    }
  }
}

TEST_CASE("landing-state sampling: midpoint convention and exact counts") {
  const LandingTargetSet set;
  const auto single = sample_landing_states(set, 1, 0);
  REQUIRE(single.size() == 1);
  CHECK(single[0].rd == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(single[0].zd == doctest::Approx(-3.5).epsilon(1e-12));
  CHECK(single[0].r == 0.0);
  CHECK(single[0].z == 0.0);

  const auto grid = sample_landing_states(set, 2160, 0);
  CHECK(grid.size() == 2160);
  std::set<std::pair<double, double>> distinct;
  for (const FlyingState& x : grid) {
    CHECK(set.contains(x));
    distinct.insert({x.rd, x.zd});
  }
  CHECK(distinct.size() == 2160);
}

TEST_CASE("membership oracle basics") {
  const LandingTargetSet set;

  // Free fall with no horizontal motion never reaches the target set.
  CHECK(!membership_oracle(FlyingState{-1.0, 0.5, 0.0, 0.0}, set, 1.0, 0.025, kParams));

  // A landing state is a member at t = 0.
  CHECK(membership_oracle(FlyingState{0.0, 0.0, 1.0, -3.0}, set, 1.0, 0.025, kParams));

  // Backward-integrated states are members by construction.
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    const FlyingState landing = random_landing(rng, set);
    std::uniform_real_distribution<double> tau_dist(0.01, 0.9);
    const FlyingState x = backward_state(landing, tau_dist(rng), kParams);
    CHECK(membership_oracle(x, set, 1.0, 0.025, kParams));
  }
}

TEST_CASE("positive generation: membership, caps, determinism") {
  const LandingTargetSet set;
  const auto pos = generate_brt_data(set, 100, 1.0, 0.025, 5.0, kParams, 1);
  CHECK(pos.size() > 1000);
  for (const FlyingState& x : pos) {
    CHECK(std::abs(x.rd) <= 5.0);
    CHECK(std::abs(x.zd) <= 5.0);
    CHECK(x.r <= 0.0);
  }
  for (std::size_t i = 0; i < pos.size(); i += 97) {
    CHECK(membership_oracle(pos[i], set, 1.0, 0.025, kParams));
  }

  const auto again = generate_brt_data(set, 100, 1.0, 0.025, 5.0, kParams, 1);
  REQUIRE(again.size() == pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    CHECK(again[i].r == pos[i].r);
    CHECK(again[i].z == pos[i].z);
    CHECK(again[i].rd == pos[i].rd);
    CHECK(again[i].zd == pos[i].zd);
  }
}

TEST_CASE("negative generation: all states fail the membership oracle") {
  const LandingTargetSet set;
  CHECK(!set.rd_range.contains(3.0));  // above the 2.0 cap, outside X_l

  const auto neg = generate_negative_data(set, 100, 1.0, 0.025, 5.0, kParams, 2);
  CHECK(neg.size() > 500);
  for (const FlyingState& x : neg) {
    CHECK(std::abs(x.rd) <= 5.0);
    CHECK(std::abs(x.zd) <= 5.0);
  }
  for (std::size_t i = 0; i < neg.size(); i += 23) {
    CHECK(!membership_oracle(neg[i], set, 1.0, 0.025, kParams));
  }
}

TEST_CASE("augmentation: identity, cardinality, widened membership") {
  const LandingTargetSet set;
  const auto pos = generate_brt_data(set, 20, 1.0, 0.05, 5.0, kParams, 3);
  const auto neg = generate_negative_data(set, 20, 1.0, 0.05, 5.0, kParams, 3);

  const BrtDataset identity = augment_dataset(pos, neg, {0.0}, {0.0});
  CHECK(identity.positives.size() == pos.size());
  CHECK(identity.negatives.size() == neg.size());

  const std::vector<double> shifts{-0.05, 0.0, 0.05};
  const BrtDataset aug = augment_dataset(pos, neg, shifts, shifts);
  CHECK(aug.positives.size() == 9 * pos.size());
  CHECK(aug.negatives.size() == 9 * neg.size());

  // Shifted positives stay members of the slack-widened target set.
  LandingTargetSet widened = set;
  widened.r_slack = 0.05;
  widened.z_slack = 0.05;
  for (std::size_t i = 0; i < aug.positives.size(); i += 53) {
    CHECK(membership_oracle(aug.positives[i], widened, 1.0, 0.025, kParams));
  }

  CHECK_THROWS_AS(augment_dataset(pos, neg, {0.1}, {0.0}), ConfigError);
}

TEST_CASE("default-scale generation counts match the expected order") {
  const LandingTargetSet set;
  const auto pos = generate_brt_data(set, kDefaultLandingCount, kDefaultHorizon, kDefaultDt,
                                     kDefaultVelocityCap, kParams, 7);
  CHECK(pos.size() >= 50000);
  CHECK(pos.size() <= 120000);

  const auto neg = generate_negative_data(set, kDefaultLandingCount, kDefaultHorizon,
                                          kDefaultDt, kDefaultVelocityCap, kParams, 7);
  CHECK(neg.size() >= 50000);

  const auto neg_again = generate_negative_data(set, kDefaultLandingCount, kDefaultHorizon,
                                                kDefaultDt, kDefaultVelocityCap, kParams, 7);
  REQUIRE(neg_again.size() == neg.size());
  for (std::size_t i = 0; i < neg.size(); i += 31) {
    CHECK(neg_again[i].r == neg[i].r);
    CHECK(neg_again[i].zd == neg[i].zd);
  }
}

TEST_CASE("dataset CSV round trip is exact") {
  const LandingTargetSet set;
  BrtDataset dataset = augment_dataset(generate_brt_data(set, 10, 1.0, 0.05, 5.0, kParams, 4),
                                       generate_negative_data(set, 10, 1.0, 0.05, 5.0, kParams, 4),
                                       {0.0}, {0.0});
  dataset.meta.seed = 4;
  dataset.meta.n_landing = 10;
  dataset.meta.target = set;

  const std::string path =
      (std::filesystem::temp_directory_path() / "tk_dataset.csv").string();
  save_brt_dataset(dataset, path);
  const BrtDataset loaded = load_brt_dataset(path);
  REQUIRE(loaded.positives.size() == dataset.positives.size());
  REQUIRE(loaded.negatives.size() == dataset.negatives.size());
  for (std::size_t i = 0; i < loaded.positives.size(); ++i) {
    CHECK(loaded.positives[i].r == dataset.positives[i].r);
    CHECK(loaded.positives[i].z == dataset.positives[i].z);
    CHECK(loaded.positives[i].rd == dataset.positives[i].rd);
    CHECK(loaded.positives[i].zd == dataset.positives[i].zd);
  }
  CHECK(loaded.meta.seed == 4);
  CHECK(loaded.meta.n_landing == 10);
  CHECK(loaded.meta.target.rd_range.low == set.rd_range.low);
  std::filesystem::remove(path);
  std::filesystem::remove(dataset_sidecar_path(path));
}

TEST_SUITE_END();
