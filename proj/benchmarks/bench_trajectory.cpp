#include <benchmark/benchmark.h>

#include <random>

#include "throwkit/trajectory_gen.hpp"

using namespace throwkit;

static void PlanSingleJoint(benchmark::State& state) {
  const ScalarBounds b{2.175, 15.0, 7500.0};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> vel(-2.0, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan_single(pos(rng), vel(rng), pos(rng), vel(rng), b));
  }
}
BENCHMARK(PlanSingleJoint);

static void PlanSynchronizedTrajectory(benchmark::State& state) {
  KinematicBounds bounds;
  bounds.v_max.setConstant(2.175);
  bounds.a_max.setConstant(15.0);
  bounds.j_max.setConstant(7500.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> vel(-2.0, 2.0);
  for (auto _ : state) {
    BoundaryState b0, b1;
    for (int i = 0; i < kJointCount; ++i) {
      b0.q[i] = pos(rng);
      b1.q[i] = pos(rng);
      b0.qd[i] = vel(rng);
      b1.qd[i] = vel(rng);
    }
    benchmark::DoNotOptimize(plan_trajectory(b0, b1, bounds));
  }
}
BENCHMARK(PlanSynchronizedTrajectory);

static void SampleTrajectory(benchmark::State& state) {
  KinematicBounds bounds;
  bounds.v_max.setConstant(2.175);
  bounds.a_max.setConstant(15.0);
  bounds.j_max.setConstant(7500.0);
  BoundaryState b0, b1;
  b0.q.setZero();
  b0.qd.setZero();
  b1.q.setConstant(1.0);
  b1.qd.setConstant(0.5);
  const JointTrajectory traj = plan_trajectory(b0, b1, bounds);
  double t = 0.0;
  JointVector q, qd, qdd;
  for (auto _ : state) {
    t += 1e-3;
    if (t > traj.duration) t = 0.0;
    traj.sample(t, q, qd, qdd);
    benchmark::DoNotOptimize(q);
  }
}
BENCHMARK(SampleTrajectory);
