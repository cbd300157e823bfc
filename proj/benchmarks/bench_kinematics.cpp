#include <benchmark/benchmark.h>

#include <random>

#include "throwkit/arm_kinematics.hpp"

using namespace throwkit;

namespace {

JointVector random_q(std::mt19937_64& rng, const ArmModel& m) {
  JointVector q;
  for (int i = 0; i < kJointCount; ++i) {
    std::uniform_real_distribution<double> d(m.limits.q_min[i], m.limits.q_max[i]);
    q[i] = d(rng);
  }
  return q;
}

}  // namespace

static void ForwardPosition(benchmark::State& state) {
  const ArmModel m = ArmModel::panda();
  std::mt19937_64 rng(1);
  const JointVector q = random_q(rng, m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_position(m, q));
  }
}
BENCHMARK(ForwardPosition);

static void PositionAndJacobian(benchmark::State& state) {
  const ArmModel m = ArmModel::panda();
  std::mt19937_64 rng(2);
  const JointVector q = random_q(rng, m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(point_kinematics(m, q));
  }
}
BENCHMARK(PositionAndJacobian);

static void Pseudoinverse(benchmark::State& state) {
  const ArmModel m = ArmModel::panda();
  std::mt19937_64 rng(3);
  const Matrix3x7 J = jacobian_position(m, random_q(rng, m));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pseudoinverse(J));
  }
}
BENCHMARK(Pseudoinverse);

static void MaxSingularXY(benchmark::State& state) {
  const ArmModel m = ArmModel::panda();
  std::mt19937_64 rng(4);
  const Matrix2x7 J = xy_jacobian(m, random_q(rng, m));
  for (auto _ : state) {
    benchmark::DoNotOptimize(max_singular(J));
  }
}
BENCHMARK(MaxSingularXY);
