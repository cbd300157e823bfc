#include <benchmark/benchmark.h>

#include "throwkit/ballistic_sim.hpp"
#include "throwkit/throw_planner.hpp"

using namespace throwkit;

namespace {

// Desk-scale artifacts shared across pipeline benchmarks.
const PlannerContext& context() {
  static const PlannerContext ctx = [] {
    PlannerContext c;
    c.model = ArmModel::panda();
    c.hedgehog = build_hedgehog(
        c.model, sample_configurations(c.model, 50000, 1, kDefaultSigmaMin),
        HedgehogGrids::defaults());
    const LandingTargetSet set;
    const FlightParams params{};
    c.brt_positives =
        generate_brt_data(set, kDefaultLandingCount, 1.0, 0.025, 5.0, params, 1);
    const auto neg =
        generate_negative_data(set, kDefaultLandingCount, 1.0, 0.025, 5.0, params, 1);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 1;
    c.classifier = train(augment_dataset(c.brt_positives, neg, {0.0}, {0.0}), cfg).first;
    c.bounds = KinematicBounds::defaults_for(c.model);
    return c;
  }();
  return ctx;
}

ThrowQuery query_at(double height) {
  ThrowQuery q;
  q.target = Vec3{2.0, 0.0, context().model.base_height + height};
  q.base_position = Vec3::Zero();
  return q;
}

}  // namespace

static void MatchCandidates(benchmark::State& state) {
  const auto& ctx = context();
  for (auto _ : state) {
    benchmark::DoNotOptimize(match_candidates(ctx.hedgehog, ctx.brt_positives, 0.0));
  }
}
BENCHMARK(MatchCandidates)->Unit(benchmark::kMillisecond);

static void AssembleAndVerify(benchmark::State& state) {
  const auto& ctx = context();
  const auto guesses = match_candidates(ctx.hedgehog, ctx.brt_positives, 0.0);
  const ThrowQuery query = query_at(0.0);
  std::size_t i = 0;
  for (auto _ : state) {
    const CandidateGuess& g = guesses[i++ % guesses.size()];
    ThrowConfiguration cfg = assemble_throw(ctx.model, g, query);
    benchmark::DoNotOptimize(verify(ctx.model, cfg, ctx.classifier));
  }
}
BENCHMARK(AssembleAndVerify);

static void PlanQuery(benchmark::State& state) {
  const auto& ctx = context();
  const ThrowQuery query = query_at(0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        plan(ctx.model, ctx.hedgehog, ctx.brt_positives, ctx.classifier, query,
             static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(PlanQuery)->Arg(16)->Arg(256)->Unit(benchmark::kMillisecond);

static void FlightSimulation(benchmark::State& state) {
  SimConfig sim;
  ReleaseState release;
  release.position = Vec3{-1.0, 0.0, 0.8};
  release.velocity = Vec3{1.5, 0.0, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_flight(release, Vec3::Zero(), sim));
  }
}
BENCHMARK(FlightSimulation);
