// Command-line front end wiring the offline artifact builds (velocity
// hedgehog, BRT dataset, classifier) and the online pipeline (plan,
// simulate, benchmarks, adaptive throwing) together.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "throwkit/ballistic_sim.hpp"
#include "throwkit/io_util.hpp"
#include "throwkit/project_config.hpp"
#include "throwkit/throw_planner.hpp"
#include "throwkit/version.hpp"

namespace {

using namespace throwkit;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitWrite = 3;
constexpr int kExitNoSolution = 4;

struct GlobalOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;

  ProjectConfig project() const {
    ProjectConfig cfg;
    if (!config_path.empty()) {
      cfg = ProjectConfig::load(config_path);
    }
    if (seed_set) {
      cfg.seed = seed;
    } else if (const char* env = std::getenv("THROWKIT_SEED")) {
      cfg.seed = std::strtoull(env, nullptr, 10);
    }
    return cfg;
  }
};

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Vec3 parse_vec3(const std::string& csv) {
  Vec3 v;
  if (std::sscanf(csv.c_str(), "%lf,%lf,%lf", &v.x(), &v.y(), &v.z()) != 3) {
    throw ConfigError("expected x,y,z but got '" + csv + "'");
  }
  return v;
}

std::vector<double> parse_range(const std::string& spec) {
  double lo = 0.0, step = 0.0, hi = 0.0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) != 3 || step <= 0.0 ||
      hi < lo) {
    throw ConfigError("expected lo:step:hi but got '" + spec + "'");
  }
  std::vector<double> values;
  const int count = static_cast<int>(std::round((hi - lo) / step)) + 1;
  for (int i = 0; i < count; ++i) values.push_back(lo + i * step);
  return values;
}

PlannerContext load_context(const ProjectConfig& project, const std::string& hedgehog_path,
                            const std::string& brt_path, const std::string& model_path) {
  PlannerContext ctx;
  ctx.model = project.arm();
  ctx.hedgehog = load_hedgehog(hedgehog_path);
  ctx.brt_positives = load_brt_dataset(brt_path).positives;
  ctx.classifier = load_classifier(model_path);
  ctx.bounds = KinematicBounds::defaults_for(ctx.model);
  if (ctx.brt_positives.empty()) {
    throw ConfigError("BRT dataset " + brt_path + " holds no positive states");
  }
  return ctx;
}

int cmd_hedgehog_build(const GlobalOptions& global, long samples, bool paper_scale,
                       double sigma_min, const std::string& out) {
  const ProjectConfig project = global.project();
  const ArmModel model = project.arm();
  const HedgehogGrids grids = project.grids();
  if (paper_scale) samples = 1000000;
  if (samples <= 0) {
    throw ConfigError("--samples must be positive");
  }

  const double t0 = now_seconds();
  const auto configs =
      sample_configurations(model, static_cast<int>(samples), project.seed, sigma_min);
  VelocityHedgehog hedgehog = build_hedgehog(model, configs, grids);
  hedgehog.provenance.seed = project.seed;
  hedgehog.provenance.samples_requested = samples;
  hedgehog.provenance.sigma_min = sigma_min;
  save_hedgehog(hedgehog, out);
  const double dt = now_seconds() - t0;

  double top_speed = 0.0;
  for (double v : hedgehog.max_speed) top_speed = std::max(top_speed, v);
  std::printf("hedgehog: %ld samples (%lld retained), %zu/%zu cells populated\n", samples,
              static_cast<long long>(hedgehog.provenance.samples_retained),
              hedgehog.populated_cells(), hedgehog.cell_count());
  std::printf("hedgehog: top cell speed %.3f m/s, built in %.1f s -> %s\n", top_speed, dt,
              out.c_str());
  return kExitOk;
}

int cmd_brt_generate(const GlobalOptions& global, int landing, double horizon, double dt,
                     double v_cap, const std::string& out) {
  const ProjectConfig project = global.project();
  const LandingTargetSet set = project.target_set();
  const FlightParams params{};

  const double t0 = now_seconds();
  const auto positives =
      generate_brt_data(set, landing, horizon, dt, v_cap, params, project.seed);
  const auto negatives =
      generate_negative_data(set, landing, horizon, dt, v_cap, params, project.seed);
  BrtDataset dataset = augment_dataset(positives, negatives, {0.0}, {0.0});
  dataset.meta.seed = project.seed;
  dataset.meta.n_landing = landing;
  dataset.meta.horizon = horizon;
  dataset.meta.dt = dt;
  dataset.meta.v_cap = v_cap;
  dataset.meta.g = params.g;
  dataset.meta.target = set;
  save_brt_dataset(dataset, out);

  std::printf("brt: %zu positives, %zu negatives in %.2f s -> %s\n", dataset.positives.size(),
              dataset.negatives.size(), now_seconds() - t0, out.c_str());
  return kExitOk;
}

int cmd_brt_train(const GlobalOptions& global, const std::string& data_path,
                  const std::string& out, int epochs, int batch, double lr,
                  double train_fraction) {
  const ProjectConfig project = global.project();
  TrainFileConfig file_cfg = project.train();
  file_cfg.config.epochs = epochs;
  file_cfg.config.batch_size = batch;
  file_cfg.config.learning_rate = lr;
  file_cfg.config.train_fraction = train_fraction;
  file_cfg.config.seed = project.seed;

  const BrtDataset raw = load_brt_dataset(data_path);
  const BrtDataset dataset =
      augment_dataset(raw.positives, raw.negatives, file_cfg.shifts_r, file_cfg.shifts_z);

  const double t0 = now_seconds();
  const auto [model, metrics] = train(dataset, file_cfg.config);
  save_classifier(model, out);

  std::printf("train: %zu train / %zu test samples, %d epochs in %.1f s\n", metrics.train_count,
              metrics.test_count, epochs, now_seconds() - t0);
  std::printf("train: accuracy train %.4f test %.4f -> %s\n", metrics.train_accuracy,
              metrics.test_accuracy, out.c_str());
  return kExitOk;
}

int cmd_plan(const GlobalOptions& global, const std::string& hedgehog_path,
             const std::string& brt_path, const std::string& model_path,
             const std::string& target_csv, const std::string& base_csv, double incident_deg,
             bool incident_set, long limit, const std::string& out) {
  const ProjectConfig project = global.project();
  const PlannerContext ctx = load_context(project, hedgehog_path, brt_path, model_path);

  ThrowQuery query;
  query.target = parse_vec3(target_csv);
  query.base_position = parse_vec3(base_csv);
  if (incident_set) {
    const double rad = incident_deg * M_PI / 180.0;
    query.incident = Eigen::Vector2d(std::cos(rad), std::sin(rad));
  }

  PlanOptions options;
  options.landing_set = project.target_set();

  const double t0 = now_seconds();
  const auto plans = plan(ctx.model, ctx.hedgehog, ctx.brt_positives, ctx.classifier, query,
                          static_cast<std::size_t>(limit), options);
  const double elapsed = now_seconds() - t0;

  if (!out.empty()) {
    save_plan(plans, query, out);
  }
  std::printf("plan: %zu feasible configurations in %.1f ms (%.1f us/solution)\n", plans.size(),
              1e3 * elapsed, 1e6 * elapsed / static_cast<double>(plans.size()));
  for (std::size_t i = 0; i < std::min<std::size_t>(plans.size(), 5); ++i) {
    const ThrowConfiguration& c = plans[i];
    std::printf("  [%zu] range %.2f m, speed %.2f m/s, phi %+.0f deg, gamma %.0f deg, "
                "min slack %.3f\n",
                i, -c.x.r, c.x.speed(), c.phi * 180.0 / M_PI, c.gamma * 180.0 / M_PI,
                c.margins.min_slack());
  }
  return kExitOk;
}

int cmd_simulate(const GlobalOptions& global, const std::string& plan_path,
                 const std::string& out) {
  const ProjectConfig project = global.project();
  const ArmModel model = project.arm();
  const SimConfig sim = project.sim();
  const KinematicBounds bounds = KinematicBounds::defaults_for(model);

  ThrowQuery query;
  const auto plans = load_plan(plan_path, &query);
  if (plans.empty()) {
    throw ConfigError("plan file " + plan_path + " holds no configurations");
  }

  const BoundaryState home = default_home();
  long success = 0;
  nlohmann::json rows = nlohmann::json::array();
  for (const ThrowConfiguration& cfg : plans) {
    const JointTrajectory traj = plan_trajectory(home, BoundaryState{cfg.q, cfg.qd}, bounds);
    const ReleaseState release = execute_throw(traj, cfg, model);
    const SimResult res = simulate_flight(release, cfg.target, sim);
    if (res.success) ++success;
    rows.push_back({{"success", res.success},
                    {"miss", res.miss_distance},
                    {"flight_time", res.flight_time},
                    {"trajectory_duration", traj.duration}});
  }

  std::printf("simulate: %ld/%zu throws landed in the box\n", success, plans.size());
  if (!out.empty()) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["generator"] = kVersionString;
    j["plan"] = plan_path;
    j["succeeded"] = success;
    j["total"] = plans.size();
    j["throws"] = rows;
    atomic_write_file(out, j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_bench_latency(const GlobalOptions& global, const std::string& hedgehog_path,
                      const std::string& brt_path, const std::string& model_path, int queries,
                      const std::string& out) {
  const ProjectConfig project = global.project();
  const PlannerContext ctx = load_context(project, hedgehog_path, brt_path, model_path);

  const LatencyReport report = run_latency_benchmark(ctx, queries);
  std::printf("%-24s %14s\n", "Stage", "per solution");
  std::printf("%-24s %11.1f us\n", "Initial guess", report.initial_guess_us);
  std::printf("%-24s %11.1f us\n", "Full throwing config", report.full_config_us);
  std::printf("%-24s %11.1f us\n", "Trajectory generation", report.trajectory_us);
  std::printf("%-24s %11.1f us\n", "Overall", report.overall_us);
  std::printf("(%ld queries, %ld solutions)\n", report.queries, report.solutions);

  if (!out.empty()) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["generator"] = kVersionString;
    j["kind"] = "latency";
    j["queries"] = report.queries;
    j["solutions"] = report.solutions;
    j["per_solution_us"] = {{"initial_guess", report.initial_guess_us},
                            {"full_config", report.full_config_us},
                            {"trajectory", report.trajectory_us},
                            {"overall", report.overall_us}};
    atomic_write_file(out, j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_bench_success(const GlobalOptions& global, const std::string& hedgehog_path,
                      const std::string& brt_path, const std::string& model_path,
                      const std::string& heights_spec, long limit, const std::string& out) {
  const ProjectConfig project = global.project();
  const PlannerContext ctx = load_context(project, hedgehog_path, brt_path, model_path);
  const SimConfig sim = project.sim();

  const std::vector<double> heights = parse_range(heights_spec);
  const SuccessReport report =
      run_success_benchmark(ctx, heights, static_cast<std::size_t>(limit), sim);

  std::printf("%-10s %10s %10s\n", "height", "planned", "landed");
  for (const SuccessRow& row : report.rows) {
    std::printf("%+10.2f %10ld %10ld\n", row.height, row.planned, row.succeeded);
  }
  std::printf("total: %ld/%ld (%.2f%%)\n", report.total_succeeded, report.total_planned,
              100.0 * report.rate);

  if (!out.empty()) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["generator"] = kVersionString;
    j["kind"] = "success";
    j["total_planned"] = report.total_planned;
    j["total_succeeded"] = report.total_succeeded;
    j["rate"] = report.rate;
    for (const SuccessRow& row : report.rows) {
      j["rows"].push_back(
          {{"height", row.height}, {"planned", row.planned}, {"succeeded", row.succeeded}});
    }
    atomic_write_file(out, j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_adaptive(const GlobalOptions& global, const std::string& hedgehog_path,
                 const std::string& brt_path, const std::string& model_path,
                 const std::string& scenario_path, const std::string& out) {
  const ProjectConfig project = global.project();
  const PlannerContext ctx = load_context(project, hedgehog_path, brt_path, model_path);
  const SimConfig sim = project.sim();

  const DisturbanceScenario scenario = load_scenario(scenario_path);
  const AdaptiveReport report = run_adaptive_scenario(ctx, scenario, sim);

  const auto print_row = [](const char* name, const StrategyOutcome& s, bool success) {
    std::printf("%-4s %14.1f ms %16.0f ms %12.0f ms %10s\n", name,
                1e3 * s.computation_seconds, 1e3 * s.trajectory_seconds,
                1e3 * s.total_seconds(), success ? "landed" : "missed");
  };
  std::printf("%-4s %17s %19s %15s %10s\n", "", "computation", "trajectory", "total", "throw");
  print_row("(a)", report.comparison.recalc, report.recalc_flight.success);
  print_row("(b)", report.comparison.replan, report.replan_flight.success);
  std::printf("winner: (%c)\n", report.comparison.winner);

  if (!out.empty()) {
    const auto strategy_json = [](const StrategyOutcome& s, const SimResult& flight) {
      return nlohmann::json{{"computation_ms", 1e3 * s.computation_seconds},
                            {"trajectory_ms", 1e3 * s.trajectory_seconds},
                            {"total_ms", 1e3 * s.total_seconds()},
                            {"throw_success", flight.success}};
    };
    nlohmann::json j;
    j["schema_version"] = 1;
    j["generator"] = kVersionString;
    j["kind"] = "adaptive";
    j["disturbance_time"] = report.disturbance_time;
    j["original_duration"] = report.original_duration;
    j["recalculate"] = strategy_json(report.comparison.recalc, report.recalc_flight);
    j["replan"] = strategy_json(report.comparison.replan, report.replan_flight);
    j["winner"] = std::string(1, report.comparison.winner);
    atomic_write_file(out, j.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mobile-manipulator throwing planner"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "Project configuration JSON");
  app.add_option("--seed", global.seed, "Global seed (overrides THROWKIT_SEED)")
      ->each([&](const std::string&) { global.seed_set = true; });

  // hedgehog build
  auto* hedgehog = app.add_subcommand("hedgehog", "Velocity hedgehog artifacts");
  auto* hh_build = hedgehog->add_subcommand("build", "Build the capability map");
  long hh_samples = 100000;
  bool hh_paper_scale = false;
  double hh_sigma = kDefaultSigmaMin;
  std::string hh_out = "hedgehog.bin";
  hh_build->add_option("--samples", hh_samples, "Joint configuration samples");
  hh_build->add_flag("--paper-scale", hh_paper_scale, "Use 1,000,000 samples");
  hh_build->add_option("--sigma-min", hh_sigma, "Smallest-singular-value filter");
  hh_build->add_option("--out", hh_out, "Output .bin path (manifest at .json)");

  // brt generate / train
  auto* brt = app.add_subcommand("brt", "BRT dataset and classifier artifacts");
  auto* brt_gen = brt->add_subcommand("generate", "Generate the labeled flight-state dataset");
  int gen_landing = kDefaultLandingCount;
  double gen_horizon = kDefaultHorizon, gen_dt = kDefaultDt, gen_vcap = kDefaultVelocityCap;
  std::string gen_out = "brt_data.csv";
  brt_gen->add_option("--landing", gen_landing, "Landing states per class");
  brt_gen->add_option("--horizon", gen_horizon, "Backward horizon [s]");
  brt_gen->add_option("--dt", gen_dt, "Backward step [s]");
  brt_gen->add_option("--vcap", gen_vcap, "Velocity filter cap [m/s]");
  brt_gen->add_option("--out", gen_out, "Output CSV path (sidecar at .json)");

  auto* brt_train = brt->add_subcommand("train", "Train the level-set classifier");
  std::string train_data = "brt_data.csv", train_out = "brt_model.json";
  int train_epochs = 10, train_batch = 256;
  double train_lr = 1e-3, train_fraction = 0.7;
  brt_train->add_option("--data", train_data, "Dataset CSV from `brt generate`");
  brt_train->add_option("--out", train_out, "Output model JSON");
  brt_train->add_option("--epochs", train_epochs, "Training epochs");
  brt_train->add_option("--batch", train_batch, "Mini-batch size");
  brt_train->add_option("--lr", train_lr, "Adam learning rate");
  brt_train->add_option("--train-fraction", train_fraction, "Training split fraction");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Query throwing configurations");
  std::string plan_hh = "hedgehog.bin", plan_brt = "brt_data.csv",
              plan_model = "brt_model.json";
  std::string plan_target, plan_base = "0,0,0", plan_out;
  double plan_incident_deg = 0.0;
  long plan_limit = 100;
  plan_cmd->add_option("--hedgehog", plan_hh, "Hedgehog .bin artifact");
  plan_cmd->add_option("--brt", plan_brt, "BRT dataset CSV");
  plan_cmd->add_option("--model", plan_model, "Classifier JSON");
  plan_cmd->add_option("--target", plan_target, "Box-opening center x,y,z [m]")->required();
  plan_cmd->add_option("--base", plan_base, "Current base position x,y,z [m]");
  auto* incident_opt =
      plan_cmd->add_option("--incident-deg", plan_incident_deg, "Incident direction [deg]");
  plan_cmd->add_option("--limit", plan_limit, "Maximum configurations");
  plan_cmd->add_option("--out", plan_out, "Write the plan JSON here");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Execute and simulate a saved plan");
  std::string sim_plan, sim_out;
  sim_cmd->add_option("--plan", sim_plan, "Plan JSON from `plan --out`")->required();
  sim_cmd->add_option("--out", sim_out, "Write the simulation report here");

  // bench latency | success
  auto* bench = app.add_subcommand("bench", "Reproduce the timing and success studies");
  auto* bench_lat = bench->add_subcommand("latency", "Per-solution stage timings");
  std::string lat_hh = "hedgehog.bin", lat_brt = "brt_data.csv", lat_model = "brt_model.json",
              lat_out;
  int lat_queries = 16;
  bench_lat->add_option("--hedgehog", lat_hh, "Hedgehog .bin artifact");
  bench_lat->add_option("--brt", lat_brt, "BRT dataset CSV");
  bench_lat->add_option("--model", lat_model, "Classifier JSON");
  bench_lat->add_option("--queries", lat_queries, "Number of queries");
  bench_lat->add_option("--out", lat_out, "Write the JSON report here");

  auto* bench_suc = bench->add_subcommand("success", "Throw success-rate study");
  std::string suc_hh = "hedgehog.bin", suc_brt = "brt_data.csv", suc_model = "brt_model.json",
              suc_out;
  std::string suc_heights = "-1.2:0.1:0.9";
  long suc_limit = 500;
  bench_suc->add_option("--hedgehog", suc_hh, "Hedgehog .bin artifact");
  bench_suc->add_option("--brt", suc_brt, "BRT dataset CSV");
  bench_suc->add_option("--model", suc_model, "Classifier JSON");
  bench_suc->add_option("--heights", suc_heights, "Target heights lo:step:hi [m]");
  bench_suc->add_option("--limit", suc_limit, "Per-height configuration cap");
  bench_suc->add_option("--out", suc_out, "Write the JSON report here");

  // adaptive
  auto* adaptive_cmd = app.add_subcommand("adaptive", "Disturbance recovery comparison");
  std::string ad_hh = "hedgehog.bin", ad_brt = "brt_data.csv", ad_model = "brt_model.json";
  std::string ad_scenario, ad_out;
  adaptive_cmd->add_option("--hedgehog", ad_hh, "Hedgehog .bin artifact");
  adaptive_cmd->add_option("--brt", ad_brt, "BRT dataset CSV");
  adaptive_cmd->add_option("--model", ad_model, "Classifier JSON");
  adaptive_cmd->add_option("--scenario", ad_scenario, "Disturbance scenario JSON")->required();
  adaptive_cmd->add_option("--out", ad_out, "Write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (hh_build->parsed()) {
      return cmd_hedgehog_build(global, hh_samples, hh_paper_scale, hh_sigma, hh_out);
    }
    if (brt_gen->parsed()) {
      return cmd_brt_generate(global, gen_landing, gen_horizon, gen_dt, gen_vcap, gen_out);
    }
    if (brt_train->parsed()) {
      return cmd_brt_train(global, train_data, train_out, train_epochs, train_batch, train_lr,
                           train_fraction);
    }
    if (plan_cmd->parsed()) {
      return cmd_plan(global, plan_hh, plan_brt, plan_model, plan_target, plan_base,
                      plan_incident_deg, incident_opt->count() > 0, plan_limit, plan_out);
    }
    if (sim_cmd->parsed()) {
      return cmd_simulate(global, sim_plan, sim_out);
    }
    if (bench_lat->parsed()) {
      return cmd_bench_latency(global, lat_hh, lat_brt, lat_model, lat_queries, lat_out);
    }
    if (bench_suc->parsed()) {
      return cmd_bench_success(global, suc_hh, suc_brt, suc_model, suc_heights, suc_limit,
                               suc_out);
    }
    if (adaptive_cmd->parsed()) {
      return cmd_adaptive(global, ad_hh, ad_brt, ad_model, ad_scenario, ad_out);
    }
    std::fprintf(stderr, "error: no subcommand given\n");
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const WriteError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitWrite;
  } catch (const NoSolution& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNoSolution;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
}
