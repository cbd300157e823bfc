#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "throwkit/arm_kinematics.hpp"
#include "throwkit/io_util.hpp"
#include "throwkit/project_config.hpp"

using namespace throwkit;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_SUITE_BEGIN("config_io");

TEST_CASE("atomic write leaves the target file and no temporary") {
  const std::string path = temp_path("tk_atomic.txt");
  atomic_write_file(path, "hello");
  CHECK(read_file(path) == "hello");
  atomic_write_file(path, "replaced");
  CHECK(read_file(path) == "replaced");

  std::size_t leftovers = 0;
  for (const auto& entry : fs::directory_iterator(fs::temp_directory_path())) {
    if (entry.path().filename().string().find("tk_atomic.txt.tmp") == 0) ++leftovers;
  }
  CHECK(leftovers == 0);
  fs::remove(path);

  CHECK_THROWS_AS(read_file("/nonexistent/file"), ConfigError);
}

TEST_CASE("grid file: range form and array form") {
  const std::string path = temp_path("tk_grids.json");
  write(path, R"({
    "z": {"start": 0.0, "step": 0.05, "stop": 1.2},
    "phi_deg": {"start": -90, "step": 15, "stop": 90},
    "gamma_deg": {"start": 20, "step": 5, "stop": 70}
  })");
  const HedgehogGrids g = load_grids(path);
  CHECK(g.z.size() == 25);
  CHECK(g.phi.size() == 13);
  CHECK(g.gamma.size() == 11);

  write(path, R"({"z": [0.0, 0.5], "phi": [0.0], "gamma": [0.5, 0.7]})");
  const HedgehogGrids g2 = load_grids(path);
  CHECK(g2.z.size() == 2);
  CHECK(g2.gamma[1] == doctest::Approx(0.7));

  write(path, R"({"z": [0.5, 0.0], "phi": [0.0], "gamma": [0.5]})");
  CHECK_THROWS_AS(load_grids(path), ConfigError);
  fs::remove(path);
}

TEST_CASE("target set and sim config validation") {
  const std::string path = temp_path("tk_target.json");
  write(path, R"({"rd_range": [0.2, 2.0], "zd_range": [-5.0, -2.0], "r_slack": 0.01})");
  const LandingTargetSet set = load_target_set(path);
  CHECK(set.r_slack == 0.01);
  CHECK(set.rd_range.high == 2.0);

  write(path, R"({"rd_range": [-0.5, 2.0], "zd_range": [-5.0, -2.0]})");
  CHECK_THROWS_AS(load_target_set(path), ConfigError);

  write(path, R"({"rd_range": [0.2, 2.0], "zd_range": [-5.0, 1.0]})");
  CHECK_THROWS_AS(load_target_set(path), ConfigError);
  fs::remove(path);

  const std::string sim_path = temp_path("tk_sim.json");
  write(sim_path, R"({"dt": 0.005, "ball_radius": 0.05, "box_opening": [0.25, 0.25]})");
  const SimConfig sim = load_sim_config(sim_path);
  CHECK(sim.dt == 0.005);

  write(sim_path, R"({"ball_radius": 0.2, "box_opening": [0.25, 0.25]})");
  CHECK_THROWS_AS(load_sim_config(sim_path), ConfigError);
  fs::remove(sim_path);
}

TEST_CASE("shipped arm parameter file equals the compiled-in default") {
  const ArmModel file = load_arm_model(std::string(THROWKIT_DATA_DIR) + "/panda.json");
  const ArmModel builtin = ArmModel::panda();
  for (int i = 0; i < kJointCount; ++i) {
    CHECK(file.dh[i].a == builtin.dh[i].a);
    CHECK(file.dh[i].d == builtin.dh[i].d);
    CHECK(file.dh[i].alpha == builtin.dh[i].alpha);
    CHECK(file.dh[i].theta_offset == builtin.dh[i].theta_offset);
  }
  CHECK(file.base_height == builtin.base_height);
  CHECK((file.limits.q_min - builtin.limits.q_min).cwiseAbs().maxCoeff() == 0.0);
  CHECK((file.limits.q_max - builtin.limits.q_max).cwiseAbs().maxCoeff() == 0.0);
  CHECK((file.limits.qd_min - builtin.limits.qd_min).cwiseAbs().maxCoeff() == 0.0);
  CHECK((file.limits.qd_max - builtin.limits.qd_max).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("project config resolves relative paths and validates existence") {
  const std::string dir = temp_path("tk_project");
  fs::create_directories(dir);
  write(dir + "/target.json", R"({"rd_range": [0.2, 2.0], "zd_range": [-5.0, -2.0]})");
  write(dir + "/config.json", R"({"target_set": "target.json", "seed": 42})");

  const ProjectConfig cfg = ProjectConfig::load(dir + "/config.json");
  CHECK(cfg.seed == 42);
  CHECK(cfg.target_set().rd_range.low == 0.2);
  CHECK(cfg.arm().limits.qd_max[0] == doctest::Approx(2.175));  // default arm
  CHECK(cfg.grids().z.size() == 25);                            // default grids

  write(dir + "/config.json", R"({"arm": "missing_arm.json"})");
  CHECK_THROWS_AS(ProjectConfig::load(dir + "/config.json"), ConfigError);
  fs::remove_all(dir);
}

TEST_SUITE_END();
