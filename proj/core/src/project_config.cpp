#include "throwkit/project_config.hpp"

#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "throwkit/errors.hpp"
#include "throwkit/io_util.hpp"

namespace throwkit {

namespace {

std::vector<double> parse_axis(const nlohmann::json& j, double scale) {
  std::vector<double> axis;
  if (j.is_array()) {
    for (const auto& v : j) axis.push_back(v.get<double>() * scale);
  } else {
    const double start = j.at("start").get<double>();
    const double step = j.at("step").get<double>();
    const double stop = j.at("stop").get<double>();
    if (!(step > 0.0) || stop < start) {
      throw ConfigError("grid axis needs step > 0 and stop >= start");
    }
    const int count = static_cast<int>(std::round((stop - start) / step)) + 1;
    for (int i = 0; i < count; ++i) axis.push_back((start + i * step) * scale);
  }
  if (axis.size() < 1) {
    throw ConfigError("grid axis is empty");
  }
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) {
      throw ConfigError("grid axis must be strictly increasing");
    }
  }
  return axis;
}

}  // namespace

HedgehogGrids load_grids(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("grids " + path + ": " + e.what());
  }
  constexpr double kDegree = M_PI / 180.0;
  HedgehogGrids g;
  try {
    g.z = parse_axis(j.at("z"), 1.0);
    if (j.contains("phi_deg")) {
      g.phi = parse_axis(j["phi_deg"], kDegree);
    } else {
      g.phi = parse_axis(j.at("phi"), 1.0);
    }
    if (j.contains("gamma_deg")) {
      g.gamma = parse_axis(j["gamma_deg"], kDegree);
    } else {
      g.gamma = parse_axis(j.at("gamma"), 1.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("grids " + path + ": " + e.what());
  }
  return g;
}

LandingTargetSet load_target_set(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("target set " + path + ": " + e.what());
  }
  LandingTargetSet set;
  try {
    set.r_slack = j.value("r_slack", 0.0);
    set.z_slack = j.value("z_slack", 0.0);
    if (j.contains("rd_range")) {
      set.rd_range = Interval{j["rd_range"].at(0).get<double>(),
                              j["rd_range"].at(1).get<double>()};
    }
    if (j.contains("zd_range")) {
      set.zd_range = Interval{j["zd_range"].at(0).get<double>(),
                              j["zd_range"].at(1).get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("target set " + path + ": " + e.what());
  }
  if (!(set.rd_range.low > 0.0)) {
    throw ConfigError("target set " + path + ": rd range must be positive");
  }
  if (!(set.zd_range.high < 0.0)) {
    throw ConfigError("target set " + path + ": object must descend at landing");
  }
  return set;
}

TrainFileConfig load_train_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("train config " + path + ": " + e.what());
  }
  TrainFileConfig out;
  out.config.epochs = j.value("epochs", 10);
  out.config.batch_size = j.value("batch_size", 256);
  out.config.learning_rate = j.value("learning_rate", 1e-3);
  out.config.beta1 = j.value("beta1", 0.9);
  out.config.beta2 = j.value("beta2", 0.999);
  out.config.eps = j.value("eps", 1e-8);
  out.config.seed = j.value("seed", std::uint64_t{0});
  out.config.train_fraction = j.value("train_fraction", 0.7);
  if (j.contains("shifts_r")) out.shifts_r = j["shifts_r"].get<std::vector<double>>();
  if (j.contains("shifts_z")) out.shifts_z = j["shifts_z"].get<std::vector<double>>();
  return out;
}

SimConfig load_sim_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("sim config " + path + ": " + e.what());
  }
  SimConfig sim;
  sim.dt = j.value("dt", 0.01);
  sim.g = j.value("g", 9.81);
  sim.ball_radius = j.value("ball_radius", 0.05);
  if (j.contains("box_opening")) {
    sim.box_opening_x = j["box_opening"].at(0).get<double>();
    sim.box_opening_y = j["box_opening"].at(1).get<double>();
  }
  sim.wall_height = j.value("wall_height", 0.05);
  if (!(sim.dt > 0.0)) {
    throw ConfigError("sim config " + path + ": dt must be positive");
  }
  if (!(sim.ball_radius < 0.5 * std::min(sim.box_opening_x, sim.box_opening_y))) {
    throw ConfigError("sim config " + path + ": ball radius too large for the opening");
  }
  return sim;
}

ProjectConfig ProjectConfig::load(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("project config " + path + ": " + e.what());
  }

  ProjectConfig cfg;
  cfg.arm_path = j.value("arm", "");
  cfg.grids_path = j.value("grids", "");
  cfg.target_set_path = j.value("target_set", "");
  cfg.train_path = j.value("train", "");
  cfg.sim_path = j.value("sim", "");
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.out_dir = j.value("out_dir", ".");

  // Paths are resolved relative to the config file location.
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  const auto resolve = [&](std::string& p) {
    if (p.empty()) return;
    if (!std::filesystem::path(p).is_absolute()) {
      p = (base / p).string();
    }
    if (!std::filesystem::exists(p)) {
      throw ConfigError("project config references a missing file: " + p);
    }
  };
  resolve(cfg.arm_path);
  resolve(cfg.grids_path);
  resolve(cfg.target_set_path);
  resolve(cfg.train_path);
  resolve(cfg.sim_path);
  return cfg;
}

ArmModel ProjectConfig::arm() const {
  return arm_path.empty() ? ArmModel::panda() : load_arm_model(arm_path);
}

HedgehogGrids ProjectConfig::grids() const {
  return grids_path.empty() ? HedgehogGrids::defaults() : load_grids(grids_path);
}

LandingTargetSet ProjectConfig::target_set() const {
  return target_set_path.empty() ? LandingTargetSet{} : load_target_set(target_set_path);
}

TrainFileConfig ProjectConfig::train() const {
  return train_path.empty() ? TrainFileConfig{} : load_train_config(train_path);
}

SimConfig ProjectConfig::sim() const {
  return sim_path.empty() ? SimConfig{} : load_sim_config(sim_path);
}

}  // namespace throwkit
