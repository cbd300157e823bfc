#include "throwkit/arm_kinematics.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "throwkit/io_util.hpp"

namespace throwkit {

namespace {

Eigen::Matrix4d dh_row_transform(const DhRow& row, double q) {
  const double ct = std::cos(q + row.theta_offset);
  const double st = std::sin(q + row.theta_offset);
  const double ca = std::cos(row.alpha);
  const double sa = std::sin(row.alpha);

  Eigen::Matrix4d T;
  T << ct, -st * ca,  st * sa, row.a * ct,
       st,  ct * ca, -ct * sa, row.a * st,
        0,       sa,       ca,      row.d,
        0,        0,        0,          1;
  return T;
}

}  // namespace

ArmModel ArmModel::panda() {
  constexpr double half_pi = 1.5707963267948966;
  ArmModel m;
  m.dh = {DhRow{0.0, 0.333, -half_pi, 0.0},
          DhRow{0.0, 0.0, half_pi, 0.0},
          DhRow{0.0825, 0.316, half_pi, 0.0},
          DhRow{-0.0825, 0.0, -half_pi, 0.0},
          DhRow{0.0, 0.384, half_pi, 0.0},
          DhRow{0.088, 0.0, half_pi, 0.0},
          DhRow{0.0, 0.107, 0.0, 0.0}};
  m.base_height = 0.5;
  m.limits.q_min << -2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973;
  m.limits.q_max << 2.8973, 1.7628, 2.8973, -0.0698, 2.8973, 3.7525, 2.8973;
  m.limits.qd_max << 2.1750, 2.1750, 2.1750, 2.1750, 2.6100, 2.6100, 2.6100;
  m.limits.qd_min = -m.limits.qd_max;
  return m;
}

ArmModel load_arm_model(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("arm model " + path + ": " + e.what());
  }

  ArmModel m;
  try {
    const auto& dh = j.at("dh");
    if (dh.size() != kJointCount) {
      throw ConfigError("arm model " + path + ": expected 7 dh rows");
    }
    for (int i = 0; i < kJointCount; ++i) {
      const auto& row = dh.at(i);
      m.dh[i] = DhRow{row.at(0).get<double>(), row.at(1).get<double>(),
                      row.at(2).get<double>(), row.at(3).get<double>()};
    }
    m.base_height = j.at("base_height").get<double>();
    const auto read_joint_vector = [&](const char* key) {
      const auto& arr = j.at(key);
      if (arr.size() != kJointCount) {
        throw ConfigError(std::string("arm model: ") + key + " must have 7 entries");
      }
      JointVector v;
      for (int i = 0; i < kJointCount; ++i) v[i] = arr.at(i).get<double>();
      return v;
    };
    m.limits.q_min = read_joint_vector("q_min");
    m.limits.q_max = read_joint_vector("q_max");
    m.limits.qd_min = read_joint_vector("qd_min");
    m.limits.qd_max = read_joint_vector("qd_max");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("arm model " + path + ": " + e.what());
  }

  for (int i = 0; i < kJointCount; ++i) {
    if (!(m.limits.q_min[i] < m.limits.q_max[i]) || !(m.limits.qd_min[i] < 0.0) ||
        !(m.limits.qd_max[i] > 0.0)) {
      throw ConfigError("arm model " + path + ": inconsistent limits at joint " +
                        std::to_string(i));
    }
  }
  if (!forward_position(m, JointVector::Zero()).allFinite()) {
    throw ConfigError("arm model " + path + ": non-finite zero-configuration kinematics");
  }
  return m;
}

void save_arm_model(const ArmModel& model, const std::string& path) {
  nlohmann::json j;
  for (const auto& row : model.dh) {
    j["dh"].push_back({row.a, row.d, row.alpha, row.theta_offset});
  }
  j["base_height"] = model.base_height;
  const auto joint_vector = [](const JointVector& v) {
    return std::vector<double>(v.data(), v.data() + kJointCount);
  };
  j["q_min"] = joint_vector(model.limits.q_min);
  j["q_max"] = joint_vector(model.limits.q_max);
  j["qd_min"] = joint_vector(model.limits.qd_min);
  j["qd_max"] = joint_vector(model.limits.qd_max);
  atomic_write_file(path, j.dump(2) + "\n");
}

Eigen::Matrix4d forward_transform(const ArmModel& model, const JointVector& q) {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  for (int i = 0; i < kJointCount; ++i) {
    T *= dh_row_transform(model.dh[i], q[i]);
  }
  return T;
}

Vec3 forward_position(const ArmModel& model, const JointVector& q) {
  return forward_transform(model, q).block<3, 1>(0, 3);
}

PointKinematics point_kinematics(const ArmModel& model, const JointVector& q) {
  // Joint i rotates about the z axis of the frame reached after rows 0..i-1.
  std::array<Vec3, kJointCount> axes;
  std::array<Vec3, kJointCount> origins;
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  for (int i = 0; i < kJointCount; ++i) {
    axes[i] = T.block<3, 1>(0, 2);
    origins[i] = T.block<3, 1>(0, 3);
    T *= dh_row_transform(model.dh[i], q[i]);
  }

  PointKinematics out;
  out.position = T.block<3, 1>(0, 3);
  for (int i = 0; i < kJointCount; ++i) {
    out.jacobian.col(i) = axes[i].cross(out.position - origins[i]);
  }
  return out;
}

Matrix3x7 jacobian_position(const ArmModel& model, const JointVector& q) {
  return point_kinematics(model, q).jacobian;
}

Matrix7x3 pseudoinverse(const Matrix3x7& jacobian, double cutoff) {
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, kJointCount>> svd(
      jacobian, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  Matrix7x3 pinv = Matrix7x3::Zero();
  for (int i = 0; i < 3; ++i) {
    if (sigma[i] >= cutoff) {
      pinv += (1.0 / sigma[i]) * svd.matrixV().col(i) * svd.matrixU().col(i).transpose();
    }
  }
  return pinv;
}

Matrix2x7 xy_jacobian(const ArmModel& model, const JointVector& q) {
  return jacobian_position(model, q).topRows<2>();
}

TopSingular max_singular(const Matrix2x7& jacobian_xy) {
  const Eigen::Matrix2d gram = jacobian_xy * jacobian_xy.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(gram);
  TopSingular out;
  const double lambda = std::max(eig.eigenvalues()[1], 0.0);
  out.value = std::sqrt(lambda);
  if (out.value > 1e-12) {
    out.direction = eig.eigenvectors().col(1).normalized();
    out.valid = true;
  }
  return out;
}

double yaw_of(const Vec3& position) {
  if (position.head<2>().norm() <= 1e-9) {
    throw DegenerateYaw("end effector on the base vertical axis");
  }
  return std::atan2(position.y(), position.x());
}

double arm_yaw(const ArmModel& model, const JointVector& q) {
  return yaw_of(forward_position(model, q));
}

}  // namespace throwkit
