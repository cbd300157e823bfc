#include "throwkit/trajectory_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "throwkit/errors.hpp"
#include "throwkit/io_util.hpp"

namespace throwkit {

KinematicBounds KinematicBounds::defaults_for(const ArmModel& model) {
  KinematicBounds b;
  for (int i = 0; i < kJointCount; ++i) {
    b.v_max[i] = std::min(-model.limits.qd_min[i], model.limits.qd_max[i]);
    b.a_max[i] = 15.0;
    b.j_max[i] = 7500.0;
  }
  return b;
}

JointProfile::JointProfile(double q0, double v0, std::vector<JerkSegment> segments)
    : q0_(q0), v0_(v0), segments_(std::move(segments)) {
  std::erase_if(segments_, [](const JerkSegment& s) { return s.duration <= 0.0; });
  seg_q_.reserve(segments_.size());
  seg_v_.reserve(segments_.size());
  seg_a_.reserve(segments_.size());
  double q = q0_, v = v0_, a = 0.0;
  for (const JerkSegment& s : segments_) {
    seg_q_.push_back(q);
    seg_v_.push_back(v);
    seg_a_.push_back(a);
    const double t = s.duration;
    q += v * t + 0.5 * a * t * t + s.jerk * t * t * t / 6.0;
    v += a * t + 0.5 * s.jerk * t * t;
    a += s.jerk * t;
    duration_ += t;
  }
  end_q_ = q;
  end_v_ = v;
}

void JointProfile::sample(double t, double& q, double& v, double& a) const {
  if (t < -1e-9 || t > duration_ + 1e-9) {
    throw OutOfRange("sample time outside [0, duration]");
  }
  t = std::clamp(t, 0.0, duration_);
  double remaining = t;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (remaining <= segments_[i].duration || i + 1 == segments_.size()) {
      const double tau = std::min(remaining, segments_[i].duration);
      const double j = segments_[i].jerk;
      const double a0 = seg_a_[i], v0 = seg_v_[i], q0 = seg_q_[i];
      q = q0 + v0 * tau + 0.5 * a0 * tau * tau + j * tau * tau * tau / 6.0;
      v = v0 + a0 * tau + 0.5 * j * tau * tau;
      a = a0 + j * tau;
      return;
    }
    remaining -= segments_[i].duration;
  }
  // Empty profile.
  q = q0_;
  v = v0_;
  a = 0.0;
}

double JointProfile::end_position() const { return segments_.empty() ? q0_ : end_q_; }
double JointProfile::end_velocity() const { return segments_.empty() ? v0_ : end_v_; }

namespace {

// Max-effort velocity transition va -> vb with zero boundary accelerations:
// constant-jerk ramp of t1, optional acceleration plateau of t2, ramp down.
struct Transition {
  double t1 = 0.0;
  double t2 = 0.0;
  double sign = 0.0;

  double time() const { return 2.0 * t1 + t2; }
};

Transition make_transition(double va, double vb, const ScalarBounds& b) {
  Transition tr;
  const double dv = vb - va;
  if (dv == 0.0) return tr;
  tr.sign = dv > 0.0 ? 1.0 : -1.0;
  const double adv = std::abs(dv);
  if (adv <= b.a_max * b.a_max / b.j_max) {
    tr.t1 = std::sqrt(adv / b.j_max);
    tr.t2 = 0.0;
  } else {
    tr.t1 = b.a_max / b.j_max;
    tr.t2 = adv / b.a_max - b.a_max / b.j_max;
  }
  return tr;
}

double transition_time(double va, double vb, const ScalarBounds& b) {
  return make_transition(va, vb, b).time();
}

// Distance covered by the transition: the velocity profile is symmetric
// about its midpoint, so the mean velocity is (va + vb) / 2.
double transition_distance(double va, double vb, const ScalarBounds& b) {
  return 0.5 * (va + vb) * transition_time(va, vb, b);
}

struct ProfileCandidate {
  double vp = 0.0;
  double coast = 0.0;
  double total_time = std::numeric_limits<double>::infinity();
};

// Total distance through peak velocity vp with zero coast.
double no_coast_distance(double v0, double v1, double vp, const ScalarBounds& b) {
  return transition_distance(v0, vp, b) + transition_distance(vp, v1, b);
}

std::optional<ProfileCandidate> candidate_at(double v0, double v1, double dq, double vp,
                                             const ScalarBounds& b) {
  if (vp == 0.0) return std::nullopt;
  const double coast = (dq - no_coast_distance(v0, v1, vp, b)) / vp;
  if (coast < -1e-12) return std::nullopt;
  ProfileCandidate c;
  c.vp = vp;
  c.coast = std::max(coast, 0.0);
  c.total_time = transition_time(v0, vp, b) + transition_time(vp, v1, b) + c.coast;
  return c;
}

std::vector<JerkSegment> build_segments(double v0, double v1, const ProfileCandidate& c,
                                        const ScalarBounds& b) {
  std::vector<JerkSegment> segs;
  const auto push_transition = [&](double va, double vb) {
    const Transition tr = make_transition(va, vb, b);
    if (tr.t1 > 0.0) segs.push_back({tr.t1, tr.sign * b.j_max});
    if (tr.t2 > 0.0) segs.push_back({tr.t2, 0.0});
    if (tr.t1 > 0.0) segs.push_back({tr.t1, -tr.sign * b.j_max});
  };
  push_transition(v0, c.vp);
  if (c.coast > 0.0) segs.push_back({c.coast, 0.0});
  push_transition(c.vp, v1);
  return segs;
}

constexpr int kScanIntervals = 512;

// All peak velocities where the no-coast distance equals dq.
std::vector<double> no_coast_roots(double v0, double v1, double dq, const ScalarBounds& b) {
  std::vector<double> roots;
  const auto f = [&](double vp) { return no_coast_distance(v0, v1, vp, b) - dq; };
  double prev_vp = -b.v_max;
  double prev_f = f(prev_vp);
  for (int i = 1; i <= kScanIntervals; ++i) {
    const double vp = -b.v_max + 2.0 * b.v_max * i / kScanIntervals;
    const double fv = f(vp);
    if (prev_f == 0.0) {
      roots.push_back(prev_vp);
    } else if ((prev_f < 0.0) != (fv < 0.0)) {
      double lo = prev_vp, hi = vp, flo = prev_f;
      for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo < 0.0) == (fm < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_vp = vp;
    prev_f = fv;
  }
  if (prev_f == 0.0) roots.push_back(prev_vp);
  return roots;
}

void check_bounds(const ScalarBounds& b) {
  if (!(b.v_max > 0.0) || !(b.a_max > 0.0) || !(b.j_max > 0.0)) {
    throw ConfigError("kinematic bounds must be strictly positive");
  }
}

}  // namespace

namespace {

// The time optimum within the family has either zero coast or a coast at
// +-v_max; gather all such candidates and keep the fastest.
ProfileCandidate minimal_candidate(double v0, double v1, double dq, const ScalarBounds& bounds) {
  ProfileCandidate best;
  const auto consider = [&](const std::optional<ProfileCandidate>& c) {
    if (c && c->total_time < best.total_time) best = *c;
  };
  consider(candidate_at(v0, v1, dq, bounds.v_max, bounds));
  consider(candidate_at(v0, v1, dq, -bounds.v_max, bounds));
  if (std::abs(dq - no_coast_distance(v0, v1, 0.0, bounds)) <= 1e-9) {
    // Exact pass through zero peak velocity; no coast possible there.
    ProfileCandidate c;
    c.vp = 0.0;
    c.total_time = transition_time(v0, 0.0, bounds) + transition_time(0.0, v1, bounds);
    consider(std::optional<ProfileCandidate>(c));
  }
  for (double vp : no_coast_roots(v0, v1, dq, bounds)) {
    if (std::abs(vp) < 1e-9) continue;
    ProfileCandidate c;
    c.vp = vp;
    // Absorb the bisection residual into the coast when possible.
    const double residual = (dq - no_coast_distance(v0, v1, vp, bounds)) / vp;
    c.coast = residual > 0.0 ? residual : 0.0;
    c.total_time =
        transition_time(v0, vp, bounds) + transition_time(vp, v1, bounds) + c.coast;
    consider(c);
  }

  if (!std::isfinite(best.total_time)) {
    throw InfeasibleBoundary("no profile found; unexpected for zero-acceleration boundaries");
  }
  return best;
}

}  // namespace

JointProfile plan_single(double q0, double v0, double q1, double v1,
                         const ScalarBounds& bounds) {
  check_bounds(bounds);
  if (std::abs(v0) > bounds.v_max + 1e-12 || std::abs(v1) > bounds.v_max + 1e-12) {
    throw InfeasibleBoundary("boundary velocity exceeds v_max");
  }
  if (q0 == q1 && v0 == v1) {
    return JointProfile(q0, v0, {});
  }
  const double dq = q1 - q0;
  const ProfileCandidate best = minimal_candidate(v0, v1, dq, bounds);
  return JointProfile(q0, v0, build_segments(v0, v1, best, bounds));
}

JointProfile stretch_single(double q0, double v0, double q1, double v1,
                            const ScalarBounds& bounds, double target_duration) {
  const JointProfile minimal = plan_single(q0, v0, q1, v1, bounds);
  if (target_duration < minimal.duration() - 1e-9) {
    throw SynchronizationFailure("target duration below the minimal duration");
  }
  if (std::abs(target_duration - minimal.duration()) <= 1e-12) {
    return minimal;
  }
  const double dq = q1 - q0;

  // Coast at zero velocity: handles rest-to-rest and near-rest boundaries,
  // where the 1/vp coast solve below degenerates.
  if (std::abs(dq - no_coast_distance(v0, v1, 0.0, bounds)) <= 1e-9) {
    const double t_trans =
        transition_time(v0, 0.0, bounds) + transition_time(0.0, v1, bounds);
    if (target_duration >= t_trans) {
      ProfileCandidate zero;
      zero.vp = 0.0;
      zero.coast = target_duration - t_trans;
      std::vector<JerkSegment> segs = build_segments(v0, 0.0, zero, bounds);
      const ProfileCandidate tail{0.0, 0.0, 0.0};
      for (const JerkSegment& s : build_segments(0.0, v1, tail, bounds)) {
        segs.push_back(s);
      }
      return JointProfile(q0, v0, std::move(segs));
    }
  }
  const auto timed = [&](double vp) -> std::optional<ProfileCandidate> {
    return candidate_at(v0, v1, dq, vp, bounds);
  };

  // Scan the peak-velocity axis for duration crossings and bisect each.
  // The coast time scales as 1/vp, so the duration blows up toward vp = 0;
  // geometric points near zero keep those roots inside scanned intervals.
  // The minimal-duration peak velocity separates the root pair that
  // appears when the target barely exceeds the minimum.
  std::vector<double> grid;
  grid.reserve(2 * kScanIntervals + 92);
  for (int i = 0; i <= 2 * kScanIntervals; ++i) {
    grid.push_back(-bounds.v_max + bounds.v_max * i / kScanIntervals);
  }
  for (int k = 10; k <= 52; ++k) {
    const double vp = bounds.v_max * std::pow(0.5, k);
    grid.push_back(vp);
    grid.push_back(-vp);
  }
  grid.push_back(minimal_candidate(v0, v1, dq, bounds).vp);
  std::sort(grid.begin(), grid.end());

  std::vector<double> roots;
  std::optional<ProfileCandidate> prev;
  double prev_vp = 0.0;
  for (double vp : grid) {
    if (vp == 0.0) {
      prev.reset();
      continue;
    }
    const std::optional<ProfileCandidate> cur = timed(vp);
    if (prev && cur) {
      const double gp = prev->total_time - target_duration;
      const double gc = cur->total_time - target_duration;
      if (gp == 0.0) {
        roots.push_back(prev_vp);
      } else if ((gp < 0.0) != (gc < 0.0)) {
        double lo = prev_vp, hi = vp, glo = gp;
        for (int it = 0; it < 120; ++it) {
          const double mid = 0.5 * (lo + hi);
          const std::optional<ProfileCandidate> cm = timed(mid);
          const double gm = cm ? cm->total_time - target_duration : glo;
          if ((glo < 0.0) == (gm < 0.0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
        roots.push_back(0.5 * (lo + hi));
      }
    }
    prev = cur;
    prev_vp = vp;
  }

  if (roots.empty()) {
    char msg[192];
    std::snprintf(msg, sizeof(msg),
                  "no stretched profile reaches duration %.9f (minimal %.9f, q0=%.9f v0=%.9f "
                  "q1=%.9f v1=%.9f)",
                  target_duration, minimal.duration(), q0, v0, q1, v1);
    throw SynchronizationFailure(msg);
  }
  const double vp = dq >= 0.0 ? *std::max_element(roots.begin(), roots.end())
                              : *std::min_element(roots.begin(), roots.end());
  const std::optional<ProfileCandidate> c = timed(vp);
  if (!c) {
    throw SynchronizationFailure("stretched profile became infeasible at the root");
  }
  return JointProfile(q0, v0, build_segments(v0, v1, *c, bounds));
}

void JointTrajectory::sample(double t, JointVector& q, JointVector& qd, JointVector& qdd) const {
  if (t < -1e-9 || t > duration + 1e-9) {
    throw OutOfRange("sample time outside [0, duration]");
  }
  for (int i = 0; i < kJointCount; ++i) {
    const double ti = std::min(t, joints[static_cast<std::size_t>(i)].duration());
    joints[static_cast<std::size_t>(i)].sample(ti, q[i], qd[i], qdd[i]);
  }
}

BoundaryState JointTrajectory::start() const {
  BoundaryState b;
  JointVector qdd;
  sample(0.0, b.q, b.qd, qdd);
  return b;
}

BoundaryState JointTrajectory::end() const {
  BoundaryState b;
  for (int i = 0; i < kJointCount; ++i) {
    b.q[i] = joints[static_cast<std::size_t>(i)].end_position();
    b.qd[i] = joints[static_cast<std::size_t>(i)].end_velocity();
  }
  return b;
}

JointTrajectory synchronize(const BoundaryState& b0, const BoundaryState& b1,
                            const KinematicBounds& bounds,
                            const std::array<JointProfile, kJointCount>& minimal) {
  double t_star = 0.0;
  for (const JointProfile& p : minimal) {
    t_star = std::max(t_star, p.duration());
  }

  JointTrajectory traj;
  traj.duration = t_star;
  for (int i = 0; i < kJointCount; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    if (t_star - minimal[si].duration() <= 1e-12) {
      traj.joints[si] = minimal[si];
    } else {
      const ScalarBounds sb{bounds.v_max[i], bounds.a_max[i], bounds.j_max[i]};
      traj.joints[si] = stretch_single(b0.q[i], b0.qd[i], b1.q[i], b1.qd[i], sb, t_star);
    }
  }
  return traj;
}

JointTrajectory plan_trajectory(const BoundaryState& b0, const BoundaryState& b1,
                                const KinematicBounds& bounds) {
  std::array<JointProfile, kJointCount> minimal;
  for (int i = 0; i < kJointCount; ++i) {
    const ScalarBounds sb{bounds.v_max[i], bounds.a_max[i], bounds.j_max[i]};
    minimal[static_cast<std::size_t>(i)] = plan_single(b0.q[i], b0.qd[i], b1.q[i], b1.qd[i], sb);
  }
  return synchronize(b0, b1, bounds, minimal);
}

void export_trajectory_csv(const JointTrajectory& traj, double rate_hz,
                           const std::string& path) {
  if (!(rate_hz > 0.0)) {
    throw ConfigError("sample rate must be positive");
  }
  std::string csv = "t,q1,q2,q3,q4,q5,q6,q7,qd1,qd2,qd3,qd4,qd5,qd6,qd7\n";
  char buf[64];
  const auto emit = [&](double t) {
    JointVector q, qd, qdd;
    traj.sample(t, q, qd, qdd);
    std::snprintf(buf, sizeof(buf), "%.9f", t);
    csv += buf;
    for (int i = 0; i < kJointCount; ++i) {
      std::snprintf(buf, sizeof(buf), ",%.9f", q[i]);
      csv += buf;
    }
    for (int i = 0; i < kJointCount; ++i) {
      std::snprintf(buf, sizeof(buf), ",%.9f", qd[i]);
      csv += buf;
    }
    csv += '\n';
  };
  const double dt = 1.0 / rate_hz;
  for (double t = 0.0; t < traj.duration; t += dt) {
    emit(t);
  }
  emit(traj.duration);
  atomic_write_file(path, csv);
}

}  // namespace throwkit
