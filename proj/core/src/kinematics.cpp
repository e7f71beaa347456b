#include "emgshift/kinematics.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "emgshift/io.hpp"
#include "emgshift/rng.hpp"

namespace emgshift::kin {

namespace {

// Gaussian elimination with partial pivoting; small fixed-size system.
std::array<double, 6> solve6(std::array<std::array<double, 7>, 6> m) {
  for (int col = 0; col < 6; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 6; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (std::abs(m[pivot][col]) < 1e-14)
      throw std::invalid_argument("min_jerk_coeffs: singular boundary system");
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < 6; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 7; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::array<double, 6> x{};
  for (int i = 0; i < 6; ++i) x[i] = m[i][6] / m[i][i];
  return x;
}

}  // namespace

double Quintic::pos(double t) const {
  const double tau = (t - t0) / duration();
  double v = 0.0;
  for (int i = 5; i >= 0; --i) v = v * tau + c[static_cast<std::size_t>(i)];
  return v;
}

double Quintic::vel(double t) const {
  const double tau = (t - t0) / duration();
  double v = 0.0;
  for (int i = 5; i >= 1; --i) v = v * tau + i * c[static_cast<std::size_t>(i)];
  return v / duration();
}

double Quintic::acc(double t) const {
  const double tau = (t - t0) / duration();
  double v = 0.0;
  for (int i = 5; i >= 2; --i) v = v * tau + i * (i - 1) * c[static_cast<std::size_t>(i)];
  return v / (duration() * duration());
}

Quintic min_jerk_coeffs(const MinJerkSegment& seg) {
  const double T = seg.t1 - seg.t0;
  if (!(T > 0.0)) throw std::invalid_argument("min_jerk_coeffs: need t1 > t0");

  // Rows: x(0), x'(0), x''(0), x(1), x'(1), x''(1) in normalized time, so the
  // derivative constraints are scaled by T and T^2.
  std::array<std::array<double, 7>, 6> m{};
  m[0] = {1, 0, 0, 0, 0, 0, seg.start.pos};
  m[1] = {0, 1, 0, 0, 0, 0, seg.start.vel * T};
  m[2] = {0, 0, 2, 0, 0, 0, seg.start.acc * T * T};
  m[3] = {1, 1, 1, 1, 1, 1, seg.end.pos};
  m[4] = {0, 1, 2, 3, 4, 5, seg.end.vel * T};
  m[5] = {0, 0, 2, 6, 12, 20, seg.end.acc * T * T};

  Quintic q;
  q.t0 = seg.t0;
  q.t1 = seg.t1;
  q.c = solve6(m);
  return q;
}

WristTarget forward_kinematics(const JointState& joints, const ArmGeometry& arm) {
  const double s = joints.shoulder_rad;
  const double se = joints.shoulder_rad + joints.elbow_rad;
  return {arm.upper_arm_m * std::cos(s) + arm.forearm_m * std::cos(se),
          arm.upper_arm_m * std::sin(s) + arm.forearm_m * std::sin(se)};
}

JointState inverse_kinematics(const WristTarget& target, const ArmGeometry& arm) {
  const double a = target.y_m;
  const double b = target.x_m;
  const double r2 = a * a + b * b;
  const double ls = arm.upper_arm_m;
  const double le = arm.forearm_m;
  if (std::sqrt(r2) > ls + le + 1e-12)
    throw std::invalid_argument("inverse_kinematics: target out of reach");

  const double c = (r2 + ls * ls - le * le) / (2.0 * ls);
  const double d = (r2 - ls * ls + le * le) / (2.0 * le);
  double rad_c = r2 - c * c;
  double rad_d = r2 - d * d;
  if (rad_c < -1e-9 || rad_d < -1e-9)
    throw std::invalid_argument("inverse_kinematics: target outside the solvable annulus");
  rad_c = std::max(rad_c, 0.0);
  rad_d = std::max(rad_d, 0.0);

  const double half = std::atan2(std::sqrt(rad_c), c);
  JointState out;
  out.shoulder_rad = std::atan2(a, b) - half;
  out.elbow_rad = half + std::atan2(std::sqrt(rad_d), d);
  return out;
}

TaskLibrary TaskLibrary::defaults() {
  TaskLibrary lib;
  const auto J = TaskSpace::kJoint;
  const auto C = TaskSpace::kCartesian;

  // Fast elbow point-to-point.
  lib.tasks[0].start = {0.52, 0.70};
  lib.tasks[0].cycle = {
      {false, J, 0, 0, 0.80},
      {true, J, 0.52, 2.30, 0.50},
      {false, J, 0, 0, 0.80},
      {true, J, 0.52, 0.70, 0.50},
  };

  // Medium reaches with slow (sub-threshold) phases mixed in.
  lib.tasks[1].start = {0.52, 0.70};
  lib.tasks[1].cycle = {
      {false, J, 0, 0, 0.70},
      {true, J, 0.52, 2.10, 0.80},
      {false, J, 0, 0, 0.70},
      {true, J, 0.52, 0.70, 0.80},
      {false, J, 0, 0, 0.70},
      {true, J, 0.52, 1.90, 1.90},  // slow: peak velocity stays below threshold
      {false, J, 0, 0, 0.70},
      {true, J, 0.52, 0.70, 0.60},
  };

  // Straight wrist lines (minimum jerk in x/y, joints from IK).
  lib.tasks[2].start = {0.19, 0.62};  // near (0.55, 0.10)
  lib.tasks[2].cycle = {
      {false, J, 0, 0, 0.75},
      {true, C, 0.15, 0.30, 0.60},
      {false, J, 0, 0, 0.75},
      {true, C, 0.55, 0.10, 0.60},
  };

  // Transitional: flexion flowing directly into extension.
  lib.tasks[3].start = {0.52, 0.70};
  lib.tasks[3].cycle = {
      {false, J, 0, 0, 0.90},
      {true, J, 0.52, 2.25, 0.55},
      {true, J, 0.52, 0.70, 0.55},
      {false, J, 0, 0, 0.90},
      {true, J, 0.52, 2.00, 0.65},
      {false, J, 0, 0, 0.45},
      {true, J, 0.52, 0.70, 0.65},
  };

  // Joint-space curves: shoulder and elbow move together.
  lib.tasks[4].start = {0.30, 0.80};
  lib.tasks[4].cycle = {
      {false, J, 0, 0, 0.70},
      {true, J, 0.85, 2.20, 0.60},
      {false, J, 0, 0, 0.70},
      {true, J, 0.25, 1.10, 0.70},
      {false, J, 0, 0, 0.70},
      {true, J, 0.70, 2.30, 0.55},
      {false, J, 0, 0, 0.70},
      {true, J, 0.30, 0.80, 0.60},
  };
  return lib;
}

TaskLibrary TaskLibrary::from_json_file(const std::filesystem::path& path) {
  using nlohmann::json;
  TaskLibrary lib = defaults();
  const json j = json::parse(io::read_file(path));
  if (!j.contains("tasks")) return lib;
  for (const auto& [key, spec] : j.at("tasks").items()) {
    const int kind = std::stoi(key);
    if (kind < 1 || kind > 5)
      throw std::runtime_error("task library: kind out of range: " + key);
    TaskScript script;
    const auto& start = spec.at("start");
    script.start = {start.at(0).get<double>(), start.at(1).get<double>()};
    for (const auto& act : spec.at("cycle")) {
      TaskAction a;
      if (act.contains("hold")) {
        a.move = false;
        a.duration_s = act.at("hold").get<double>();
      } else {
        a.move = true;
        a.duration_s = act.at("dur").get<double>();
        a.space = act.value("space", std::string("joint")) == "cartesian" ? TaskSpace::kCartesian
                                                                          : TaskSpace::kJoint;
        a.a = act.at("move").at(0).get<double>();
        a.b = act.at("move").at(1).get<double>();
      }
      script.cycle.push_back(a);
    }
    lib.tasks[static_cast<std::size_t>(kind - 1)] = script;
  }
  return lib;
}

namespace {

Quintic hold_quintic(double t0, double t1, double value) {
  Quintic q;
  q.t0 = t0;
  q.t1 = t1;
  q.c = {value, 0, 0, 0, 0, 0};
  return q;
}

Quintic move_quintic(double t0, double t1, double from, double to) {
  MinJerkSegment seg;
  seg.t0 = t0;
  seg.t1 = t1;
  seg.start = {from, 0, 0};
  seg.end = {to, 0, 0};
  return min_jerk_coeffs(seg);
}

}  // namespace

TaskTrajectory generate_task(int kind, std::uint64_t seed, const ArmGeometry& arm,
                             const TaskLibrary* library) {
  if (kind < 1 || kind > 5) throw std::invalid_argument("generate_task: kind must be 1..5");
  const TaskLibrary defaults = TaskLibrary::defaults();
  const TaskScript& script =
      (library ? library->tasks : defaults.tasks)[static_cast<std::size_t>(kind - 1)];
  if (script.cycle.empty()) throw std::invalid_argument("generate_task: empty task script");

  constexpr double kTrialSeconds = 60.0;
  CounterRng rng = CounterRng(seed).split("task", static_cast<std::uint64_t>(kind));

  TaskTrajectory traj;
  traj.rate_hz = 120.0;

  // Build the segment list: alternate holds and moves following the script,
  // cycling with per-repeat jitter, then pad the tail with a hold.
  double t = 0.0;
  JointState pose = script.start;
  std::size_t action_idx = 0;
  while (true) {
    const TaskAction& act = script.cycle[action_idx % script.cycle.size()];
    double dur = act.duration_s * rng.uniform(0.92, 1.08);
    if (!act.move) {
      if (t + dur > kTrialSeconds - 3.0 && action_idx >= script.cycle.size()) break;
      TaskSegment seg;
      seg.space = TaskSpace::kJoint;
      seg.a = hold_quintic(t, t + dur, pose.shoulder_rad);
      seg.b = hold_quintic(t, t + dur, pose.elbow_rad);
      traj.segments.push_back(seg);
    } else {
      if (t + dur > kTrialSeconds - 3.0) break;
      TaskSegment seg;
      seg.space = act.space;
      if (act.space == TaskSpace::kJoint) {
        const double jit = rng.uniform(-0.05, 0.05);
        const double target_s = act.a;
        const double target_e = std::clamp(act.b + jit, 0.15, 2.95);
        seg.a = move_quintic(t, t + dur, pose.shoulder_rad, target_s);
        seg.b = move_quintic(t, t + dur, pose.elbow_rad, target_e);
        pose = {target_s, target_e};
      } else {
        const WristTarget from = forward_kinematics(pose, arm);
        const double jx = rng.uniform(-0.015, 0.015);
        const double jy = rng.uniform(-0.015, 0.015);
        const WristTarget to{act.a + jx, act.b + jy};
        seg.a = move_quintic(t, t + dur, from.x_m, to.x_m);
        seg.b = move_quintic(t, t + dur, from.y_m, to.y_m);
        pose = inverse_kinematics(to, arm);
      }
      traj.segments.push_back(seg);
    }
    t += dur;
    ++action_idx;
  }
  {
    TaskSegment tail;
    tail.space = TaskSpace::kJoint;
    tail.a = hold_quintic(t, kTrialSeconds, pose.shoulder_rad);
    tail.b = hold_quintic(t, kTrialSeconds, pose.elbow_rad);
    traj.segments.push_back(tail);
  }

  // Sample at 120 Hz.
  const std::size_t n = static_cast<std::size_t>(std::lround(kTrialSeconds * traj.rate_hz));
  std::size_t seg_idx = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = static_cast<double>(k) / traj.rate_hz;
    while (seg_idx + 1 < traj.segments.size() &&
           tk >= traj.segments[seg_idx].a.t1 - 1e-12)
      ++seg_idx;
    const TaskSegment& seg = traj.segments[seg_idx];
    JointState js;
    WristTarget w;
    if (seg.space == TaskSpace::kJoint) {
      js = {seg.a.pos(tk), seg.b.pos(tk)};
      w = forward_kinematics(js, arm);
    } else {
      w = {seg.a.pos(tk), seg.b.pos(tk)};
      js = inverse_kinematics(w, arm);
    }
    traj.time_s.push_back(tk);
    traj.theta_sld.push_back(js.shoulder_rad);
    traj.theta_elb.push_back(js.elbow_rad);
    traj.x_m.push_back(w.x_m);
    traj.y_m.push_back(w.y_m);
  }
  return traj;
}

}  // namespace emgshift::kin
