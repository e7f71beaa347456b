#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace emgshift::kin {

struct ArmGeometry {
  double upper_arm_m = 0.3;
  double forearm_m = 0.3;
};

struct JointState {
  double shoulder_rad = 0.0;
  double elbow_rad = 0.0;  // elbow-up convention, [0, pi]
};

struct WristTarget {
  double x_m = 0.0;
  double y_m = 0.0;  // shoulder-origin plane
};

struct BoundaryState {
  double pos = 0.0;
  double vel = 0.0;
  double acc = 0.0;
};

struct MinJerkSegment {
  double t0 = 0.0;
  double t1 = 1.0;
  BoundaryState start;
  BoundaryState end;
};

// Quintic in normalized time tau = (t - t0) / (t1 - t0).
struct Quintic {
  double t0 = 0.0;
  double t1 = 1.0;
  std::array<double, 6> c{};  // position coefficients in tau

  double duration() const { return t1 - t0; }
  double pos(double t) const;
  double vel(double t) const;
  double acc(double t) const;
};

// Unique minimum-jerk quintic through the six boundary conditions, solved
// from the 6x6 linear system in normalized time.
Quintic min_jerk_coeffs(const MinJerkSegment& seg);

WristTarget forward_kinematics(const JointState& joints, const ArmGeometry& arm);

// Elbow-up closed-form solution. Throws for unreachable targets; radicands
// within 1e-9 of zero (full extension) are clamped.
JointState inverse_kinematics(const WristTarget& target, const ArmGeometry& arm);

enum class TaskSpace { kJoint, kCartesian };

struct TaskAction {
  bool move = false;       // false: hold current posture
  TaskSpace space = TaskSpace::kJoint;
  double a = 0.0;          // joint: shoulder target; cartesian: x target
  double b = 0.0;          // joint: elbow target;    cartesian: y target
  double duration_s = 1.0;
};

struct TaskScript {
  JointState start{0.52, 1.40};
  std::vector<TaskAction> cycle;  // repeated until the trial fills
};

// The five shipped task scripts; a JSON file can replace any of them.
struct TaskLibrary {
  std::array<TaskScript, 5> tasks;

  static TaskLibrary defaults();
  static TaskLibrary from_json_file(const std::filesystem::path& path);
};

struct TaskSegment {
  TaskSpace space = TaskSpace::kJoint;
  Quintic a;  // joint: shoulder; cartesian: x
  Quintic b;  // joint: elbow;    cartesian: y
};

struct TaskTrajectory {
  double rate_hz = 120.0;
  std::vector<double> time_s;
  std::vector<double> theta_sld;
  std::vector<double> theta_elb;
  std::vector<double> x_m;
  std::vector<double> y_m;
  std::vector<TaskSegment> segments;
};

// 60 s trajectory at 120 Hz for task kind 1..5. The seed jitters segment
// durations and amplitudes so repeated trials differ; all segments keep zero
// boundary velocity and acceleration.
TaskTrajectory generate_task(int kind, std::uint64_t seed, const ArmGeometry& arm = {},
                             const TaskLibrary* library = nullptr);

}  // namespace emgshift::kin
