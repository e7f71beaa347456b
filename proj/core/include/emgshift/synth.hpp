#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emgshift/labeling.hpp"
#include "emgshift/signal.hpp"

namespace emgshift::synth {

enum Position : int { kLeft = 0, kCenter = 1, kRight = 2 };

std::string position_name(int pos);
int position_from_name(const std::string& name);

enum MuscleGroup : int { kFlexor = 0, kExtensor = 1, kNeutral = 2 };

// The 12 recording sites: biceps brachii x4, brachialis, brachioradialis
// (flexors), anconeus, triceps lateral x2, triceps long x2 (extensors),
// extensor carpi radialis longus (neutral stabilizer here).
struct MuscleModel {
  std::array<int, 12> group{kFlexor, kFlexor, kFlexor, kFlexor, kFlexor, kFlexor,
                            kExtensor, kExtensor, kExtensor, kExtensor, kExtensor, kNeutral};
  std::array<double, 12> base_gain{};
  double activation_tau_ms = 50.0;
  double omega_ref = 3.0;  // rad/s mapped to full activation

  static MuscleModel for_subject(std::uint64_t subject_seed);
};

// Electrode-position effects: per-channel gain multipliers, directional
// crosstalk from the neighbouring site the electrode moved toward, and an
// additive noise floor that does not scale with the gains.
struct ShiftModel {
  std::array<std::array<double, 12>, 3> gain{};  // [position][channel]
  std::array<double, 3> crosstalk{};             // [position]
  std::array<int, 3> crosstalk_dir{};            // -1, 0, +1 neighbour offset
  double noise_floor = 0.05;

  static ShiftModel for_subject(std::uint64_t subject_seed, double crosstalk, double gain_lo,
                                double gain_hi, double noise_floor);
  void validate() const;
};

struct SynthParams {
  int subjects = 3;
  int trials_per_position = 4;
  std::uint64_t seed = 42;
  double crosstalk = 0.1;
  double gain_lo = 0.6;
  double gain_hi = 1.4;
  double noise_floor = 0.05;
  double emg_rate_hz = 2000.0;
  labeling::LabelThresholds thresholds;
};

struct TrialData {
  dsp::SignalBuffer emg;            // 2000 Hz, 12 channels
  std::vector<int> labels;          // 20 Hz
  std::vector<double> label_time_s;
  std::vector<double> theta_elb_20hz;
  int task_kind = 0;
};

// One trial: task kinematics -> elbow velocity -> group activations ->
// gain-shaped band-limited carriers -> position gains, crosstalk and floor.
// The seed fixes the task execution and the carriers; the position picks the
// shift effects, so equal seeds across positions share the underlying
// activity. Task kind 0 holds the rest posture for the whole trial.
TrialData synthesize_trial(int task_kind, std::uint64_t seed, int position,
                           const MuscleModel& muscles, const ShiftModel& shift,
                           const SynthParams& params);

struct DatasetSummary {
  int trial_files = 0;
  int label_files = 0;
  int manifest_files = 0;
  std::filesystem::path root;
};

// Writes subject_XX/position_P/trial_NN.{csv,labels.csv,json} for every
// (subject, position, trial); task kinds cycle 1..5 over the trial index.
DatasetSummary generate_dataset(const std::filesystem::path& root, const SynthParams& params);

}  // namespace emgshift::synth
