#include "emgshift/synth.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "emgshift/io.hpp"
#include "emgshift/kinematics.hpp"
#include "emgshift/rng.hpp"

namespace emgshift::synth {

std::string position_name(int pos) {
  switch (pos) {
    case kLeft: return "left";
    case kCenter: return "center";
    case kRight: return "right";
  }
  throw std::invalid_argument("position_name: bad position");
}

int position_from_name(const std::string& name) {
  if (name == "left") return kLeft;
  if (name == "center") return kCenter;
  if (name == "right") return kRight;
  throw std::invalid_argument("position_from_name: '" + name + "'");
}

MuscleModel MuscleModel::for_subject(std::uint64_t subject_seed) {
  MuscleModel m;
  CounterRng rng = CounterRng(subject_seed).split("muscle-gains");
  for (double& g : m.base_gain) g = rng.uniform(0.8, 1.2);
  return m;
}

ShiftModel ShiftModel::for_subject(std::uint64_t subject_seed, double crosstalk, double gain_lo,
                                   double gain_hi, double noise_floor) {
  ShiftModel s;
  s.noise_floor = noise_floor;
  s.crosstalk = {crosstalk, 0.0, crosstalk};
  s.crosstalk_dir = {-1, 0, +1};
  for (int pos = 0; pos < 3; ++pos) {
    CounterRng rng = CounterRng(subject_seed).split("shift-gains", static_cast<std::uint64_t>(pos));
    for (double& g : s.gain[static_cast<std::size_t>(pos)])
      g = (pos == kCenter) ? 1.0 : rng.uniform(gain_lo, gain_hi);
  }
  s.validate();
  return s;
}

void ShiftModel::validate() const {
  for (const auto& pos : gain)
    for (double g : pos)
      if (g < 0.3 || g > 2.0)
        throw std::invalid_argument("ShiftModel: gain outside [0.3, 2.0]");
  for (double k : crosstalk)
    if (k < 0.0 || k > 0.5)
      throw std::invalid_argument("ShiftModel: crosstalk outside [0, 0.5]");
}

namespace {

// First-order low-pass, exact discrete step.
void smooth_inplace(std::vector<double>& x, double tau_ms, double rate_hz) {
  const double alpha = 1.0 - std::exp(-1000.0 / (tau_ms * rate_hz));
  double y = 0.0;
  for (double& v : x) {
    y += alpha * (v - y);
    v = y;
  }
}

std::vector<double> linear_resample(const std::vector<double>& x, double from_hz, double to_hz,
                                    std::size_t out_len) {
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double t = static_cast<double>(i) / to_hz * from_hz;
    const std::size_t k = std::min(static_cast<std::size_t>(t), x.size() - 1);
    const std::size_t k1 = std::min(k + 1, x.size() - 1);
    const double frac = t - static_cast<double>(k);
    out[i] = x[k] + (x[k1] - x[k]) * frac;
  }
  return out;
}

}  // namespace

TrialData synthesize_trial(int task_kind, std::uint64_t seed, int position,
                           const MuscleModel& muscles, const ShiftModel& shift,
                           const SynthParams& params) {
  if (position < 0 || position > 2) throw std::invalid_argument("synthesize_trial: bad position");
  constexpr double kTaskRate = 120.0;
  constexpr double kLabelRate = 20.0;
  const double fs = params.emg_rate_hz;
  TrialData out;
  out.task_kind = task_kind;

  // Elbow angle at the task rate; kind 0 is a rest hold.
  std::vector<double> theta;
  if (task_kind == 0) {
    theta.assign(static_cast<std::size_t>(60.0 * kTaskRate), 1.4);
  } else {
    const kin::TaskTrajectory traj = kin::generate_task(task_kind, seed);
    theta = traj.theta_elb;
  }

  std::vector<double> omega(theta.size(), 0.0);
  for (std::size_t i = 0; i + 1 < theta.size(); ++i)
    omega[i] = (theta[i + 1] - theta[i]) * kTaskRate;
  if (omega.size() > 1) omega.back() = omega[omega.size() - 2];

  const std::size_t n = static_cast<std::size_t>(std::llround(60.0 * fs));
  std::vector<double> omega_hi = linear_resample(omega, kTaskRate, fs, n);

  // Group activations, saturating near omega_ref and smoothed by the
  // electromechanical time constant.
  std::array<std::vector<double>, 3> act;
  for (auto& a : act) a.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = omega_hi[i];
    act[kFlexor][i] = std::clamp(std::max(0.0, w) / muscles.omega_ref, 0.0, 2.0);
    act[kExtensor][i] = std::clamp(std::max(0.0, -w) / muscles.omega_ref, 0.0, 2.0);
    act[kNeutral][i] = 0.15 * (act[kFlexor][i] + act[kExtensor][i]);
  }
  for (auto& a : act) smooth_inplace(a, muscles.activation_tau_ms, fs);

  // Per-channel band-limited unit-variance carriers, seeded independently of
  // the electrode position.
  const dsp::SosCascade sos = dsp::design_bandpass({6, 40.0, 200.0}, fs);
  std::vector<std::vector<double>> active(12);
  for (int c = 0; c < 12; ++c) {
    CounterRng rng = CounterRng(seed).split("carrier", static_cast<std::uint64_t>(c));
    std::vector<double> noise(n);
    for (double& v : noise) v = rng.normal();
    noise = dsp::sosfilt(sos, noise);
    double mean = 0.0;
    for (double v : noise) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : noise) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv_std = var > 0 ? 1.0 / std::sqrt(var) : 0.0;
    auto& sig = active[static_cast<std::size_t>(c)];
    sig.assign(n, 0.0);
    const auto& a = act[static_cast<std::size_t>(muscles.group[static_cast<std::size_t>(c)])];
    const double g = muscles.base_gain[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < n; ++i) sig[i] = g * a[i] * noise[i] * inv_std;
  }

  // Shift effects: gain, directional crosstalk, additive floor.
  out.emg.sample_rate_hz = fs;
  out.emg.samples.resize(12);
  char name[8];
  const double kappa = shift.crosstalk[static_cast<std::size_t>(position)];
  const int dir = shift.crosstalk_dir[static_cast<std::size_t>(position)];
  for (int c = 0; c < 12; ++c) {
    std::snprintf(name, sizeof(name), "ch%02d", c + 1);
    out.emg.channel_names.emplace_back(name);
    const int nb = c + dir;
    const std::vector<double>* neighbour =
        (dir != 0 && nb >= 0 && nb < 12) ? &active[static_cast<std::size_t>(nb)] : nullptr;
    CounterRng floor_rng =
        CounterRng(seed).split("floor", static_cast<std::uint64_t>(position * 16 + c));
    const double g = shift.gain[static_cast<std::size_t>(position)][static_cast<std::size_t>(c)];
    auto& ch = out.emg.samples[static_cast<std::size_t>(c)];
    ch.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double v = active[static_cast<std::size_t>(c)][i];
      if (neighbour && kappa > 0.0) v += kappa * (*neighbour)[i];
      ch[i] = g * v + shift.noise_floor * floor_rng.normal();
    }
  }

  // Labels from the elbow angle downsampled to the mocap rate.
  std::vector<double> theta20;
  for (std::size_t i = 0; i < theta.size(); i += 6) theta20.push_back(theta[i]);
  labeling::LabelThresholds th = params.thresholds;
  th.rate_hz = kLabelRate;
  const labeling::LabelSeries series = labeling::label_pipeline(theta20, th);
  out.labels = series.labels;
  out.theta_elb_20hz = theta20;
  out.label_time_s.resize(out.labels.size());
  for (std::size_t i = 0; i < out.labels.size(); ++i)
    out.label_time_s[i] = static_cast<double>(i) / kLabelRate;
  return out;
}

DatasetSummary generate_dataset(const std::filesystem::path& root, const SynthParams& params) {
  namespace fs = std::filesystem;
  DatasetSummary summary;
  summary.root = root;
  fs::create_directories(root);

  for (int s = 0; s < params.subjects; ++s) {
    const std::uint64_t subject_seed =
        CounterRng(params.seed).split("subject", static_cast<std::uint64_t>(s)).next_u64();
    const MuscleModel muscles = MuscleModel::for_subject(subject_seed);
    const ShiftModel shift = ShiftModel::for_subject(subject_seed, params.crosstalk,
                                                     params.gain_lo, params.gain_hi,
                                                     params.noise_floor);
    char sub_name[32];
    std::snprintf(sub_name, sizeof(sub_name), "subject_%02d", s);
    for (int pos = 0; pos < 3; ++pos) {
      const fs::path dir = root / sub_name / ("position_" + position_name(pos));
      fs::create_directories(dir);
      for (int t = 0; t < params.trials_per_position; ++t) {
        const int kind = t % 5 + 1;
        const std::uint64_t trial_seed =
            CounterRng(subject_seed)
                .split("trial", static_cast<std::uint64_t>(pos * 1000 + t))
                .next_u64();
        const TrialData trial = synthesize_trial(kind, trial_seed, pos, muscles, shift, params);

        char base[32];
        std::snprintf(base, sizeof(base), "trial_%02d", t);
        io::write_trial_csv(dir / (std::string(base) + ".csv"), trial.emg);
        io::write_labels_csv(dir / (std::string(base) + ".labels.csv"), trial.label_time_s,
                             trial.labels);
        io::TrialManifest m;
        m.subject = sub_name;
        m.session = pos + 1;
        m.electrode_position = position_name(pos);
        m.sample_rate_hz = params.emg_rate_hz;
        m.channels = trial.emg.channel_names;
        m.format = "csv";
        m.data_file = std::string(base) + ".csv";
        io::write_manifest(dir / (std::string(base) + ".json"), m);
        ++summary.trial_files;
        ++summary.label_files;
        ++summary.manifest_files;
      }
    }
  }
  return summary;
}

}  // namespace emgshift::synth
