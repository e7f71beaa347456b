#include "emgshift/labeling.hpp"

#include <cmath>
#include <stdexcept>

namespace emgshift::labeling {

namespace {

struct Run {
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  int label = kRest;

  std::size_t length() const { return end - begin; }
};

std::vector<Run> find_runs(const std::vector<int>& labels) {
  std::vector<Run> runs;
  std::size_t i = 0;
  while (i < labels.size()) {
    Run r;
    r.begin = i;
    r.label = labels[i];
    while (i < labels.size() && labels[i] == r.label) ++i;
    r.end = i;
    runs.push_back(r);
  }
  return runs;
}

}  // namespace

int LabelThresholds::min_run_samples() const {
  return static_cast<int>(std::lround(w_t_ms * rate_hz / 1000.0));
}

std::vector<double> angular_velocity(const std::vector<double>& theta_rad, double rate_hz) {
  if (theta_rad.size() < 2)
    throw std::invalid_argument("angular_velocity: need at least 2 samples");
  std::vector<double> omega(theta_rad.size());
  for (std::size_t i = 0; i + 1 < theta_rad.size(); ++i)
    omega[i] = (theta_rad[i + 1] - theta_rad[i]) * rate_hz;
  omega.back() = omega[omega.size() - 2];
  return omega;
}

LabelSeries step1_threshold(const std::vector<double>& omega, const LabelThresholds& th) {
  LabelSeries out;
  out.omega = omega;
  out.labels.resize(omega.size(), kRest);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] > th.th_omega1)
      out.labels[i] = kFlexion;
    else if (omega[i] < -th.th_omega1)
      out.labels[i] = kExtension;
  }
  return out;
}

LabelSeries step2_drop_short(const LabelSeries& in, const LabelThresholds& th) {
  LabelSeries out = in;
  const std::size_t min_len = static_cast<std::size_t>(th.min_run_samples());
  for (const Run& r : find_runs(in.labels)) {
    if (r.label != kRest && r.length() < min_len)
      for (std::size_t i = r.begin; i < r.end; ++i) out.labels[i] = kRest;
  }
  return out;
}

LabelSeries step3_extend_onsets(const LabelSeries& in, const LabelThresholds& th) {
  LabelSeries out = in;
  for (const Run& r : find_runs(in.labels)) {
    if (r.label == kRest) continue;
    // Backward from the onset, forward from the offset, while |omega| stays
    // above th2 and the labels are still rest.
    std::size_t i = r.begin;
    while (i > 0 && out.labels[i - 1] == kRest && std::abs(out.omega[i - 1]) > th.th_omega2) {
      --i;
      out.labels[i] = r.label;
    }
    std::size_t j = r.end;
    while (j < out.labels.size() && out.labels[j] == kRest &&
           std::abs(out.omega[j]) > th.th_omega2) {
      out.labels[j] = r.label;
      ++j;
    }
  }
  return out;
}

LabelSeries step4_bridge_transitions(const LabelSeries& in, const LabelThresholds& th) {
  LabelSeries out = in;
  const auto runs = find_runs(in.labels);
  const double dt = 1.0 / th.rate_hz;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const Run& r = runs[k];
    if (r.label != kRest) continue;
    if (k == 0 || k + 1 == runs.size()) continue;  // trial edge, not a gap
    if (runs[k - 1].label == kRest || runs[k + 1].label == kRest) continue;

    double mean_omega = 0.0;
    for (std::size_t i = r.begin; i < r.end; ++i) mean_omega += in.omega[i];
    mean_omega /= static_cast<double>(r.length());

    // Ordinary least squares slope of omega over time in the gap.
    double slope = 0.0;
    if (r.length() >= 2) {
      double st = 0, so = 0, stt = 0, sto = 0;
      for (std::size_t i = r.begin; i < r.end; ++i) {
        const double t = static_cast<double>(i) * dt;
        st += t;
        so += in.omega[i];
        stt += t * t;
        sto += t * in.omega[i];
      }
      const double n = static_cast<double>(r.length());
      slope = (n * sto - st * so) / (n * stt - st * st);
    }

    int relabel = -1;
    if (mean_omega >= th.th_omega2 && slope >= th.th_slope)
      relabel = kFlexion;
    else if (mean_omega < -th.th_omega2 && slope >= th.th_slope)
      relabel = kExtension;
    if (relabel >= 0)
      for (std::size_t i = r.begin; i < r.end; ++i) out.labels[i] = relabel;
  }
  return out;
}

LabelSeries step5_absorb_short(const LabelSeries& in, const LabelThresholds& th) {
  LabelSeries out = in;
  const std::size_t min_len = static_cast<std::size_t>(th.min_run_samples());
  while (true) {
    const auto runs = find_runs(out.labels);
    if (runs.size() <= 1) break;
    bool changed = false;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      if (runs[k].length() >= min_len) continue;
      const int take = (k > 0) ? runs[k - 1].label : runs[k + 1].label;
      for (std::size_t i = runs[k].begin; i < runs[k].end; ++i) out.labels[i] = take;
      changed = true;
      break;  // run boundaries moved; rescan
    }
    if (!changed) break;
  }
  return out;
}

LabelSeries label_pipeline(const std::vector<double>& theta_rad, const LabelThresholds& th) {
  const auto omega = angular_velocity(theta_rad, th.rate_hz);
  LabelSeries s = step1_threshold(omega, th);
  s = step2_drop_short(s, th);
  s = step3_extend_onsets(s, th);
  s = step4_bridge_transitions(s, th);
  s = step5_absorb_short(s, th);
  return s;
}

}  // namespace emgshift::labeling
