#pragma once

#include <vector>

namespace emgshift::labeling {

enum Label : int { kRest = 0, kFlexion = 1, kExtension = 2 };

struct LabelThresholds {
  double th_omega1 = 3.0;  // rad/s, movement detection
  double th_omega2 = 1.0;  // rad/s, onset/offset expansion
  double th_slope = 5.0;   // rad/s^2, gap bridging
  int w_t_ms = 200;        // minimum run duration
  double rate_hz = 20.0;

  int min_run_samples() const;
};

struct LabelSeries {
  std::vector<int> labels;
  std::vector<double> omega;  // rad/s, aligned with labels
};

// Forward difference scaled by the sample rate; the last value is repeated to
// preserve length.
std::vector<double> angular_velocity(const std::vector<double>& theta_rad, double rate_hz);

// Step 1: threshold on omega (flexion above +th1, extension below -th1).
LabelSeries step1_threshold(const std::vector<double>& omega, const LabelThresholds& th);

// Step 2: movement runs shorter than w_t become rest.
LabelSeries step2_drop_short(const LabelSeries& in, const LabelThresholds& th);

// Step 3: each movement run grows outward to the nearest |omega| <= th2
// crossings.
LabelSeries step3_extend_onsets(const LabelSeries& in, const LabelThresholds& th);

// Step 4: rest gaps between two movements become movement when the gap's mean
// omega clears th2 and its least-squares slope clears th_slope.
LabelSeries step4_bridge_transitions(const LabelSeries& in, const LabelThresholds& th);

// Step 5: runs shorter than w_t absorb the preceding run's label (the
// following run's label at the series start); repeated until stable.
LabelSeries step5_absorb_short(const LabelSeries& in, const LabelThresholds& th);

// Steps 1-5 from a joint-angle series sampled at th.rate_hz.
LabelSeries label_pipeline(const std::vector<double>& theta_rad, const LabelThresholds& th);

}  // namespace emgshift::labeling
