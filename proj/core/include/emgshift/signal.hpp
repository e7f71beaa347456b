#pragma once

#include <string>
#include <vector>

namespace emgshift::dsp {

// Multi-channel time series. Channels are equal length; sample values are
// arbitrary units (volts for raw EMG).
struct SignalBuffer {
  std::vector<std::string> channel_names;
  double sample_rate_hz = 0.0;
  std::vector<std::vector<double>> samples;  // [channel][time]

  std::size_t channels() const { return samples.size(); }
  std::size_t length() const { return samples.empty() ? 0 : samples.front().size(); }
  void validate() const;  // throws std::invalid_argument on broken invariants
};

struct FilterSpec {
  int order = 6;  // overall band-pass order; must be even
  double low_hz = 40.0;
  double high_hz = 200.0;
};

// One second-order section, direct form II transposed.
struct Biquad {
  double b0 = 0, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

using SosCascade = std::vector<Biquad>;

// Digital Butterworth band-pass via the analog prototype, low-pass-to-band-pass
// transform, and bilinear transform with pre-warped edges. The -3 dB points
// land on low_hz/high_hz.
SosCascade design_bandpass(const FilterSpec& spec, double sample_rate_hz);

// Causal forward-only filtering, zero initial state, per channel.
SignalBuffer filter_stream(const SosCascade& sos, const SignalBuffer& buf);
std::vector<double> sosfilt(const SosCascade& sos, const std::vector<double>& x);

// Magnitude response of the cascade at frequency f.
double sos_gain(const SosCascade& sos, double f_hz, double sample_rate_hz);

// Keeps every factor-th sample starting at index 0. band_upper_hz > 0 enables
// the aliasing check against the post-decimation Nyquist.
SignalBuffer decimate(const SignalBuffer& buf, int factor, double band_upper_hz = 0.0);

enum class SwnMode { kBlock, kRolling };

struct SwnConfig {
  int window_len_ms = 200;
  SwnMode mode = SwnMode::kRolling;
  double epsilon = 1e-8;

  int window_samples(double sample_rate_hz) const;
};

// Sliding-window z-score normalization (population std).
//
// Block mode returns the trailing window (window_samples long), normalized by
// that window's mean and std. Rolling mode returns a buffer of the input
// length where sample n (n >= window-1) is normalized by the stats of the
// window ending at n; the first window-1 samples have no full window and are
// zero. Windows with std below epsilon output zeros.
SignalBuffer swn(const SignalBuffer& buf, const SwnConfig& cfg);

// Elementwise absolute value.
SignalBuffer rectify(const SignalBuffer& buf);

// One DNN input frame: [segment_len_samples x concat_channels], row-major,
// all values >= 0 after rectification.
struct FeatureFrame {
  int rows = 0;  // segment length in samples (100 ms at 500 Hz -> 50)
  int cols = 0;  // base channels x segment count
  std::vector<double> values;  // row-major
  double t_emit = 0.0;         // seconds
  int feature_len_ms = 0;

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

// Cuts the trailing feature_len_ms of the buffer into segment_ms windows with
// seg_hop_ms hop and stacks the segments along the channel axis. Column order
// is segment-major: col = segment * channels + channel, segments oldest first.
FeatureFrame segment_and_concat(const SignalBuffer& buf, int feature_len_ms,
                                int segment_ms = 100, int seg_hop_ms = 50);

struct PipelineConfig {
  FilterSpec filter;
  int decimation = 4;         // 2000 -> 500 Hz
  bool swn_enabled = true;
  SwnConfig swn;
  int feature_len_ms = 1000;
  double warmup_s = 0.5;      // filter transient excluded from emission
  int frame_hop_ms = 50;      // 20 Hz emission
  int segment_ms = 100;
  int seg_hop_ms = 50;
};

// Index of the first emission (in samples at the working rate) for a config:
// warmup, then normalization history when SWN is on, then one feature window,
// rounded up to the emission grid.
std::size_t first_emission_index(const PipelineConfig& cfg, double working_rate_hz);

// filter -> decimate -> (SWN) -> slice -> rectify -> segment/concat, emitting
// one frame per frame_hop_ms of signal time.
std::vector<FeatureFrame> run_pipeline(const SignalBuffer& raw, const PipelineConfig& cfg);

// The decimated, filtered and (optionally) rolling-normalized stream the
// frames are sliced from; shared by run_pipeline and the experiment runner.
SignalBuffer normalized_stream(const SignalBuffer& raw, const PipelineConfig& cfg);

}  // namespace emgshift::dsp
