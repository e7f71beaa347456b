#include "emgshift/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace emgshift::dsp {

namespace {

using cplx = std::complex<double>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void SignalBuffer::validate() const {
  require(sample_rate_hz > 0.0, "SignalBuffer: sample_rate_hz must be positive");
  for (const auto& ch : samples) {
    require(ch.size() == length(), "SignalBuffer: channels differ in length");
    for (double v : ch)
      require(std::isfinite(v), "SignalBuffer: non-finite sample");
  }
}

int SwnConfig::window_samples(double sample_rate_hz) const {
  const double exact = window_len_ms * sample_rate_hz / 1000.0;
  const int n = static_cast<int>(std::lround(exact));
  require(n >= 1 && std::abs(exact - n) < 1e-9,
          "SwnConfig: window_len_ms must map to an integer sample count");
  return n;
}

SosCascade design_bandpass(const FilterSpec& spec, double sample_rate_hz) {
  require(sample_rate_hz > 0, "design_bandpass: bad sample rate");
  require(spec.order >= 2 && spec.order % 2 == 0,
          "design_bandpass: band-pass order must be a positive even number");
  require(spec.low_hz > 0 && spec.low_hz < spec.high_hz &&
              spec.high_hz < sample_rate_hz / 2.0,
          "design_bandpass: need 0 < low < high < Nyquist");

  const int n = spec.order / 2;  // low-pass prototype order
  const double fs2 = 2.0 * sample_rate_hz;

  // Pre-warped analog edges.
  const double w1 = fs2 * std::tan(std::numbers::pi * spec.low_hz / sample_rate_hz);
  const double w2 = fs2 * std::tan(std::numbers::pi * spec.high_hz / sample_rate_hz);
  const double w0sq = w1 * w2;
  const double bw = w2 - w1;

  // Butterworth prototype poles on the unit circle, left half plane.
  std::vector<cplx> proto;
  for (int k = 0; k < n; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n + 1.0) / (2.0 * n);
    proto.emplace_back(std::cos(theta), std::sin(theta));
  }

  // Low-pass -> band-pass: each prototype pole yields the two roots of
  // s^2 - bw*p*s + w0^2 = 0. Zeros: n at s=0 plus n at infinity.
  std::vector<cplx> apoles;
  for (const cplx& p : proto) {
    const cplx bp = bw * p;
    const cplx disc = std::sqrt(bp * bp - 4.0 * w0sq);
    apoles.push_back((bp + disc) / 2.0);
    apoles.push_back((bp - disc) / 2.0);
  }

  // Bilinear transform. Analog zeros at 0 map to z=1, the ones at infinity
  // to z=-1; overall gain k = bw^n * prod(fs2 - 0) / prod(fs2 - pole).
  std::vector<cplx> zpoles;
  cplx gain = std::pow(cplx(bw * fs2, 0.0), n);
  for (const cplx& s : apoles) {
    zpoles.push_back((fs2 + s) / (fs2 - s));
    gain /= (fs2 - s);
  }
  const double k = gain.real();

  // Pair conjugate poles into biquads with zeros {+1, -1} each; leftover real
  // poles (wide bands only) are paired together.
  std::vector<cplx> upper;
  std::vector<double> reals;
  for (const cplx& p : zpoles) {
    if (std::abs(p.imag()) > 1e-12) {
      if (p.imag() > 0) upper.push_back(p);
    } else {
      reals.push_back(p.real());
    }
  }
  require(reals.size() % 2 == 0, "design_bandpass: unpaired real pole");
  std::sort(upper.begin(), upper.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) > std::abs(b); });
  std::sort(reals.begin(), reals.end());

  SosCascade sos;
  for (const cplx& p : upper) {
    Biquad s;
    s.b0 = 1.0; s.b1 = 0.0; s.b2 = -1.0;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    sos.push_back(s);
  }
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    Biquad s;
    s.b0 = 1.0; s.b1 = 0.0; s.b2 = -1.0;
    s.a1 = -(reals[i] + reals[i + 1]);
    s.a2 = reals[i] * reals[i + 1];
    sos.push_back(s);
  }
  require(sos.size() == static_cast<std::size_t>(n), "design_bandpass: section count mismatch");
  sos.front().b0 *= k;
  sos.front().b2 *= k;
  return sos;
}

std::vector<double> sosfilt(const SosCascade& sos, const std::vector<double>& x) {
  std::vector<double> y = x;
  for (const Biquad& s : sos) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

SignalBuffer filter_stream(const SosCascade& sos, const SignalBuffer& buf) {
  SignalBuffer out = buf;
  for (auto& ch : out.samples) ch = sosfilt(sos, ch);
  return out;
}

double sos_gain(const SosCascade& sos, double f_hz, double sample_rate_hz) {
  const double w = 2.0 * std::numbers::pi * f_hz / sample_rate_hz;
  const cplx z1 = std::exp(cplx(0.0, -w));
  const cplx z2 = z1 * z1;
  cplx h(1.0, 0.0);
  for (const Biquad& s : sos)
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return std::abs(h);
}

SignalBuffer decimate(const SignalBuffer& buf, int factor, double band_upper_hz) {
  require(factor >= 1, "decimate: factor must be >= 1");
  const double new_rate = buf.sample_rate_hz / factor;
  if (band_upper_hz > 0.0)
    require(band_upper_hz < new_rate / 2.0,
            "decimate: band upper edge would alias past the new Nyquist");
  SignalBuffer out;
  out.channel_names = buf.channel_names;
  out.sample_rate_hz = new_rate;
  out.samples.reserve(buf.channels());
  for (const auto& ch : buf.samples) {
    std::vector<double> d;
    d.reserve(ch.size() / factor + 1);
    for (std::size_t i = 0; i < ch.size(); i += factor) d.push_back(ch[i]);
    out.samples.push_back(std::move(d));
  }
  return out;
}

namespace {

// Population mean/std of x[first, first+len). Shared by both modes so the
// rolling output matches block output bit for bit.
void window_stats(const std::vector<double>& x, std::size_t first, std::size_t len,
                  double& mean, double& std_out) {
  double sum = 0.0;
  for (std::size_t i = first; i < first + len; ++i) sum += x[i];
  mean = sum / static_cast<double>(len);
  double ss = 0.0;
  for (std::size_t i = first; i < first + len; ++i) {
    const double d = x[i] - mean;
    ss += d * d;
  }
  std_out = std::sqrt(ss / static_cast<double>(len));
}

}  // namespace

SignalBuffer swn(const SignalBuffer& buf, const SwnConfig& cfg) {
  const std::size_t win = static_cast<std::size_t>(cfg.window_samples(buf.sample_rate_hz));
  if (buf.length() < win)
    throw std::invalid_argument("swn: buffer shorter than the normalization window");

  SignalBuffer out;
  out.channel_names = buf.channel_names;
  out.sample_rate_hz = buf.sample_rate_hz;
  out.samples.resize(buf.channels());

  for (std::size_t c = 0; c < buf.channels(); ++c) {
    const auto& x = buf.samples[c];
    auto& y = out.samples[c];
    if (cfg.mode == SwnMode::kBlock) {
      const std::size_t first = x.size() - win;
      double m, s;
      window_stats(x, first, win, m, s);
      y.resize(win, 0.0);
      if (s >= cfg.epsilon)
        for (std::size_t i = 0; i < win; ++i) y[i] = (x[first + i] - m) / s;
    } else {
      y.assign(x.size(), 0.0);
      for (std::size_t nidx = win - 1; nidx < x.size(); ++nidx) {
        double m, s;
        window_stats(x, nidx + 1 - win, win, m, s);
        if (s >= cfg.epsilon) y[nidx] = (x[nidx] - m) / s;
      }
    }
  }
  return out;
}

SignalBuffer rectify(const SignalBuffer& buf) {
  SignalBuffer out = buf;
  for (auto& ch : out.samples)
    for (double& v : ch) v = std::abs(v);
  return out;
}

FeatureFrame segment_and_concat(const SignalBuffer& buf, int feature_len_ms,
                                int segment_ms, int seg_hop_ms) {
  const double fs = buf.sample_rate_hz;
  const auto to_samples = [&](int ms) {
    const double exact = ms * fs / 1000.0;
    const int n = static_cast<int>(std::lround(exact));
    require(std::abs(exact - n) < 1e-9, "segment_and_concat: length not integral in samples");
    return n;
  };
  const int feat_s = to_samples(feature_len_ms);
  const int seg_s = to_samples(segment_ms);
  const int hop_s = to_samples(seg_hop_ms);
  require(feat_s >= seg_s, "segment_and_concat: feature window shorter than one segment");
  require((feat_s - seg_s) % hop_s == 0,
          "segment_and_concat: feature window is not an integer number of segments");
  require(buf.length() >= static_cast<std::size_t>(feat_s),
          "segment_and_concat: buffer shorter than the feature window");

  const int n_seg = (feat_s - seg_s) / hop_s + 1;
  const int chans = static_cast<int>(buf.channels());

  FeatureFrame f;
  f.rows = seg_s;
  f.cols = chans * n_seg;
  f.feature_len_ms = feature_len_ms;
  f.values.assign(static_cast<std::size_t>(f.rows) * f.cols, 0.0);

  const std::size_t start = buf.length() - static_cast<std::size_t>(feat_s);
  for (int s = 0; s < n_seg; ++s) {
    const std::size_t seg_start = start + static_cast<std::size_t>(s) * hop_s;
    for (int c = 0; c < chans; ++c) {
      const int col = s * chans + c;
      const auto& ch = buf.samples[static_cast<std::size_t>(c)];
      for (int r = 0; r < seg_s; ++r)
        f.values[static_cast<std::size_t>(r) * f.cols + col] = ch[seg_start + r];
    }
  }
  return f;
}

std::size_t first_emission_index(const PipelineConfig& cfg, double working_rate_hz) {
  const auto samples = [&](double ms) {
    return static_cast<std::size_t>(std::lround(ms * working_rate_hz / 1000.0));
  };
  std::size_t e0 = samples(cfg.warmup_s * 1000.0) + samples(cfg.feature_len_ms);
  if (cfg.swn_enabled) e0 += static_cast<std::size_t>(cfg.swn.window_samples(working_rate_hz));
  const std::size_t hop = samples(cfg.frame_hop_ms);
  return (e0 + hop - 1) / hop * hop;
}

SignalBuffer normalized_stream(const SignalBuffer& raw, const PipelineConfig& cfg) {
  raw.validate();
  const SosCascade sos = design_bandpass(cfg.filter, raw.sample_rate_hz);
  SignalBuffer work = decimate(filter_stream(sos, raw), cfg.decimation, cfg.filter.high_hz);
  if (cfg.swn_enabled && cfg.swn.mode == SwnMode::kRolling) {
    SwnConfig rolling = cfg.swn;
    work = swn(work, rolling);
  }
  return work;
}

std::vector<FeatureFrame> run_pipeline(const SignalBuffer& raw, const PipelineConfig& cfg) {
  const bool block_mode = cfg.swn_enabled && cfg.swn.mode == SwnMode::kBlock;
  if (block_mode)
    require(cfg.feature_len_ms <= cfg.swn.window_len_ms,
            "run_pipeline: block-mode SWN needs feature window <= normalization window");

  SignalBuffer work;
  if (block_mode) {
    PipelineConfig pre = cfg;
    pre.swn_enabled = false;
    work = normalized_stream(raw, pre);
  } else {
    work = normalized_stream(raw, cfg);
  }
  const double fs = work.sample_rate_hz;
  const std::size_t feat_s = static_cast<std::size_t>(std::lround(cfg.feature_len_ms * fs / 1000.0));
  const std::size_t hop = static_cast<std::size_t>(std::lround(cfg.frame_hop_ms * fs / 1000.0));
  const std::size_t e0 = first_emission_index(cfg, fs);

  std::vector<FeatureFrame> frames;
  for (std::size_t e = e0; e <= work.length(); e += hop) {
    SignalBuffer slice;
    slice.channel_names = work.channel_names;
    slice.sample_rate_hz = fs;
    slice.samples.resize(work.channels());
    if (block_mode) {
      // Re-normalize the trailing window at each emission, then slice.
      SignalBuffer win;
      win.channel_names = work.channel_names;
      win.sample_rate_hz = fs;
      win.samples.resize(work.channels());
      const std::size_t wlen = static_cast<std::size_t>(cfg.swn.window_samples(fs));
      for (std::size_t c = 0; c < work.channels(); ++c)
        win.samples[c].assign(work.samples[c].begin() + (e - wlen), work.samples[c].begin() + e);
      win = swn(win, cfg.swn);
      for (std::size_t c = 0; c < work.channels(); ++c)
        slice.samples[c].assign(win.samples[c].end() - feat_s, win.samples[c].end());
    } else {
      for (std::size_t c = 0; c < work.channels(); ++c)
        slice.samples[c].assign(work.samples[c].begin() + (e - feat_s), work.samples[c].begin() + e);
    }
    FeatureFrame f = segment_and_concat(rectify(slice), cfg.feature_len_ms, cfg.segment_ms,
                                        cfg.seg_hop_ms);
    f.t_emit = static_cast<double>(e) / fs;
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace emgshift::dsp
