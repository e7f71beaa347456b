#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "emgshift/nn/tensor.hpp"
#include "emgshift/rng.hpp"

namespace emgshift::nn {

constexpr double kLnEpsilon = 1e-12;

// Layer normalization across the channel axis at every temporal position,
// with a learned per-channel affine. Activations are laid out as
// [frames x channels x len] (len = 1 for plain feature vectors).
template <class T>
struct LayerNorm {
  Param<T> gamma;
  Param<T> beta;
  int channels = 0;

  // per-call caches
  std::vector<T> mean, inv_std;  // [frames * len]
  const T* x_in = nullptr;
  int frames = 0, len = 0;

  void init(const std::string& prefix, int c) {
    channels = c;
    gamma.name = prefix + ".gamma";
    beta.name = prefix + ".beta";
    gamma.init_shape({c});
    beta.init_shape({c});
    gamma.value.fill(T(1));
  }

  // y[f,c,l] = gamma[c] * xhat + beta[c], stats over c at each (f,l).
  void forward(const T* x, T* y, int f_count, int l_count) {
    frames = f_count;
    len = l_count;
    x_in = x;
    const int c_count = channels;
    mean.assign(static_cast<std::size_t>(f_count) * l_count, T(0));
    inv_std.assign(mean.size(), T(0));
    for (int f = 0; f < f_count; ++f) {
      const T* xf = x + static_cast<std::size_t>(f) * c_count * l_count;
      T* yf = y + static_cast<std::size_t>(f) * c_count * l_count;
      for (int l = 0; l < l_count; ++l) {
        T mu = 0;
        for (int c = 0; c < c_count; ++c) mu += xf[static_cast<std::size_t>(c) * l_count + l];
        mu /= static_cast<T>(c_count);
        T var = 0;
        for (int c = 0; c < c_count; ++c) {
          const T d = xf[static_cast<std::size_t>(c) * l_count + l] - mu;
          var += d * d;
        }
        var /= static_cast<T>(c_count);
        const T istd = T(1) / std::sqrt(var + static_cast<T>(kLnEpsilon));
        const std::size_t sidx = static_cast<std::size_t>(f) * l_count + l;
        mean[sidx] = mu;
        inv_std[sidx] = istd;
        for (int c = 0; c < c_count; ++c) {
          const std::size_t i = static_cast<std::size_t>(c) * l_count + l;
          yf[i] = gamma.value.v[static_cast<std::size_t>(c)] * (xf[i] - mu) * istd +
                  beta.value.v[static_cast<std::size_t>(c)];
        }
      }
    }
  }

  void backward(const T* dy, T* dx) {
    const int c_count = channels;
    for (int f = 0; f < frames; ++f) {
      const T* xf = x_in + static_cast<std::size_t>(f) * c_count * len;
      const T* dyf = dy + static_cast<std::size_t>(f) * c_count * len;
      T* dxf = dx + static_cast<std::size_t>(f) * c_count * len;
      for (int l = 0; l < len; ++l) {
        const std::size_t sidx = static_cast<std::size_t>(f) * len + l;
        const T mu = mean[sidx];
        const T istd = inv_std[sidx];
        T sum_dyg = 0, sum_dyg_xhat = 0;
        for (int c = 0; c < c_count; ++c) {
          const std::size_t i = static_cast<std::size_t>(c) * len + l;
          const T xhat = (xf[i] - mu) * istd;
          const T dyg = dyf[i] * gamma.value.v[static_cast<std::size_t>(c)];
          gamma.grad.v[static_cast<std::size_t>(c)] += dyf[i] * xhat;
          beta.grad.v[static_cast<std::size_t>(c)] += dyf[i];
          sum_dyg += dyg;
          sum_dyg_xhat += dyg * xhat;
        }
        const T inv_c = T(1) / static_cast<T>(c_count);
        for (int c = 0; c < c_count; ++c) {
          const std::size_t i = static_cast<std::size_t>(c) * len + l;
          const T xhat = (xf[i] - mu) * istd;
          const T dyg = dyf[i] * gamma.value.v[static_cast<std::size_t>(c)];
          dxf[i] = istd * (dyg - inv_c * sum_dyg - xhat * inv_c * sum_dyg_xhat);
        }
      }
    }
  }
};

// 1D convolution, kernel 3, stride 1, padding 2; output channels equal input
// channels, so length grows by 2.
template <class T>
struct Conv1d {
  Param<T> w;  // [3 x C x C]: one CxC matrix per tap
  Param<T> b;  // [C]
  int channels = 0;

  std::vector<T> xp;  // padded input cache [F x C x (L+4)]
  int frames = 0, len_in = 0;

  void init(const std::string& prefix, int c, CounterRng& rng) {
    channels = c;
    w.name = prefix + ".w";
    b.name = prefix + ".b";
    w.init_shape({3, c, c});
    b.init_shape({c});
    const double bound = 1.0 / std::sqrt(3.0 * c);
    for (auto& x : w.value.v) x = static_cast<T>(rng.uniform(-bound, bound));
    for (auto& x : b.value.v) x = static_cast<T>(rng.uniform(-bound, bound));
  }

  int len_out() const { return len_in + 2; }

  void forward(const T* x, T* y, int f_count, int l_count) {
    frames = f_count;
    len_in = l_count;
    const int c = channels;
    const int lp = l_count + 4;
    const int lo = l_count + 2;
    xp.assign(static_cast<std::size_t>(f_count) * c * lp, T(0));
    for (int f = 0; f < f_count; ++f)
      for (int ch = 0; ch < c; ++ch) {
        const T* src = x + (static_cast<std::size_t>(f) * c + ch) * l_count;
        T* dst = &xp[(static_cast<std::size_t>(f) * c + ch) * lp + 2];
        std::copy(src, src + l_count, dst);
      }
    const std::size_t tap_sz = static_cast<std::size_t>(c) * c;
    for (int f = 0; f < f_count; ++f) {
      const T* xpf = &xp[static_cast<std::size_t>(f) * c * lp];
      T* yf = y + static_cast<std::size_t>(f) * c * lo;
      for (int k = 0; k < 3; ++k)
        gemm(false, false, c, lo, c, T(1), &w.value.v[static_cast<std::size_t>(k) * tap_sz], c,
             xpf + k, lp, k == 0 ? T(0) : T(1), yf, lo);
      for (int ch = 0; ch < c; ++ch) {
        const T bias = b.value.v[static_cast<std::size_t>(ch)];
        T* row = yf + static_cast<std::size_t>(ch) * lo;
        for (int l = 0; l < lo; ++l) row[l] += bias;
      }
    }
  }

  // dx must hold [F x C x len_in].
  void backward(const T* dy, T* dx) {
    const int c = channels;
    const int lp = len_in + 4;
    const int lo = len_in + 2;
    const std::size_t tap_sz = static_cast<std::size_t>(c) * c;
    std::vector<T> dxp(static_cast<std::size_t>(frames) * c * lp, T(0));
    for (int f = 0; f < frames; ++f) {
      const T* dyf = dy + static_cast<std::size_t>(f) * c * lo;
      const T* xpf = &xp[static_cast<std::size_t>(f) * c * lp];
      T* dxpf = &dxp[static_cast<std::size_t>(f) * c * lp];
      for (int k = 0; k < 3; ++k) {
        gemm(true, false, c, lo, c, T(1), &w.value.v[static_cast<std::size_t>(k) * tap_sz], c,
             dyf, lo, T(1), dxpf + k, lp);
        gemm(false, true, c, c, lo, T(1), dyf, lo, xpf + k, lp, T(1),
             &w.grad.v[static_cast<std::size_t>(k) * tap_sz], c);
      }
      for (int ch = 0; ch < c; ++ch) {
        const T* row = dyf + static_cast<std::size_t>(ch) * lo;
        T s = 0;
        for (int l = 0; l < lo; ++l) s += row[l];
        b.grad.v[static_cast<std::size_t>(ch)] += s;
      }
    }
    for (int f = 0; f < frames; ++f)
      for (int ch = 0; ch < c; ++ch) {
        const T* src = &dxp[(static_cast<std::size_t>(f) * c + ch) * lp + 2];
        T* dst = dx + (static_cast<std::size_t>(f) * c + ch) * len_in;
        std::copy(src, src + len_in, dst);
      }
  }
};

// Fixed anti-aliasing kernel [1 2 1]/4, stride 2, padding 1, per channel.
template <class T>
struct BlurPool {
  int frames = 0, channels = 0, len_in = 0;

  static int out_len(int l) { return (l - 1) / 2 + 1; }

  void forward(const T* x, T* y, int f_count, int c_count, int l_count) {
    frames = f_count;
    channels = c_count;
    len_in = l_count;
    const int lo = out_len(l_count);
    for (int fc = 0; fc < f_count * c_count; ++fc) {
      const T* row = x + static_cast<std::size_t>(fc) * l_count;
      T* out = y + static_cast<std::size_t>(fc) * lo;
      for (int j = 0; j < lo; ++j) {
        const int base = 2 * j - 1;
        T s = 0;
        if (base >= 0) s += T(0.25) * row[base];
        if (base + 1 < l_count) s += T(0.5) * row[base + 1];
        if (base + 2 < l_count) s += T(0.25) * row[base + 2];
        out[j] = s;
      }
    }
  }

  void backward(const T* dy, T* dx) {
    const int lo = out_len(len_in);
    std::fill(dx, dx + static_cast<std::size_t>(frames) * channels * len_in, T(0));
    for (int fc = 0; fc < frames * channels; ++fc) {
      const T* dout = dy + static_cast<std::size_t>(fc) * lo;
      T* drow = dx + static_cast<std::size_t>(fc) * len_in;
      for (int j = 0; j < lo; ++j) {
        const int base = 2 * j - 1;
        if (base >= 0) drow[base] += T(0.25) * dout[j];
        if (base + 1 < len_in) drow[base + 1] += T(0.5) * dout[j];
        if (base + 2 < len_in) drow[base + 2] += T(0.25) * dout[j];
      }
    }
  }
};

// Inverted dropout; masks are cached for the backward pass.
template <class T>
struct Dropout {
  double rate = 0.0;
  std::vector<std::uint8_t> mask;

  void forward(T* x, std::size_t n, bool train, CounterRng& rng) {
    if (!train || rate <= 0.0) {
      mask.clear();
      return;
    }
    mask.resize(n);
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
    for (std::size_t i = 0; i < n; ++i) {
      const bool keep = rng.next_double() >= rate;
      mask[i] = keep ? 1 : 0;
      x[i] = keep ? x[i] * scale : T(0);
    }
  }

  void backward(T* dx, std::size_t n) const {
    if (mask.empty()) return;
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
    for (std::size_t i = 0; i < n; ++i) dx[i] = mask[i] ? dx[i] * scale : T(0);
  }
};

template <class T>
struct Linear {
  Param<T> w;  // [out x in]
  Param<T> b;  // [out]
  int in = 0, out = 0;

  const T* x_in = nullptr;
  int rows = 0;

  void init(const std::string& prefix, int in_dim, int out_dim, CounterRng& rng) {
    in = in_dim;
    out = out_dim;
    w.name = prefix + ".w";
    b.name = prefix + ".b";
    w.init_shape({out_dim, in_dim});
    b.init_shape({out_dim});
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (auto& x : w.value.v) x = static_cast<T>(rng.uniform(-bound, bound));
    for (auto& x : b.value.v) x = static_cast<T>(rng.uniform(-bound, bound));
  }

  void forward(const T* x, T* y, int row_count) {
    rows = row_count;
    x_in = x;
    gemm(false, true, row_count, out, in, T(1), x, in, w.value.v.data(), in, T(0), y, out);
    for (int r = 0; r < row_count; ++r)
      for (int o = 0; o < out; ++o) y[static_cast<std::size_t>(r) * out + o] += b.value.v[static_cast<std::size_t>(o)];
  }

  void backward(const T* dy, T* dx) {
    if (dx)
      gemm(false, false, rows, in, out, T(1), dy, out, w.value.v.data(), in, T(0), dx, in);
    gemm(true, false, out, in, rows, T(1), dy, out, x_in, in, T(1), w.grad.v.data(), in);
    for (int r = 0; r < rows; ++r)
      for (int o = 0; o < out; ++o) b.grad.v[static_cast<std::size_t>(o)] += dy[static_cast<std::size_t>(r) * out + o];
  }
};

// Single LSTM layer, gate order i, f, g, o; input and hidden sizes are equal
// in this model but kept separate here.
template <class T>
struct Lstm {
  Param<T> w_ih;  // [4H x In]
  Param<T> w_hh;  // [4H x H]
  Param<T> b_ih;  // [4H]
  Param<T> b_hh;  // [4H]
  int in = 0, hidden = 0;

  // caches
  const T* x_in = nullptr;
  int steps = 0;
  std::vector<T> gates;   // [F x 4H] post-activation
  std::vector<T> cells;   // [(F+1) x H], cells[0] = initial state
  std::vector<T> tanh_c;  // [F x H]
  std::vector<T> h_prev;  // [F x H]: h_{t-1} rows
  std::vector<T> h_out;   // [F x H]

  void init(const std::string& prefix, int in_dim, int hidden_dim, CounterRng& rng) {
    in = in_dim;
    hidden = hidden_dim;
    w_ih.name = prefix + ".w_ih";
    w_hh.name = prefix + ".w_hh";
    b_ih.name = prefix + ".b_ih";
    b_hh.name = prefix + ".b_hh";
    w_ih.init_shape({4 * hidden_dim, in_dim});
    w_hh.init_shape({4 * hidden_dim, hidden_dim});
    b_ih.init_shape({4 * hidden_dim});
    b_hh.init_shape({4 * hidden_dim});
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (auto* p : {&w_ih, &w_hh, &b_ih, &b_hh})
      for (auto& x : p->value.v) x = static_cast<T>(rng.uniform(-bound, bound));
  }

  static T sigmoid(T x) { return T(1) / (T(1) + std::exp(-x)); }

  // x: [F x In]; h value series is written to h_out ([F x H]); zero initial
  // state.
  void forward(const T* x, int f_count) {
    steps = f_count;
    x_in = x;
    const int h = hidden;
    gates.assign(static_cast<std::size_t>(f_count) * 4 * h, T(0));
    cells.assign(static_cast<std::size_t>(f_count + 1) * h, T(0));
    tanh_c.assign(static_cast<std::size_t>(f_count) * h, T(0));
    h_prev.assign(static_cast<std::size_t>(f_count) * h, T(0));
    h_out.assign(static_cast<std::size_t>(f_count) * h, T(0));

    // Input contributions and both biases for every step in one multiply.
    gemm(false, true, f_count, 4 * h, in, T(1), x, in, w_ih.value.v.data(), in, T(0),
         gates.data(), 4 * h);
    for (int f = 0; f < f_count; ++f)
      for (int j = 0; j < 4 * h; ++j)
        gates[static_cast<std::size_t>(f) * 4 * h + j] += b_ih.value.v[static_cast<std::size_t>(j)] + b_hh.value.v[static_cast<std::size_t>(j)];

    std::vector<T> hstate(static_cast<std::size_t>(h), T(0));
    for (int t = 0; t < f_count; ++t) {
      T* g = &gates[static_cast<std::size_t>(t) * 4 * h];
      std::copy(hstate.begin(), hstate.end(), h_prev.begin() + static_cast<std::size_t>(t) * h);
      gemv(false, 4 * h, h, T(1), w_hh.value.v.data(), h, hstate.data(), T(1), g);
      const T* c_prev = &cells[static_cast<std::size_t>(t) * h];
      T* c_t = &cells[static_cast<std::size_t>(t + 1) * h];
      T* th = &tanh_c[static_cast<std::size_t>(t) * h];
      T* ho = &h_out[static_cast<std::size_t>(t) * h];
      for (int j = 0; j < h; ++j) {
        const T gi = sigmoid(g[j]);
        const T gf = sigmoid(g[h + j]);
        const T gg = std::tanh(g[2 * h + j]);
        const T go = sigmoid(g[3 * h + j]);
        g[j] = gi;
        g[h + j] = gf;
        g[2 * h + j] = gg;
        g[3 * h + j] = go;
        c_t[j] = gf * c_prev[j] + gi * gg;
        th[j] = std::tanh(c_t[j]);
        ho[j] = go * th[j];
        hstate[static_cast<std::size_t>(j)] = ho[j];
      }
    }
  }

  // dh: [F x H] gradient on the h series; dx: [F x In] output (overwritten).
  void backward(const T* dh, T* dx) {
    const int h = hidden;
    std::vector<T> dgates(static_cast<std::size_t>(steps) * 4 * h, T(0));
    std::vector<T> dh_next(static_cast<std::size_t>(h), T(0));
    std::vector<T> dc(static_cast<std::size_t>(h), T(0));
    for (int t = steps - 1; t >= 0; --t) {
      const T* g = &gates[static_cast<std::size_t>(t) * 4 * h];
      const T* c_prev = &cells[static_cast<std::size_t>(t) * h];
      const T* th = &tanh_c[static_cast<std::size_t>(t) * h];
      T* dg = &dgates[static_cast<std::size_t>(t) * 4 * h];
      for (int j = 0; j < h; ++j) {
        const T gi = g[j], gf = g[h + j], gg = g[2 * h + j], go = g[3 * h + j];
        const T dhj = dh[static_cast<std::size_t>(t) * h + j] + dh_next[static_cast<std::size_t>(j)];
        const T dcj = dc[static_cast<std::size_t>(j)] + dhj * go * (T(1) - th[j] * th[j]);
        dg[j] = dcj * gg * gi * (T(1) - gi);
        dg[h + j] = dcj * c_prev[j] * gf * (T(1) - gf);
        dg[2 * h + j] = dcj * gi * (T(1) - gg * gg);
        dg[3 * h + j] = dhj * th[j] * go * (T(1) - go);
        dc[static_cast<std::size_t>(j)] = dcj * gf;
      }
      gemv(true, 4 * h, h, T(1), w_hh.value.v.data(), h, dg, T(0), dh_next.data());
    }
    gemm(false, false, steps, in, 4 * h, T(1), dgates.data(), 4 * h, w_ih.value.v.data(), in,
         T(0), dx, in);
    gemm(true, false, 4 * h, in, steps, T(1), dgates.data(), 4 * h, x_in, in, T(1),
         w_ih.grad.v.data(), in);
    gemm(true, false, 4 * h, h, steps, T(1), dgates.data(), 4 * h, h_prev.data(), h, T(1),
         w_hh.grad.v.data(), h);
    for (int t = 0; t < steps; ++t)
      for (int j = 0; j < 4 * h; ++j) {
        const T d = dgates[static_cast<std::size_t>(t) * 4 * h + j];
        b_ih.grad.v[static_cast<std::size_t>(j)] += d;
        b_hh.grad.v[static_cast<std::size_t>(j)] += d;
      }
  }
};

// Row-wise numerically stable softmax, [rows x k].
template <class T>
inline void softmax_rows(const T* z, T* p, int rows, int k) {
  for (int r = 0; r < rows; ++r) {
    const T* zr = z + static_cast<std::size_t>(r) * k;
    T* pr = p + static_cast<std::size_t>(r) * k;
    T mx = zr[0];
    for (int j = 1; j < k; ++j) mx = std::max(mx, zr[j]);
    T sum = 0;
    for (int j = 0; j < k; ++j) {
      pr[j] = std::exp(zr[j] - mx);
      sum += pr[j];
    }
    for (int j = 0; j < k; ++j) pr[j] /= sum;
  }
}

struct FocalConfig {
  double gamma = 2.0;
  std::vector<double> alpha;  // per-class weight
};

// Per-batch label rates, the alpha weights of the focal loss.
inline std::vector<double> label_rates(const std::vector<int>& labels, int k) {
  std::vector<double> rate(static_cast<std::size_t>(k), 0.0);
  for (int l : labels) rate[static_cast<std::size_t>(l)] += 1.0;
  for (double& r : rate) r /= labels.empty() ? 1.0 : static_cast<double>(labels.size());
  return rate;
}

// Focal loss over predicted probabilities; returns the summed loss and
// writes d(loss)/d(probs) when dprobs is non-null.
template <class T>
double focal_loss(const T* probs, const std::vector<int>& labels, int k, const FocalConfig& cfg,
                  T* dprobs = nullptr) {
  constexpr double kClamp = 1e-12;
  double total = 0.0;
  if (dprobs)
    std::fill(dprobs, dprobs + labels.size() * static_cast<std::size_t>(k), T(0));
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const int y = labels[n];
    const double a = cfg.alpha.empty() ? 1.0 : cfg.alpha[static_cast<std::size_t>(y)];
    const double p = static_cast<double>(probs[n * static_cast<std::size_t>(k) + y]);
    const double pc = std::max(p, kClamp);
    const double ce = -std::log(pc);
    const double one_m = 1.0 - p;
    total += a * std::pow(one_m, cfg.gamma) * ce;
    if (dprobs) {
      // d/dp [ (1-p)^g * (-ln p) ] = g (1-p)^(g-1) ln p - (1-p)^g / p
      double d = -std::pow(one_m, cfg.gamma) / pc;
      if (cfg.gamma > 0.0) d += cfg.gamma * std::pow(one_m, cfg.gamma - 1.0) * std::log(pc);
      dprobs[n * static_cast<std::size_t>(k) + y] = static_cast<T>(a * d);
    }
  }
  return total;
}

// Fused softmax + focal loss; writes d(loss)/d(logits).
template <class T>
double focal_loss_from_logits(const T* logits, const T* probs, const std::vector<int>& labels,
                              int k, const FocalConfig& cfg, T* dlogits) {
  (void)logits;
  constexpr double kClamp = 1e-12;
  double total = 0.0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const int y = labels[n];
    const double a = cfg.alpha.empty() ? 1.0 : cfg.alpha[static_cast<std::size_t>(y)];
    const double p = std::max(static_cast<double>(probs[n * static_cast<std::size_t>(k) + y]), kClamp);
    const double ce = -std::log(p);
    const double one_m = 1.0 - p;
    total += a * std::pow(one_m, cfg.gamma) * ce;
    double factor = std::pow(one_m, cfg.gamma);
    if (cfg.gamma > 0.0) factor += cfg.gamma * std::pow(one_m, cfg.gamma - 1.0) * p * ce;
    for (int j = 0; j < k; ++j) {
      const double pj = static_cast<double>(probs[n * static_cast<std::size_t>(k) + j]);
      const double delta = (j == y) ? 1.0 : 0.0;
      dlogits[n * static_cast<std::size_t>(k) + j] = static_cast<T>(a * factor * (pj - delta));
    }
  }
  return total;
}

}  // namespace emgshift::nn
