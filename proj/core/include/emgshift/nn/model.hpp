#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "emgshift/io.hpp"
#include "emgshift/nn/layers.hpp"

namespace emgshift::nn {

struct ModelConfig {
  int channels = 12;       // concatenated feature channels (D)
  int rows = 50;           // samples per frame
  int classes = 3;         // rest, flexion, extension
  int domains = 3;         // left, center, right
  std::array<double, 4> conv_dropout{0.1, 0.2, 0.3, 0.4};
  double lstm_dropout = 0.1;
  double focal_gamma = 2.0;
  double grl_lambda = 1.0;
  double domain_loss_weight = 1.0;
};

// The CNN-LSTM: four convolutional blocks (layer norm, ReLU, conv1d k3 s1 p2,
// dropout) with blur pooling after the second block, global average pooling,
// layer norm, two LSTMs, a softmax output head, and an optional gradient
// reversal domain head.
template <class T>
class CnnLstm {
 public:
  CnnLstm(const ModelConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
    CounterRng rng = CounterRng(init_seed).split("model-init");
    const int c = cfg.channels;
    for (int b = 0; b < 4; ++b) {
      const std::string prefix = "cnn.block" + std::to_string(b + 1);
      blocks_[b].ln.init(prefix + ".ln", c);
      blocks_[b].conv.init(prefix + ".conv", c, rng);
      blocks_[b].drop.rate = cfg.conv_dropout[static_cast<std::size_t>(b)];
    }
    ln_seq_.init("lstm.ln", c);
    lstm1_.init("lstm.l1", c, c, rng);
    lstm2_.init("lstm.l2", c, c, rng);
    lstm_drop_.rate = cfg.lstm_dropout;
    ln_out_.init("out.ln", c);
    fc_out_.init("out.fc", c, cfg.classes, rng);
    ln_d1_.init("ada.ln1", c);
    fc_d1_.init("ada.fc1", c, c, rng);
    ln_d2_.init("ada.ln2", c);
    fc_d2_.init("ada.fc2", c, cfg.domains, rng);
    dropout_rng_ = CounterRng(init_seed).split("dropout");
  }

  const ModelConfig& config() const { return cfg_; }

  void set_dropout_key(std::uint64_t key) { dropout_rng_ = CounterRng(key).split("dropout"); }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    for (auto& b : blocks_) {
      out.push_back(&b.ln.gamma);
      out.push_back(&b.ln.beta);
      out.push_back(&b.conv.w);
      out.push_back(&b.conv.b);
    }
    out.push_back(&ln_seq_.gamma);
    out.push_back(&ln_seq_.beta);
    for (auto* l : {&lstm1_, &lstm2_}) {
      out.push_back(&l->w_ih);
      out.push_back(&l->w_hh);
      out.push_back(&l->b_ih);
      out.push_back(&l->b_hh);
    }
    out.push_back(&ln_out_.gamma);
    out.push_back(&ln_out_.beta);
    out.push_back(&fc_out_.w);
    out.push_back(&fc_out_.b);
    out.push_back(&ln_d1_.gamma);
    out.push_back(&ln_d1_.beta);
    out.push_back(&fc_d1_.w);
    out.push_back(&fc_d1_.b);
    out.push_back(&ln_d2_.gamma);
    out.push_back(&ln_d2_.beta);
    out.push_back(&fc_d2_.w);
    out.push_back(&fc_d2_.b);
    return out;
  }

  void zero_grads() {
    for (Param<T>* p : params()) p->grad.fill(T(0));
  }

  // frames: [F x channels x rows]. Runs the trunk and the motion head, plus
  // the domain head when ada is set.
  void forward(const T* frames, int f_count, bool train, bool ada) {
    const int c = cfg_.channels;
    frames_ = f_count;
    ada_on_ = ada;
    train_on_ = train;

    int l = cfg_.rows;
    in_ptr_ = frames;
    scratch_.resize(buf_size(f_count, l + 4));

    // block 1
    run_block(0, frames, s1_, f_count, l, train);
    l += 2;
    // block 2 + blur pooling
    run_block(1, s1_.data(), s2_, f_count, l, train);
    l += 2;
    const int lb = BlurPool<T>::out_len(l);
    s2p_.resize(buf_size(f_count, lb));
    pool_.forward(s2_.data(), s2p_.data(), f_count, c, l);
    l = lb;
    // blocks 3 and 4
    run_block(2, s2p_.data(), s3_, f_count, l, train);
    l += 2;
    run_block(3, s3_.data(), s4_, f_count, l, train);
    l += 2;
    gap_len_ = l;

    // global average pooling over time
    feats_.resize(static_cast<std::size_t>(f_count) * c);
    for (int f = 0; f < f_count; ++f)
      for (int ch = 0; ch < c; ++ch) {
        const T* row = &s4_[(static_cast<std::size_t>(f) * c + ch) * l];
        T s = 0;
        for (int i = 0; i < l; ++i) s += row[i];
        feats_[static_cast<std::size_t>(f) * c + ch] = s / static_cast<T>(l);
      }

    lnseq_out_.resize(feats_.size());
    ln_seq_.forward(feats_.data(), lnseq_out_.data(), f_count, 1);
    lstm1_.forward(lnseq_out_.data(), f_count);
    h1d_ = lstm1_.h_out;
    lstm_drop_.forward(h1d_.data(), h1d_.size(), train, dropout_rng_);
    lstm2_.forward(h1d_.data(), f_count);

    lnout_out_.resize(feats_.size());
    ln_out_.forward(lstm2_.h_out.data(), lnout_out_.data(), f_count, 1);
    logits_m_.resize(static_cast<std::size_t>(f_count) * cfg_.classes);
    fc_out_.forward(lnout_out_.data(), logits_m_.data(), f_count);
    probs_m_.resize(logits_m_.size());
    softmax_rows(logits_m_.data(), probs_m_.data(), f_count, cfg_.classes);

    if (ada) {
      lnd1_out_.resize(feats_.size());
      ln_d1_.forward(lstm2_.h_out.data(), lnd1_out_.data(), f_count, 1);
      d1_out_.resize(feats_.size());
      fc_d1_.forward(lnd1_out_.data(), d1_out_.data(), f_count);
      for (T& v : d1_out_) v = std::max(v, T(0));
      lnd2_out_.resize(feats_.size());
      ln_d2_.forward(d1_out_.data(), lnd2_out_.data(), f_count, 1);
      logits_d_.resize(static_cast<std::size_t>(f_count) * cfg_.domains);
      fc_d2_.forward(lnd2_out_.data(), logits_d_.data(), f_count);
      probs_d_.resize(logits_d_.size());
      softmax_rows(logits_d_.data(), probs_d_.data(), f_count, cfg_.domains);
    }
  }

  // dlogits_m: [F x classes]; dlogits_d: [F x domains] or null. Gradients
  // accumulate into the parameter grad buffers; the domain gradient crosses
  // the reversal layer scaled by -lambda before entering the trunk.
  void backward(const T* dlogits_m, const T* dlogits_d) {
    const int c = cfg_.channels;
    const int f_count = frames_;
    std::vector<T> dh2(static_cast<std::size_t>(f_count) * c, T(0));
    std::vector<T> tmp(dh2.size());
    std::vector<T> tmp2(dh2.size());

    fc_out_.backward(dlogits_m, tmp.data());
    ln_out_.backward(tmp.data(), tmp2.data());
    for (std::size_t i = 0; i < dh2.size(); ++i) dh2[i] += tmp2[i];

    if (dlogits_d && ada_on_) {
      std::vector<T> da(static_cast<std::size_t>(f_count) * c);
      fc_d2_.backward(dlogits_d, da.data());
      ln_d2_.backward(da.data(), tmp.data());
      for (std::size_t i = 0; i < tmp.size(); ++i)
        if (d1_out_[i] <= T(0)) tmp[i] = T(0);
      fc_d1_.backward(tmp.data(), da.data());
      ln_d1_.backward(da.data(), tmp.data());
      const T neg_lambda = static_cast<T>(-cfg_.grl_lambda);
      for (std::size_t i = 0; i < dh2.size(); ++i) dh2[i] += neg_lambda * tmp[i];
    }

    lstm2_.backward(dh2.data(), tmp.data());
    lstm_drop_.backward(tmp.data(), tmp.size());
    lstm1_.backward(tmp.data(), tmp2.data());
    std::vector<T> dfeats(static_cast<std::size_t>(f_count) * c);
    ln_seq_.backward(tmp2.data(), dfeats.data());

    // GAP backward
    int l = gap_len_;
    std::vector<T> d4(buf_size(f_count, l));
    for (int f = 0; f < f_count; ++f)
      for (int ch = 0; ch < c; ++ch) {
        const T g = dfeats[static_cast<std::size_t>(f) * c + ch] / static_cast<T>(l);
        T* row = &d4[(static_cast<std::size_t>(f) * c + ch) * l];
        for (int i = 0; i < l; ++i) row[i] = g;
      }

    std::vector<T> d3(buf_size(f_count, l - 2));
    back_block(3, d4, d3, f_count, l - 2);
    l -= 2;
    std::vector<T> d2p(buf_size(f_count, l - 2));
    back_block(2, d3, d2p, f_count, l - 2);
    l -= 2;
    const int l_pre_pool = pool_.len_in;
    std::vector<T> d2(buf_size(f_count, l_pre_pool));
    pool_.backward(d2p.data(), d2.data());
    l = l_pre_pool;
    std::vector<T> d1(buf_size(f_count, l - 2));
    back_block(1, d2, d1, f_count, l - 2);
    l -= 2;
    std::vector<T> d0(buf_size(f_count, l - 2));
    back_block(0, d1, d0, f_count, l - 2);
  }

  const std::vector<T>& motion_probs() const { return probs_m_; }
  const std::vector<T>& motion_logits() const { return logits_m_; }
  const std::vector<T>& domain_probs() const { return probs_d_; }
  const std::vector<T>& domain_logits() const { return logits_d_; }
  const std::vector<T>& features() const { return feats_; }

  void save_checkpoint(const std::filesystem::path& path) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["channels"] = cfg_.channels;
    j["rows"] = cfg_.rows;
    nlohmann::json tensors;
    for (Param<T>* p : params()) {
      nlohmann::json t;
      t["shape"] = p->value.shape;
      std::vector<double> data(p->value.v.begin(), p->value.v.end());
      t["data"] = data;
      tensors[p->name] = t;
    }
    j["tensors"] = std::move(tensors);
    io::atomic_write(path, j.dump());
  }

  void load_checkpoint(const std::filesystem::path& path) {
    const nlohmann::json j = nlohmann::json::parse(io::read_file(path));
    if (j.at("format_version").get<int>() != 1)
      throw std::runtime_error("checkpoint: unsupported format version");
    if (j.at("channels").get<int>() != cfg_.channels || j.at("rows").get<int>() != cfg_.rows)
      throw std::runtime_error("checkpoint: model shape mismatch");
    const auto& tensors = j.at("tensors");
    for (Param<T>* p : params()) {
      const auto& t = tensors.at(p->name);
      const auto shape = t.at("shape").get<std::vector<int>>();
      if (shape != p->value.shape)
        throw std::runtime_error("checkpoint: shape mismatch for " + p->name);
      const auto data = t.at("data").get<std::vector<double>>();
      if (data.size() != p->value.v.size())
        throw std::runtime_error("checkpoint: size mismatch for " + p->name);
      for (std::size_t i = 0; i < data.size(); ++i) p->value.v[i] = static_cast<T>(data[i]);
    }
  }

  // Copies parameter values from another instance with the same shape.
  void copy_params_from(CnnLstm<T>& other) {
    auto mine = params();
    auto theirs = other.params();
    for (std::size_t i = 0; i < mine.size(); ++i) mine[i]->value = theirs[i]->value;
  }

 private:
  struct Block {
    LayerNorm<T> ln;
    Conv1d<T> conv;
    Dropout<T> drop;
  };

  std::size_t buf_size(int f_count, int l) const {
    return static_cast<std::size_t>(f_count) * cfg_.channels * l;
  }

  void run_block(int b, const T* x, std::vector<T>& out, int f_count, int l, bool train) {
    Block& blk = blocks_[static_cast<std::size_t>(b)];
    scratch_.resize(buf_size(f_count, l));
    blk.ln.forward(x, scratch_.data(), f_count, l);
    for (std::size_t i = 0; i < buf_size(f_count, l); ++i)
      scratch_[i] = std::max(scratch_[i], T(0));
    out.resize(buf_size(f_count, l + 2));
    blk.conv.forward(scratch_.data(), out.data(), f_count, l);
    blk.drop.forward(out.data(), out.size(), train, dropout_rng_);
  }

  // dout: gradient at the block output (modified in place); dx gets the
  // gradient at the block input, [F x C x l_in].
  void back_block(int b, std::vector<T>& dout, std::vector<T>& dx, int f_count, int l_in) {
    Block& blk = blocks_[static_cast<std::size_t>(b)];
    blk.drop.backward(dout.data(), dout.size());
    std::vector<T> dr(buf_size(f_count, l_in));
    blk.conv.backward(dout.data(), dr.data());
    // ReLU mask from the conv's padded input cache.
    const int c = cfg_.channels;
    const int lp = l_in + 4;
    for (int f = 0; f < f_count; ++f)
      for (int ch = 0; ch < c; ++ch)
        for (int i = 0; i < l_in; ++i) {
          const T r = blk.conv.xp[(static_cast<std::size_t>(f) * c + ch) * lp + 2 + i];
          if (r <= T(0)) dr[(static_cast<std::size_t>(f) * c + ch) * l_in + i] = T(0);
        }
    blk.ln.backward(dr.data(), dx.data());
  }

  ModelConfig cfg_;
  std::array<Block, 4> blocks_;
  BlurPool<T> pool_;
  LayerNorm<T> ln_seq_;
  Lstm<T> lstm1_, lstm2_;
  Dropout<T> lstm_drop_;
  LayerNorm<T> ln_out_;
  Linear<T> fc_out_;
  LayerNorm<T> ln_d1_;
  Linear<T> fc_d1_;
  LayerNorm<T> ln_d2_;
  Linear<T> fc_d2_;
  CounterRng dropout_rng_;

  // forward state
  const T* in_ptr_ = nullptr;
  int frames_ = 0, gap_len_ = 0;
  bool ada_on_ = false, train_on_ = false;
  std::vector<T> scratch_, s1_, s2_, s2p_, s3_, s4_;
  std::vector<T> feats_, lnseq_out_, h1d_, lnout_out_, logits_m_, probs_m_;
  std::vector<T> lnd1_out_, d1_out_, lnd2_out_, logits_d_, probs_d_;
};

}  // namespace emgshift::nn
