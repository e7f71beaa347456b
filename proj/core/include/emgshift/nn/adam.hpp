#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "emgshift/nn/tensor.hpp"

namespace emgshift::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment buffers follow the parameter order given
// at init; an optional trainable mask freezes parameters (their moments stay
// untouched as well).
template <class T>
class Adam {
 public:
  Adam() = default;

  void init(const AdamConfig& cfg, const std::vector<Param<T>*>& params) {
    cfg_ = cfg;
    step_count_ = 0;
    m_.clear();
    v_.clear();
    for (const Param<T>* p : params) {
      m_.push_back(std::vector<T>(p->value.numel(), T(0)));
      v_.push_back(std::vector<T>(p->value.numel(), T(0)));
    }
  }

  void step(const std::vector<Param<T>*>& params, const std::vector<bool>* trainable = nullptr) {
    if (params.size() != m_.size()) throw std::invalid_argument("Adam: parameter set changed");
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (trainable && !(*trainable)[i]) continue;
      Param<T>& p = *params[i];
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < p.value.numel(); ++j) {
        const double g = static_cast<double>(p.grad.v[j]);
        if (!std::isfinite(g))
          throw std::runtime_error("Adam: non-finite gradient in " + p.name);
        const double mj = cfg_.beta1 * static_cast<double>(m[j]) + (1.0 - cfg_.beta1) * g;
        const double vj = cfg_.beta2 * static_cast<double>(v[j]) + (1.0 - cfg_.beta2) * g * g;
        m[j] = static_cast<T>(mj);
        v[j] = static_cast<T>(vj);
        const double mhat = mj / bc1;
        const double vhat = vj / bc2;
        p.value.v[j] -= static_cast<T>(cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
      }
    }
  }

  long steps_taken() const { return step_count_; }

 private:
  AdamConfig cfg_;
  long step_count_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

}  // namespace emgshift::nn
