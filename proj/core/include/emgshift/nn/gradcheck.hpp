#pragma once

#include <string>
#include <vector>

#include "emgshift/nn/model.hpp"

namespace emgshift::nn {

struct GradCheckReport {
  struct Entry {
    std::string name;
    double max_rel_err = 0.0;
  };
  std::vector<Entry> per_tensor;
  double max_rel_err = 0.0;
};

// Compares reverse-mode gradients against central finite differences for
// every parameter tensor of a small model, through both heads and the focal
// loss. Dropout masks are pinned by re-seeding before every forward so the
// loss is a deterministic function of the parameters. fault_injection
// perturbs one analytic gradient to prove the check can fail.
inline GradCheckReport grad_check(int channels, int rows, int frames, std::uint64_t seed,
                                  bool fault_injection = false) {
  ModelConfig cfg;
  cfg.channels = channels;
  cfg.rows = rows;
  CnnLstm<double> model(cfg, seed);

  CounterRng rng = CounterRng(seed).split("gradcheck-data");
  std::vector<double> frames_in(static_cast<std::size_t>(frames) * channels * rows);
  for (double& v : frames_in) v = rng.normal();
  std::vector<int> labels(static_cast<std::size_t>(frames));
  std::vector<int> domains(static_cast<std::size_t>(frames));
  for (auto& l : labels) l = static_cast<int>(rng.next_below(3));
  for (auto& d : domains) d = static_cast<int>(rng.next_below(3));

  FocalConfig focal_m{cfg.focal_gamma, label_rates(labels, cfg.classes)};
  FocalConfig focal_d{cfg.focal_gamma, label_rates(domains, cfg.domains)};

  const std::uint64_t mask_key = seed ^ 0x5eedULL;
  const auto loss_fn = [&]() -> double {
    model.set_dropout_key(mask_key);
    model.forward(frames_in.data(), frames, /*train=*/true, /*ada=*/true);
    const double lm =
        focal_loss(model.motion_probs().data(), labels, cfg.classes, focal_m, (double*)nullptr);
    const double ld =
        focal_loss(model.domain_probs().data(), domains, cfg.domains, focal_d, (double*)nullptr);
    return lm + cfg.domain_loss_weight * ld;
  };

  // Analytic gradients.
  model.zero_grads();
  model.set_dropout_key(mask_key);
  model.forward(frames_in.data(), frames, true, true);
  std::vector<double> dlm(static_cast<std::size_t>(frames) * cfg.classes);
  std::vector<double> dld(static_cast<std::size_t>(frames) * cfg.domains);
  focal_loss_from_logits(model.motion_logits().data(), model.motion_probs().data(), labels,
                         cfg.classes, focal_m, dlm.data());
  focal_loss_from_logits(model.domain_logits().data(), model.domain_probs().data(), domains,
                         cfg.domains, focal_d, dld.data());
  for (double& v : dld) v *= cfg.domain_loss_weight;
  model.backward(dlm.data(), dld.data());

  std::vector<std::vector<double>> analytic;
  for (Param<double>* p : model.params()) analytic.push_back(p->grad.v);
  if (fault_injection && !analytic.empty() && !analytic.back().empty())
    analytic.back()[0] += 1.0 + std::abs(analytic.back()[0]);

  GradCheckReport report;
  const double h = 1e-5;
  auto params = model.params();
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    GradCheckReport::Entry entry;
    entry.name = params[pi]->name;
    for (std::size_t j = 0; j < params[pi]->value.numel(); ++j) {
      const double orig = params[pi]->value.v[j];
      params[pi]->value.v[j] = orig + h;
      const double lp = loss_fn();
      params[pi]->value.v[j] = orig - h;
      const double lmn = loss_fn();
      params[pi]->value.v[j] = orig;
      const double fd = (lp - lmn) / (2.0 * h);
      const double an = analytic[pi][j];
      const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.per_tensor.push_back(std::move(entry));
  }
  return report;
}

}  // namespace emgshift::nn
