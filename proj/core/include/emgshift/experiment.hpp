#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "emgshift/nn/model.hpp"
#include "emgshift/signal.hpp"
#include "emgshift/stats.hpp"

namespace emgshift::experiment {

enum class Strategy { kVanilla, kTl, kAda, kMix, kBaseline };
enum class Normalization { kNone, kSwn };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);
std::string norm_name(Normalization n);

struct ExperimentPlan {
  std::vector<Strategy> strategies{Strategy::kVanilla, Strategy::kTl, Strategy::kAda,
                                   Strategy::kMix};
  std::vector<Normalization> norms{Normalization::kSwn, Normalization::kNone};
  std::vector<int> window_grid_ms{200, 600, 1000};
  int epochs = 10;
  int batch_sequences = 1;
  double sequence_len_s = 20.0;
  int tl_retrain_epochs = 10;
  std::vector<std::uint64_t> seeds{1};
  int jobs = 1;
  bool train_logs = false;

  // optimizer and model settings shared by every run
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double focal_gamma = 2.0;
  double grl_lambda = 1.0;
  double domain_loss_weight = 1.0;

  // preprocessing
  dsp::FilterSpec filter{};
  int decimation = 4;
  double warmup_s = 0.5;
  double swn_epsilon = 1e-8;

  // Full-scale settings from the reference protocol; desk keeps the reduced
  // grid and epoch count to stay tractable on a workstation.
  static ExperimentPlan desk();
  static ExperimentPlan full();
};

struct LoadedTrial {
  int subject = 0;
  int position = 0;
  int trial = 0;
  dsp::SignalBuffer raw;
  std::vector<int> labels;  // 20 Hz
};

struct Dataset {
  std::vector<LoadedTrial> trials;
  int subjects = 0;
  int base_channels = 0;
};

Dataset load_dataset(const std::filesystem::path& root);

struct ResultRecord {
  std::uint64_t seed = 0;
  int subject = 0;
  Strategy strategy = Strategy::kVanilla;
  Normalization norm = Normalization::kNone;
  int train_pos = -1;  // -1 for MIX/ADA (pooled training data)
  int test_pos = 0;
  int norm_win_ms = 0;  // 0 when normalization is off
  int feat_win_ms = 0;
  double accuracy = 0.0;
  double baseline = 0.0;
  double differential = 0.0;
};

struct GridPoint {
  int norm_win_ms = 0;
  int feat_win_ms = 0;
  double mean_accuracy = 0.0;
};

// Grid argmax; ties broken by smaller normalization window, then smaller
// feature window.
GridPoint sweep_windows(const std::vector<GridPoint>& grid);

struct ConditionSummary {
  Strategy strategy;
  Normalization norm;
  double mean_differential = 0.0;
  double sd_differential = 0.0;
  double mean_accuracy = 0.0;
  std::vector<double> per_subject_differential;  // averaged over seeds
};

struct ExperimentOutput {
  std::vector<ResultRecord> records;
  std::vector<ConditionSummary> conditions;
  std::string summary_json;
};

using ProgressFn = std::function<void(const std::string&)>;

ExperimentOutput run_experiment(const Dataset& dataset, const ExperimentPlan& plan,
                                const ProgressFn& progress = {});

// CSV with header subject,strategy,norm,train_pos,test_pos,norm_win_ms,
// feat_win_ms,accuracy,baseline,differential; rows are seed-major and
// deterministic.
void write_results_csv(const std::filesystem::path& path,
                       const std::vector<ResultRecord>& records);
void write_summary_json(const std::filesystem::path& path, const ExperimentOutput& out);

// Differential accuracy per Eq-style subtraction: x - x_baseline.
double differential_accuracy(double accuracy, double baseline);

}  // namespace emgshift::experiment
