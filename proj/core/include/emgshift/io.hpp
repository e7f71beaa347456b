#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emgshift/signal.hpp"

namespace emgshift::io {

// Sidecar manifest describing one recorded trial.
struct TrialManifest {
  std::string subject;
  int session = 0;
  std::string electrode_position;  // left | center | right
  double sample_rate_hz = 0.0;
  std::vector<std::string> channels;
  std::string format = "csv";  // csv | bin_f64le
  std::string data_file;       // relative to the manifest
};

void write_manifest(const std::filesystem::path& path, const TrialManifest& m);
TrialManifest read_manifest(const std::filesystem::path& path);

// Trial CSV: header time_s,ch01,...,chNN; one row per sample.
void write_trial_csv(const std::filesystem::path& path, const dsp::SignalBuffer& buf);
dsp::SignalBuffer read_trial_csv(const std::filesystem::path& path, double sample_rate_hz);

// Raw little-endian float64, time-major rows of channel values.
void write_trial_bin(const std::filesystem::path& path, const dsp::SignalBuffer& buf);
dsp::SignalBuffer read_trial_bin(const std::filesystem::path& path, double sample_rate_hz,
                                 const std::vector<std::string>& channels);

// Loads the data file a manifest points at.
dsp::SignalBuffer read_trial(const std::filesystem::path& manifest_path);

// Frames CSV: t_emit_s then the frame flattened row-major.
void write_frames_csv(const std::filesystem::path& path,
                      const std::vector<dsp::FeatureFrame>& frames);

// Label CSV: time_s,label with label in {rest,flexion,extension}.
void write_labels_csv(const std::filesystem::path& path, const std::vector<double>& time_s,
                      const std::vector<int>& labels);
void read_labels_csv(const std::filesystem::path& path, std::vector<double>& time_s,
                     std::vector<int>& labels);

// Joint-angle series CSV: time_s,theta_sld_rad,theta_elb_rad,x_m,y_m.
void write_task_csv(const std::filesystem::path& path, const std::vector<double>& time_s,
                    const std::vector<double>& theta_sld, const std::vector<double>& theta_elb,
                    const std::vector<double>& x, const std::vector<double>& y);

// Writes content to a temp file in the target directory and renames it over
// the destination.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

std::string label_name(int label);
int label_from_name(const std::string& name);

}  // namespace emgshift::io
