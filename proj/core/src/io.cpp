#include "emgshift/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace emgshift::io {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_manifest(const std::filesystem::path& path, const TrialManifest& m) {
  json j;
  j["schema_version"] = 1;
  j["subject"] = m.subject;
  j["session"] = m.session;
  j["electrode_position"] = m.electrode_position;
  j["sample_rate_hz"] = m.sample_rate_hz;
  j["channels"] = m.channels;
  j["format"] = m.format;
  j["data_file"] = m.data_file;
  atomic_write(path, j.dump(2) + "\n");
}

TrialManifest read_manifest(const std::filesystem::path& path) {
  json j = json::parse(read_file(path));
  TrialManifest m;
  m.subject = j.at("subject").get<std::string>();
  m.session = j.value("session", 0);
  m.electrode_position = j.at("electrode_position").get<std::string>();
  m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
  m.channels = j.at("channels").get<std::vector<std::string>>();
  m.format = j.value("format", std::string("csv"));
  m.data_file = j.value("data_file", std::string());
  if (m.electrode_position != "left" && m.electrode_position != "center" &&
      m.electrode_position != "right")
    throw std::runtime_error("manifest: bad electrode_position in " + path.string());
  return m;
}

void write_trial_csv(const std::filesystem::path& path, const dsp::SignalBuffer& buf) {
  std::string out;
  out.reserve(buf.length() * (buf.channels() + 1) * 12);
  out += "time_s";
  for (const auto& n : buf.channel_names) out += "," + n;
  out += "\n";
  char num[32];
  for (std::size_t t = 0; t < buf.length(); ++t) {
    std::snprintf(num, sizeof(num), "%.6f", static_cast<double>(t) / buf.sample_rate_hz);
    out += num;
    for (std::size_t c = 0; c < buf.channels(); ++c) {
      std::snprintf(num, sizeof(num), ",%.8e", buf.samples[c][t]);
      out += num;
    }
    out += "\n";
  }
  atomic_write(path, out);
}

dsp::SignalBuffer read_trial_csv(const std::filesystem::path& path, double sample_rate_hz) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty trial csv: " + path.string());
  auto header = split_csv_line(line);
  if (header.empty() || header.front() != "time_s")
    throw std::runtime_error("trial csv: expected time_s header in " + path.string());

  dsp::SignalBuffer buf;
  buf.sample_rate_hz = sample_rate_hz;
  buf.channel_names.assign(header.begin() + 1, header.end());
  buf.samples.resize(buf.channel_names.size());

  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    std::strtod(p, &end);  // time column, recomputed from the rate
    p = end;
    for (auto& ch : buf.samples) {
      if (*p != ',') throw std::runtime_error("trial csv: short row in " + path.string());
      ++p;
      ch.push_back(std::strtod(p, &end));
      p = end;
    }
  }
  buf.validate();
  return buf;
}

void write_trial_bin(const std::filesystem::path& path, const dsp::SignalBuffer& buf) {
  std::string out;
  out.resize(buf.length() * buf.channels() * sizeof(double));
  char* p = out.data();
  for (std::size_t t = 0; t < buf.length(); ++t)
    for (std::size_t c = 0; c < buf.channels(); ++c) {
      std::memcpy(p, &buf.samples[c][t], sizeof(double));
      p += sizeof(double);
    }
  atomic_write(path, out);
}

dsp::SignalBuffer read_trial_bin(const std::filesystem::path& path, double sample_rate_hz,
                                 const std::vector<std::string>& channels) {
  const std::string raw = read_file(path);
  const std::size_t nch = channels.size();
  if (nch == 0 || raw.size() % (nch * sizeof(double)) != 0)
    throw std::runtime_error("trial bin: size not a multiple of the row size: " + path.string());
  const std::size_t len = raw.size() / (nch * sizeof(double));
  dsp::SignalBuffer buf;
  buf.sample_rate_hz = sample_rate_hz;
  buf.channel_names = channels;
  buf.samples.assign(nch, std::vector<double>(len));
  const char* p = raw.data();
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t c = 0; c < nch; ++c) {
      std::memcpy(&buf.samples[c][t], p, sizeof(double));
      p += sizeof(double);
    }
  buf.validate();
  return buf;
}

dsp::SignalBuffer read_trial(const std::filesystem::path& manifest_path) {
  const TrialManifest m = read_manifest(manifest_path);
  const auto data = manifest_path.parent_path() / m.data_file;
  if (m.format == "csv") return read_trial_csv(data, m.sample_rate_hz);
  if (m.format == "bin_f64le") return read_trial_bin(data, m.sample_rate_hz, m.channels);
  throw std::runtime_error("manifest: unknown format '" + m.format + "'");
}

void write_frames_csv(const std::filesystem::path& path,
                      const std::vector<dsp::FeatureFrame>& frames) {
  std::string out = "t_emit_s";
  if (!frames.empty()) {
    const std::size_t n = frames.front().values.size();
    for (std::size_t i = 0; i < n; ++i) out += ",feat_" + std::to_string(i);
  }
  out += "\n";
  char num[32];
  for (const auto& f : frames) {
    std::snprintf(num, sizeof(num), "%.6f", f.t_emit);
    out += num;
    for (double v : f.values) {
      std::snprintf(num, sizeof(num), ",%.8e", v);
      out += num;
    }
    out += "\n";
  }
  atomic_write(path, out);
}

std::string label_name(int label) {
  switch (label) {
    case 0: return "rest";
    case 1: return "flexion";
    case 2: return "extension";
  }
  throw std::invalid_argument("label_name: unknown label " + std::to_string(label));
}

int label_from_name(const std::string& name) {
  if (name == "rest") return 0;
  if (name == "flexion") return 1;
  if (name == "extension") return 2;
  throw std::invalid_argument("label_from_name: unknown label '" + name + "'");
}

void write_labels_csv(const std::filesystem::path& path, const std::vector<double>& time_s,
                      const std::vector<int>& labels) {
  if (time_s.size() != labels.size())
    throw std::invalid_argument("write_labels_csv: series lengths differ");
  std::string out = "time_s,label\n";
  char num[32];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::snprintf(num, sizeof(num), "%.6f,", time_s[i]);
    out += num;
    out += label_name(labels[i]);
    out += "\n";
  }
  atomic_write(path, out);
}

void read_labels_csv(const std::filesystem::path& path, std::vector<double>& time_s,
                     std::vector<int>& labels) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  std::getline(f, line);
  time_s.clear();
  labels.clear();
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 2) throw std::runtime_error("labels csv: bad row in " + path.string());
    time_s.push_back(std::stod(cells[0]));
    labels.push_back(label_from_name(cells[1]));
  }
}

void write_task_csv(const std::filesystem::path& path, const std::vector<double>& time_s,
                    const std::vector<double>& theta_sld, const std::vector<double>& theta_elb,
                    const std::vector<double>& x, const std::vector<double>& y) {
  std::string out = "time_s,theta_sld_rad,theta_elb_rad,x_m,y_m\n";
  char num[96];
  for (std::size_t i = 0; i < time_s.size(); ++i) {
    std::snprintf(num, sizeof(num), "%.6f,%s,%s,%s,%s\n", time_s[i],
                  format_double(theta_sld[i]).c_str(), format_double(theta_elb[i]).c_str(),
                  format_double(x[i]).c_str(), format_double(y[i]).c_str());
    out += num;
  }
  atomic_write(path, out);
}

}  // namespace emgshift::io
