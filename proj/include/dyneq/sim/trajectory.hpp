#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace dyneq::sim {

struct Trajectory {
  std::vector<double> time;
  std::vector<std::string> names;
  std::vector<std::vector<double>> channels;  // same order as names
  std::vector<double> balance_residual;       // per time point, pu
  bool unstable = false;
  double unstable_time = -1.0;

  const std::vector<double>& channel(const std::string& name) const;  // throws ChannelMissing
  bool has(const std::string& name) const;
  void add_channel(std::string name);
};

void write_csv(const Trajectory& t, std::ostream& os);
void write_csv(const Trajectory& t, const std::filesystem::path& path);
Trajectory read_csv(const std::filesystem::path& path);

struct ChannelMetrics {
  std::string name;
  double nrmse = 0.0;               // RMS error / peak-to-peak of the reference
  double max_abs_error = 0.0;
  double steady_state_offset = 0.0; // mean(b - a) over the final 10 %
};

struct MetricsReport {
  std::vector<ChannelMetrics> channels;

  const ChannelMetrics& at(const std::string& name) const;
};

// `a` is the reference; `b` is interpolated onto a's time base when needed.
MetricsReport compare_trajectories(const Trajectory& a, const Trajectory& b,
                                   const std::vector<std::string>& channels);

nlohmann::json to_json(const MetricsReport& r);

}  // namespace dyneq::sim
