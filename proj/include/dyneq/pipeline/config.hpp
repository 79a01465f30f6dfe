#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dyneq/ctrlagg/fit.hpp"
#include "dyneq/ctrlagg/frequency_response.hpp"
#include "dyneq/modal/modal.hpp"
#include "dyneq/model/case.hpp"
#include "dyneq/sim/simulate.hpp"

namespace dyneq::pipeline {

struct Scenario {
  std::string name;
  std::vector<sim::Event> events;
  double t_end = 10.0;
  double dt = 0.005;
};

struct ReductionConfig {
  std::filesystem::path case_path;
  std::map<std::string, Zone> zones;  // overrides of the case zones
  double band_lo_hz = 0.1;
  double band_hi_hz = 1.0;
  modal::ModeStrategy mode_strategy = modal::ModeStrategy::least_damped;
  double angle_tolerance_deg = 30.0;
  bool one_axis = false;
  std::map<ControllerKind, std::vector<SignalKind>> common_inputs;
  std::map<ControllerKind, std::pair<int, int>> orders;
  ctrlagg::GridSpec grid;
  ctrlagg::FitWeighting weighting = ctrlagg::FitWeighting::inverse_magnitude;
  std::vector<Scenario> scenarios;
  std::filesystem::path out_dir = ".";
};

// Parses "lo:hi", "n:d" and "lo:hi:n:log|lin" flag values.
std::pair<double, double> parse_band(const std::string& s);
std::pair<int, int> parse_orders(const std::string& s);
ctrlagg::GridSpec parse_grid(const std::string& s);

// Paths inside the file are relative to the file's directory. Throws Io for
// unreadable files, Parse for malformed content.
ReductionConfig load_config(const std::filesystem::path& path);
ReductionConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json to_json(const ReductionConfig& c);

// Case with the config's zone overrides applied and re-validated.
PowerSystemCase load_configured_case(const ReductionConfig& cfg);

}  // namespace dyneq::pipeline
