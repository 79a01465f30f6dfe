#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dyneq/ctrlagg/aggregate.hpp"
#include "dyneq/genagg/genagg.hpp"
#include "dyneq/modal/modal.hpp"
#include "dyneq/netred/reduce.hpp"
#include "dyneq/pipeline/config.hpp"
#include "dyneq/sim/simulate.hpp"

namespace dyneq::pipeline {

struct CountRow {
  std::string item;
  std::size_t full = 0;
  std::size_t reduced = 0;
};

struct ReducedModel {
  PowerSystemCase reduced;
  modal::CoherencyGrouping grouping;
  netred::NetworkReduction network;
  std::vector<genagg::EquivalentGenerator> generators;
  std::vector<ctrlagg::ControllerAggregationResult> controllers;
  std::vector<CountRow> summary;
  std::vector<std::string> warnings;
  nlohmann::json provenance;
};

// powerflow -> linearize -> eigenanalysis -> grouping -> REI/Kron -> genagg -> ctrlagg.
ReducedModel run_reduction(const PowerSystemCase& full, const ReductionConfig& cfg);

std::string summary_csv(const std::vector<CountRow>& rows);

struct ModesReport {
  modal::LinearModel model;
  modal::ModalResult modal;
  std::vector<Eigen::Index> rows;  // oscillatory modes in band, least damped first
  std::string modes_csv;           // mode_id,re,im,freq_hz,damping_pct
  std::string shapes_csv;          // generator,angle_deg,magnitude for rows.front()
};

ModesReport run_modes(const PowerSystemCase& c, double lo_hz, double hi_hz, bool one_axis);

struct FitCommandResult {
  ctrlagg::ControllerAggregationResult aggregation;
  nlohmann::json controller_json;
  std::vector<std::pair<SignalKind, std::string>> comparison_csv;  // per input
};

// Aggregates (or just fits, for one id) the named controllers of `c`.
FitCommandResult run_fit(const PowerSystemCase& c, const std::vector<std::string>& controller_ids,
                         const ReductionConfig& cfg);

struct ModeRow {
  double freq_hz = 0.0;
  double damping_pct = 0.0;
  bool found = false;
};

struct ScenarioComparison {
  std::string name;
  bool ok = false;
  std::string error;
  sim::MetricsReport metrics;
  double full_seconds = 0.0;
  double reduced_seconds = 0.0;
};

struct CompareReport {
  ModeRow full_mode, reduced_mode;
  std::vector<ScenarioComparison> scenarios;
  nlohmann::json metrics_json;  // deterministic content only
  std::string modal_table_csv;
  std::string timings_log;
};

// Channels compared: every generator channel present in both cases.
CompareReport run_compare(const PowerSystemCase& full, const PowerSystemCase& reduced,
                          const ReductionConfig& cfg);

// Writes text to out_dir/name, creating out_dir.
void write_text(const std::filesystem::path& out_dir, const std::string& name,
                const std::string& text);

}  // namespace dyneq::pipeline
