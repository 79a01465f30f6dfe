#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dyneq {

using Complex = std::complex<double>;

enum class Zone { internal, external, boundary };

// Physical signals a controller may read or drive.
enum class SignalKind { delta_omega, delta_pe, delta_vt, delta_pmech, vref, efd, vpss };

enum class ControllerKind { avr, pss, gov };

enum class BlockType { gain, lag, leadlag, washout, integrator, pi, tf };

std::string_view to_string(Zone z);
std::string_view to_string(SignalKind s);
std::string_view to_string(ControllerKind k);
std::string_view to_string(BlockType b);

std::optional<Zone> zone_from_string(std::string_view s);
std::optional<SignalKind> signal_from_string(std::string_view s);
std::optional<ControllerKind> controller_kind_from_string(std::string_view s);
std::optional<BlockType> block_type_from_string(std::string_view s);

struct Bus {
  std::string id;
  double base_kv = 0.0;
  Zone zone = Zone::internal;
  Complex shunt{};  // pu on system base

  bool operator==(const Bus&) const = default;
};

struct Branch {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  Complex series_admittance{};       // pu
  Complex shunt_admittance_total{};  // pu, split half per end
  double tap = 1.0;                  // off-nominal ratio on the from side

  bool operator==(const Branch&) const = default;
};

// Machine parameters are kept on the machine's own rating exactly as entered;
// the `*_sys` helpers re-base them onto the system MVA base.
struct Generator {
  std::string id;
  std::string bus;
  double rated_mva = 0.0;
  double inertia_h = 0.0;  // MW s / MVA
  double xd_prime = 0.0;   // pu on rated_mva
  double damping_d = 0.0;  // pu torque / pu speed
  double p_gen = 0.0;      // MW
  double q_gen = 0.0;      // MVAr
  double v_set = 1.0;      // pu, for PV / slack regulation
  std::optional<double> xd;         // one-axis model only
  std::optional<double> tdo_prime;  // one-axis model only
  std::vector<std::string> controllers;

  double xd_prime_sys(double base_mva) const { return xd_prime * base_mva / rated_mva; }

  bool operator==(const Generator&) const = default;
};

struct Block {
  BlockType type = BlockType::gain;
  std::map<std::string, double> params;
  // Ascending-power coefficients, used by BlockType::tf only.
  std::vector<double> num;
  std::vector<double> den;

  double param(const std::string& name, double fallback) const {
    auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
  }

  bool operator==(const Block&) const = default;
};

using BlockChain = std::vector<Block>;

// One SISO block chain per input signal; path outputs are summed.
struct Controller {
  std::string id;
  ControllerKind kind = ControllerKind::pss;
  std::vector<SignalKind> input_signals;
  SignalKind output_signal = SignalKind::vpss;
  std::vector<BlockChain> diagram;

  bool operator==(const Controller&) const = default;
};

struct Load {
  std::string bus;
  Complex constant_power{};      // MW + j MVAr
  Complex constant_impedance{};  // MW + j MVAr consumed at 1 pu voltage

  bool operator==(const Load&) const = default;
};

struct PowerSystemCase {
  double base_mva = 100.0;
  double frequency_hz = 60.0;
  std::string slack_bus;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  std::vector<Controller> controllers;
  std::vector<Load> loads;

  // Non-fatal findings from validation; not part of case identity.
  std::vector<std::string> warnings;

  std::optional<std::size_t> bus_index(std::string_view id) const;
  std::optional<std::size_t> generator_index(std::string_view id) const;
  std::optional<std::size_t> controller_index(std::string_view id) const;
  const Bus& bus(std::string_view id) const;
  const Generator& generator(std::string_view id) const;
  const Controller& controller(std::string_view id) const;

  friend bool operator==(const PowerSystemCase& a, const PowerSystemCase& b);
};

// Stage in which a signal is produced: measurements first, then stabilizer
// output, excitation, and mechanical power.
int signal_stage(SignalKind s);
int controller_stage(ControllerKind k);
SignalKind expected_output(ControllerKind k);

// Checks every invariant and throws ValidationError listing all violations.
// Warnings (dispatch above rating, ignored limiters) are appended to
// `c.warnings`.
void validate(PowerSystemCase& c);

// Parse a case document. Throws ParseError with a field locus on malformed
// input and ValidationError when invariants fail.
PowerSystemCase parse_case(std::string_view text);
PowerSystemCase case_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const PowerSystemCase& c);
std::string serialize_case(const PowerSystemCase& c);

PowerSystemCase load_case(const std::filesystem::path& path);
void save_case(const PowerSystemCase& c, const std::filesystem::path& path);

// Block records shared by the case format and the fitted-controller output.
nlohmann::json block_to_json(const Block& b);
Block block_from_json(const nlohmann::json& j, const std::string& locus);
nlohmann::json controller_to_json(const Controller& c);
Controller controller_from_json(const nlohmann::json& j, const std::string& locus);

}  // namespace dyneq
