#include <fstream>
#include <sstream>

#include "dyneq/error.hpp"
#include "dyneq/model/case.hpp"

namespace dyneq {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& locus, const std::string& what) {
  throw Error(ErrorKind::Parse, locus + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& locus) {
  if (!obj.is_object()) parse_fail(locus, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(locus + "." + key, "missing field");
  return *it;
}

double as_number(const json& v, const std::string& locus) {
  if (!v.is_number()) parse_fail(locus, "expected a number");
  return v.get<double>();
}

double number_field(const json& obj, const char* key, const std::string& locus) {
  return as_number(require(obj, key, locus), locus + "." + key);
}

double number_or(const json& obj, const char* key, double fallback, const std::string& locus) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, locus + "." + key);
}

// Ids may be written as strings or integers; both map to the string form.
std::string as_id(const json& v, const std::string& locus) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  parse_fail(locus, "expected a string or integer id");
}

std::string id_field(const json& obj, const char* key, const std::string& locus) {
  return as_id(require(obj, key, locus), locus + "." + key);
}

Complex admittance(const json& v, const std::string& locus) {
  if (!v.is_object()) parse_fail(locus, "expected {\"g\": .., \"b\": ..}");
  return {number_or(v, "g", 0.0, locus), number_or(v, "b", 0.0, locus)};
}

json admittance_json(Complex y) { return json{{"g", y.real()}, {"b", y.imag()}}; }

const json& array_field(const json& obj, const char* key, const std::string& locus) {
  const json& a = require(obj, key, locus);
  if (!a.is_array()) parse_fail(locus + "." + key, "expected an array");
  return a;
}

std::vector<double> number_array(const json& v, const std::string& locus) {
  if (!v.is_array()) parse_fail(locus, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_number(v[i], locus + "[" + std::to_string(i) + "]"));
  return out;
}

SignalKind signal_of(const json& v, const std::string& locus) {
  if (!v.is_string()) parse_fail(locus, "expected a signal name");
  auto s = signal_from_string(v.get<std::string>());
  if (!s) parse_fail(locus, "unknown signal kind '" + v.get<std::string>() + "'");
  return *s;
}

Bus bus_from_json(const json& j, const std::string& locus) {
  Bus b;
  b.id = id_field(j, "id", locus);
  b.base_kv = number_field(j, "base_kv", locus);
  const json& z = require(j, "zone", locus);
  if (!z.is_string()) parse_fail(locus + ".zone", "expected a string");
  auto zone = zone_from_string(z.get<std::string>());
  if (!zone) parse_fail(locus + ".zone", "unknown zone '" + z.get<std::string>() + "'");
  b.zone = *zone;
  if (auto it = j.find("shunt"); it != j.end()) b.shunt = admittance(*it, locus + ".shunt");
  return b;
}

Branch branch_from_json(const json& j, const std::string& locus, std::size_t index) {
  Branch br;
  br.id = j.contains("id") ? id_field(j, "id", locus) : "br" + std::to_string(index + 1);
  br.from_bus = id_field(j, "from", locus);
  br.to_bus = id_field(j, "to", locus);
  if (auto it = j.find("series_admittance"); it != j.end()) {
    br.series_admittance = admittance(*it, locus + ".series_admittance");
  } else {
    Complex z{number_or(j, "r", 0.0, locus), number_field(j, "x", locus)};
    if (z == Complex{}) parse_fail(locus, "zero series impedance");
    br.series_admittance = 1.0 / z;
  }
  if (auto it = j.find("shunt_admittance_total"); it != j.end())
    br.shunt_admittance_total = admittance(*it, locus + ".shunt_admittance_total");
  else
    br.shunt_admittance_total = {0.0, number_or(j, "b", 0.0, locus)};
  br.tap = number_or(j, "tap", 1.0, locus);
  return br;
}

Generator generator_from_json(const json& j, const std::string& locus) {
  Generator g;
  g.id = id_field(j, "id", locus);
  g.bus = id_field(j, "bus", locus);
  g.rated_mva = number_field(j, "rated_mva", locus);
  g.inertia_h = number_field(j, "h", locus);
  g.xd_prime = number_field(j, "xd_prime", locus);
  g.damping_d = number_or(j, "d", 0.0, locus);
  g.p_gen = number_or(j, "p_mw", 0.0, locus);
  g.q_gen = number_or(j, "q_mvar", 0.0, locus);
  g.v_set = number_or(j, "v_set", 1.0, locus);
  if (j.contains("xd")) g.xd = number_field(j, "xd", locus);
  if (j.contains("tdo_prime")) g.tdo_prime = number_field(j, "tdo_prime", locus);
  if (auto it = j.find("controllers"); it != j.end()) {
    if (!it->is_array()) parse_fail(locus + ".controllers", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      g.controllers.push_back(as_id((*it)[i], locus + ".controllers[" + std::to_string(i) + "]"));
  }
  return g;
}

Load load_from_json(const json& j, const std::string& locus) {
  Load l;
  l.bus = id_field(j, "bus", locus);
  l.constant_power = {number_or(j, "p_mw", 0.0, locus), number_or(j, "q_mvar", 0.0, locus)};
  l.constant_impedance = {number_or(j, "z_p_mw", 0.0, locus), number_or(j, "z_q_mvar", 0.0, locus)};
  return l;
}

}  // namespace

Block block_from_json(const json& j, const std::string& locus) {
  Block b;
  const json& t = require(j, "type", locus);
  if (!t.is_string()) parse_fail(locus + ".type", "expected a string");
  auto type = block_type_from_string(t.get<std::string>());
  if (!type) parse_fail(locus + ".type", "unknown block type '" + t.get<std::string>() + "'");
  b.type = *type;
  auto p = j.find("params");
  if (p != j.end()) {
    if (!p->is_object()) parse_fail(locus + ".params", "expected an object");
    for (auto it = p->begin(); it != p->end(); ++it) {
      std::string where = locus + ".params." + it.key();
      if (b.type == BlockType::tf && (it.key() == "num" || it.key() == "den")) {
        (it.key() == "num" ? b.num : b.den) = number_array(it.value(), where);
        continue;
      }
      b.params[it.key()] = as_number(it.value(), where);
    }
  }
  return b;
}

json block_to_json(const Block& b) {
  json params = json::object();
  for (const auto& [k, v] : b.params) params[k] = v;
  if (b.type == BlockType::tf) {
    params["num"] = b.num;
    params["den"] = b.den;
  }
  return json{{"type", std::string(to_string(b.type))}, {"params", params}};
}

Controller controller_from_json(const json& j, const std::string& locus) {
  Controller c;
  c.id = id_field(j, "id", locus);
  const json& kind = require(j, "kind", locus);
  if (!kind.is_string()) parse_fail(locus + ".kind", "expected a string");
  auto k = controller_kind_from_string(kind.get<std::string>());
  if (!k) parse_fail(locus + ".kind", "unknown controller kind '" + kind.get<std::string>() + "'");
  c.kind = *k;
  const json& ins = array_field(j, "input_signals", locus);
  for (std::size_t i = 0; i < ins.size(); ++i)
    c.input_signals.push_back(signal_of(ins[i], locus + ".input_signals[" + std::to_string(i) + "]"));
  c.output_signal = signal_of(require(j, "output_signal", locus), locus + ".output_signal");
  const json& diagram = array_field(j, "diagram", locus);
  for (std::size_t p = 0; p < diagram.size(); ++p) {
    std::string where = locus + ".diagram[" + std::to_string(p) + "]";
    if (!diagram[p].is_array()) parse_fail(where, "expected an array of blocks");
    BlockChain chain;
    for (std::size_t k = 0; k < diagram[p].size(); ++k)
      chain.push_back(block_from_json(diagram[p][k], where + "[" + std::to_string(k) + "]"));
    c.diagram.push_back(std::move(chain));
  }
  return c;
}

json controller_to_json(const Controller& c) {
  json ins = json::array();
  for (auto s : c.input_signals) ins.push_back(std::string(to_string(s)));
  json diagram = json::array();
  for (const auto& chain : c.diagram) {
    json blocks = json::array();
    for (const auto& b : chain) blocks.push_back(block_to_json(b));
    diagram.push_back(blocks);
  }
  return json{{"id", c.id},
              {"kind", std::string(to_string(c.kind))},
              {"input_signals", ins},
              {"output_signal", std::string(to_string(c.output_signal))},
              {"diagram", diagram}};
}

PowerSystemCase case_from_json(const json& doc) {
  const std::string root = "$";
  PowerSystemCase c;
  c.base_mva = number_field(doc, "base_mva", root);
  c.frequency_hz = number_or(doc, "frequency_hz", 60.0, root);
  c.slack_bus = id_field(doc, "slack_bus", root);

  const json& buses = array_field(doc, "buses", root);
  for (std::size_t i = 0; i < buses.size(); ++i)
    c.buses.push_back(bus_from_json(buses[i], "buses[" + std::to_string(i) + "]"));
  const json& branches = array_field(doc, "branches", root);
  for (std::size_t i = 0; i < branches.size(); ++i)
    c.branches.push_back(branch_from_json(branches[i], "branches[" + std::to_string(i) + "]", i));
  const json& gens = array_field(doc, "generators", root);
  for (std::size_t i = 0; i < gens.size(); ++i)
    c.generators.push_back(generator_from_json(gens[i], "generators[" + std::to_string(i) + "]"));
  if (doc.contains("controllers")) {
    const json& ctls = array_field(doc, "controllers", root);
    for (std::size_t i = 0; i < ctls.size(); ++i)
      c.controllers.push_back(controller_from_json(ctls[i], "controllers[" + std::to_string(i) + "]"));
  }
  if (doc.contains("loads")) {
    const json& loads = array_field(doc, "loads", root);
    for (std::size_t i = 0; i < loads.size(); ++i)
      c.loads.push_back(load_from_json(loads[i], "loads[" + std::to_string(i) + "]"));
  }
  validate(c);
  return c;
}

PowerSystemCase parse_case(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + e.what());
  }
  return case_from_json(doc);
}

json to_json(const PowerSystemCase& c) {
  json doc;
  doc["base_mva"] = c.base_mva;
  doc["frequency_hz"] = c.frequency_hz;
  doc["slack_bus"] = c.slack_bus;
  doc["buses"] = json::array();
  for (const auto& b : c.buses)
    doc["buses"].push_back({{"id", b.id},
                            {"base_kv", b.base_kv},
                            {"zone", std::string(to_string(b.zone))},
                            {"shunt", admittance_json(b.shunt)}});
  doc["branches"] = json::array();
  for (const auto& br : c.branches)
    doc["branches"].push_back({{"id", br.id},
                               {"from", br.from_bus},
                               {"to", br.to_bus},
                               {"series_admittance", admittance_json(br.series_admittance)},
                               {"shunt_admittance_total", admittance_json(br.shunt_admittance_total)},
                               {"tap", br.tap}});
  doc["generators"] = json::array();
  for (const auto& g : c.generators) {
    json gj{{"id", g.id},        {"bus", g.bus},         {"rated_mva", g.rated_mva},
            {"h", g.inertia_h},  {"xd_prime", g.xd_prime}, {"d", g.damping_d},
            {"p_mw", g.p_gen},   {"q_mvar", g.q_gen},    {"v_set", g.v_set},
            {"controllers", g.controllers}};
    if (g.xd) gj["xd"] = *g.xd;
    if (g.tdo_prime) gj["tdo_prime"] = *g.tdo_prime;
    doc["generators"].push_back(gj);
  }
  doc["controllers"] = json::array();
  for (const auto& ctl : c.controllers) doc["controllers"].push_back(controller_to_json(ctl));
  doc["loads"] = json::array();
  for (const auto& l : c.loads)
    doc["loads"].push_back({{"bus", l.bus},
                            {"p_mw", l.constant_power.real()},
                            {"q_mvar", l.constant_power.imag()},
                            {"z_p_mw", l.constant_impedance.real()},
                            {"z_q_mvar", l.constant_impedance.imag()}});
  return doc;
}

std::string serialize_case(const PowerSystemCase& c) { return to_json(c).dump(2) + "\n"; }

PowerSystemCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open case file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str());
}

void save_case(const PowerSystemCase& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write case file '" + path.string() + "'");
  out << serialize_case(c);
}

}  // namespace dyneq
