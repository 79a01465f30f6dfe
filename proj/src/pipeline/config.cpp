#include "dyneq/pipeline/config.hpp"

#include <fstream>
#include <sstream>

#include "dyneq/error.hpp"

namespace dyneq::pipeline {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, "bad number '" + s + "' in " + what);
  }
}

}  // namespace

std::pair<double, double> parse_band(const std::string& s) {
  auto p = split(s, ':');
  if (p.size() != 2) throw Error(ErrorKind::InvalidArgument, "band must be lo:hi, got '" + s + "'");
  const double lo = to_double(p[0], "band"), hi = to_double(p[1], "band");
  if (!(lo < hi)) throw Error(ErrorKind::InvalidArgument, "band needs lo < hi");
  return {lo, hi};
}

std::pair<int, int> parse_orders(const std::string& s) {
  auto p = split(s, ':');
  if (p.size() != 2) throw Error(ErrorKind::InvalidArgument, "orders must be n:d, got '" + s + "'");
  const double n = to_double(p[0], "orders"), d = to_double(p[1], "orders");
  if (n < 0 || d < 0 || n != int(n) || d != int(d) || n > d)
    throw Error(ErrorKind::InvalidArgument, "orders must be integers with 0 <= n <= d");
  return {int(n), int(d)};
}

ctrlagg::GridSpec parse_grid(const std::string& s) {
  auto p = split(s, ':');
  if (p.size() != 3 && p.size() != 4)
    throw Error(ErrorKind::InvalidArgument, "grid must be lo:hi:n[:log|lin], got '" + s + "'");
  ctrlagg::GridSpec g;
  g.lo_hz = to_double(p[0], "grid");
  g.hi_hz = to_double(p[1], "grid");
  const double n = to_double(p[2], "grid");
  if (n < 2 || n != double(std::size_t(n)))
    throw Error(ErrorKind::InvalidArgument, "grid needs an integer point count >= 2");
  g.points = std::size_t(n);
  if (p.size() == 4) {
    if (p[3] == "log") g.logarithmic = true;
    else if (p[3] == "lin") g.logarithmic = false;
    else throw Error(ErrorKind::InvalidArgument, "grid spacing must be log or lin");
  }
  g.omega();  // validates
  return g;
}

ReductionConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ReductionConfig c;
  try {
    auto path_of = [&](const std::string& s) {
      std::filesystem::path p(s);
      return p.is_absolute() ? p : base_dir / p;
    };
    if (j.contains("case_path")) c.case_path = path_of(j.at("case_path").get<std::string>());
    if (j.contains("zones"))
      for (const auto& [bus, z] : j.at("zones").items()) {
        auto zone = zone_from_string(z.get<std::string>());
        if (!zone) throw Error(ErrorKind::Parse, "zones." + bus + ": unknown zone");
        c.zones[bus] = *zone;
      }
    if (j.contains("band_hz")) {
      const auto& b = j.at("band_hz");
      c.band_lo_hz = b.at(0).get<double>();
      c.band_hi_hz = b.at(1).get<double>();
    }
    if (j.contains("mode_strategy")) {
      const auto s = j.at("mode_strategy").get<std::string>();
      if (s == "least_damped") c.mode_strategy = modal::ModeStrategy::least_damped;
      else if (s == "unique") c.mode_strategy = modal::ModeStrategy::unique;
      else throw Error(ErrorKind::Parse, "mode_strategy: unknown value '" + s + "'");
    }
    c.angle_tolerance_deg = j.value("angle_tolerance_deg", c.angle_tolerance_deg);
    c.one_axis = j.value("one_axis", c.one_axis);
    if (j.contains("common_inputs"))
      for (const auto& [kind, sigs] : j.at("common_inputs").items()) {
        auto k = controller_kind_from_string(kind);
        if (!k) throw Error(ErrorKind::Parse, "common_inputs: unknown controller kind '" + kind + "'");
        std::vector<SignalKind> v;
        for (const auto& s : sigs) {
          auto sk = signal_from_string(s.get<std::string>());
          if (!sk) throw Error(ErrorKind::Parse, "common_inputs." + kind + ": unknown signal");
          v.push_back(*sk);
        }
        c.common_inputs[*k] = v;
      }
    if (j.contains("orders"))
      for (const auto& [kind, o] : j.at("orders").items()) {
        auto k = controller_kind_from_string(kind);
        if (!k) throw Error(ErrorKind::Parse, "orders: unknown controller kind '" + kind + "'");
        c.orders[*k] = parse_orders(o.get<std::string>());
      }
    if (j.contains("grid")) c.grid = parse_grid(j.at("grid").get<std::string>());
    if (j.contains("weighting"))
      c.weighting = ctrlagg::fit_weighting_from_string(j.at("weighting").get<std::string>());
    if (j.contains("scenarios"))
      for (std::size_t k = 0; k < j.at("scenarios").size(); ++k) {
        const auto& s = j.at("scenarios").at(k);
        Scenario sc;
        sc.name = s.value("name", "scenario" + std::to_string(k + 1));
        sc.t_end = s.value("t_end", sc.t_end);
        sc.dt = s.value("dt", sc.dt);
        if (s.contains("events"))
          for (std::size_t e = 0; e < s.at("events").size(); ++e)
            sc.events.push_back(sim::event_from_json(
                s.at("events").at(e),
                "scenarios[" + std::to_string(k) + "].events[" + std::to_string(e) + "]"));
        c.scenarios.push_back(std::move(sc));
      }
    if (j.contains("out_dir")) c.out_dir = path_of(j.at("out_dir").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
  }
  if (!(c.band_lo_hz < c.band_hi_hz)) throw Error(ErrorKind::Parse, "config: band needs lo < hi");
  return c;
}

ReductionConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

nlohmann::json to_json(const ReductionConfig& c) {
  nlohmann::json j;
  j["case_path"] = c.case_path.string();
  for (const auto& [bus, z] : c.zones) j["zones"][bus] = to_string(z);
  j["band_hz"] = {c.band_lo_hz, c.band_hi_hz};
  j["mode_strategy"] = c.mode_strategy == modal::ModeStrategy::unique ? "unique" : "least_damped";
  j["angle_tolerance_deg"] = c.angle_tolerance_deg;
  j["one_axis"] = c.one_axis;
  for (const auto& [k, sigs] : c.common_inputs)
    for (auto s : sigs) j["common_inputs"][std::string(to_string(k))].push_back(to_string(s));
  for (const auto& [k, o] : c.orders)
    j["orders"][std::string(to_string(k))] = std::to_string(o.first) + ":" + std::to_string(o.second);
  std::ostringstream grid;
  grid << c.grid.lo_hz << ":" << c.grid.hi_hz << ":" << c.grid.points << ":"
       << (c.grid.logarithmic ? "log" : "lin");
  j["grid"] = grid.str();
  j["weighting"] = ctrlagg::to_string(c.weighting);
  j["scenarios"] = nlohmann::json::array();
  for (const auto& s : c.scenarios) {
    nlohmann::json e = nlohmann::json::array();
    for (const auto& ev : s.events) e.push_back(sim::to_json(ev));
    j["scenarios"].push_back({{"name", s.name}, {"t_end", s.t_end}, {"dt", s.dt}, {"events", e}});
  }
  j["out_dir"] = c.out_dir.string();
  return j;
}

PowerSystemCase load_configured_case(const ReductionConfig& cfg) {
  if (!std::filesystem::exists(cfg.case_path))
    throw Error(ErrorKind::Io, "case file not found: " + cfg.case_path.string());
  PowerSystemCase c = load_case(cfg.case_path);
  if (cfg.zones.empty()) return c;
  for (const auto& [bus, z] : cfg.zones) {
    auto i = c.bus_index(bus);
    if (!i) throw Error(ErrorKind::Validation, "zone override names unknown bus '" + bus + "'");
    c.buses[*i].zone = z;
  }
  c.warnings.clear();
  validate(c);
  return c;
}

}  // namespace dyneq::pipeline
