#include "dyneq/sim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dyneq/error.hpp"

namespace dyneq::sim {

const std::vector<double>& Trajectory::channel(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorKind::ChannelMissing, "no channel '" + name + "'");
  return channels[std::size_t(it - names.begin())];
}

bool Trajectory::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

void Trajectory::add_channel(std::string name) {
  names.push_back(std::move(name));
  channels.emplace_back();
}

void write_csv(const Trajectory& t, std::ostream& os) {
  os << "time";
  for (const auto& n : t.names) os << ',' << n;
  os << '\n' << std::setprecision(12);
  for (std::size_t k = 0; k < t.time.size(); ++k) {
    os << t.time[k];
    for (const auto& c : t.channels) os << ',' << c[k];
    os << '\n';
  }
}

void write_csv(const Trajectory& t, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_csv(t, os);
}

Trajectory read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path.string());
  Trajectory t;
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::Parse, path.string() + ": empty file");
  {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    if (cell != "time") throw Error(ErrorKind::Parse, path.string() + ": first column must be time");
    while (std::getline(ss, cell, ',')) t.add_channel(cell);
  }
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(row) + ": bad number");
      }
    }
    if (vals.size() != t.names.size() + 1)
      throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(row) + ": column count");
    t.time.push_back(vals[0]);
    for (std::size_t c = 0; c < t.names.size(); ++c) t.channels[c].push_back(vals[c + 1]);
  }
  return t;
}

const ChannelMetrics& MetricsReport::at(const std::string& name) const {
  for (const auto& c : channels)
    if (c.name == name) return c;
  throw Error(ErrorKind::ChannelMissing, "no metrics for '" + name + "'");
}

namespace {

std::vector<double> resample(const std::vector<double>& t_src, const std::vector<double>& v,
                             const std::vector<double>& t_dst) {
  if (t_src == t_dst) return v;
  std::vector<double> out(t_dst.size());
  std::size_t j = 0;
  for (std::size_t k = 0; k < t_dst.size(); ++k) {
    const double t = t_dst[k];
    while (j + 2 < t_src.size() && t_src[j + 1] < t) ++j;
    if (t_src.size() == 1) {
      out[k] = v[0];
      continue;
    }
    const double t0 = t_src[j], t1 = t_src[j + 1];
    double w = (t - t0) / (t1 - t0);
    w = std::clamp(w, 0.0, 1.0);
    out[k] = v[j] + w * (v[j + 1] - v[j]);
  }
  return out;
}

}  // namespace

MetricsReport compare_trajectories(const Trajectory& a, const Trajectory& b,
                                   const std::vector<std::string>& channels) {
  MetricsReport r;
  for (const auto& name : channels) {
    const auto& ra = a.channel(name);
    const auto rb = resample(b.time, b.channel(name), a.time);
    ChannelMetrics m;
    m.name = name;
    const std::size_t n = ra.size();
    if (n == 0) {
      r.channels.push_back(m);
      continue;
    }
    const auto [lo, hi] = std::minmax_element(ra.begin(), ra.end());
    const double ptp = *hi - *lo;
    double sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double e = rb[k] - ra[k];
      sq += e * e;
      m.max_abs_error = std::max(m.max_abs_error, std::abs(e));
    }
    const double rms = std::sqrt(sq / double(n));
    m.nrmse = ptp > 0.0 ? rms / ptp : rms;
    const std::size_t start = n - std::max<std::size_t>(1, n / 10);
    double off = 0.0;
    for (std::size_t k = start; k < n; ++k) off += rb[k] - ra[k];
    m.steady_state_offset = off / double(n - start);
    r.channels.push_back(m);
  }
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : r.channels)
    j.push_back({{"channel", c.name},
                 {"nrmse", c.nrmse},
                 {"max_abs_error", c.max_abs_error},
                 {"steady_state_offset", c.steady_state_offset}});
  return j;
}

}  // namespace dyneq::sim
