#include "dyneq/genagg/genagg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "dyneq/error.hpp"

namespace dyneq::genagg {

EquivalentGenerator aggregate_generators(const std::vector<Generator>& members,
                                         const AggregationOptions& options) {
  if (members.empty()) throw Error(ErrorKind::EmptyGroup, "cannot aggregate an empty group");
  const bool with_emf = options.member_emf.size() == members.size();
  const bool with_current = options.member_current.size() == members.size();

  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return members[a].id < members[b].id; });

  EquivalentGenerator out;
  double s_sum = 0.0;
  for (auto k : order) s_sum += members[k].rated_mva;

  for (auto k : order) {
    const auto& g = members[k];
    BaseConversion bc;
    bc.id = g.id;
    bc.rated_mva = g.rated_mva;
    bc.xd_prime_own = g.xd_prime;
    bc.xd_prime_common = g.xd_prime * s_sum / g.rated_mva;
    bc.kinetic_energy = g.inertia_h * g.rated_mva;
    if (with_emf) bc.emf = options.member_emf[k];
    out.base_conversion_log.push_back(bc);
    out.members.push_back(g.id);
  }

  if (with_emf) {
    for (std::size_t a = 0; a < order.size(); ++a)
      for (std::size_t b = a + 1; b < order.size(); ++b) {
        const double d =
            std::abs(std::arg(options.member_emf[order[a]] / options.member_emf[order[b]]));
        out.emf_angle_spread_deg = std::max(out.emf_angle_spread_deg, d * 180.0 / std::numbers::pi);
      }
    Complex num{};
    double den = 0.0;
    for (auto k : order) {
      const double w = with_current ? std::abs(options.member_current[k]) : members[k].rated_mva;
      num += w * options.member_emf[k];
      den += w;
    }
    if (den > 0.0) out.mean_emf = num / den;
    if (out.emf_angle_spread_deg > options.spread_warning_deg) {
      std::ostringstream msg;
      msg << "member EMF angles spread " << out.emf_angle_spread_deg << " deg (> "
          << options.spread_warning_deg << "); coherency is weak";
      out.warnings.push_back(msg.str());
    }
  }

  if (members.size() == 1) {
    out.generator = members.front();
    return out;
  }

  Generator eq;
  const auto& first = members[order.front()];
  eq.id = options.id.empty() ? "eq_" + first.id : options.id;
  eq.bus = options.bus.empty() ? first.bus : options.bus;
  eq.rated_mva = s_sum;
  eq.v_set = first.v_set;
  double energy = 0.0, damping = 0.0, inv_x = 0.0, inv_xd = 0.0, tdo = 0.0;
  bool one_axis = true;
  for (auto k : order) {
    const auto& g = members[k];
    energy += g.inertia_h * g.rated_mva;
    damping += g.damping_d * g.rated_mva;
    inv_x += 1.0 / (g.xd_prime * s_sum / g.rated_mva);
    eq.p_gen += g.p_gen;
    eq.q_gen += g.q_gen;
    if (g.xd && g.tdo_prime) {
      inv_xd += 1.0 / (*g.xd * s_sum / g.rated_mva);
      tdo += *g.tdo_prime * g.rated_mva;
    } else {
      one_axis = false;
    }
  }
  eq.inertia_h = energy / s_sum;
  eq.damping_d = damping / s_sum;
  eq.xd_prime = 1.0 / inv_x;
  if (one_axis) {
    eq.xd = 1.0 / inv_xd;
    eq.tdo_prime = tdo / s_sum;
  } else if (std::any_of(members.begin(), members.end(), [](const Generator& g) { return g.xd.has_value(); })) {
    out.warnings.push_back("not every member has one-axis data; equivalent is classical");
  }
  out.generator = std::move(eq);
  return out;
}

}  // namespace dyneq::genagg
