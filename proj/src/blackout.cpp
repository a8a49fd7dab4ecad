#include "vharvest/blackout.hpp"

#include <algorithm>
#include <cmath>

#include "vharvest/metrics.hpp"

namespace vharvest {

BlackoutQuery BlackoutQuery::make(const Scenario& s, double Qs) {
  const auto* plat = std::get_if<Platoon>(&s.params().traffic);
  if (plat == nullptr) {
    throw UnsupportedModel("blackout: closed form only covers platoon traffic");
  }
  if (!(Qs > 0.0) || !std::isfinite(Qs)) throw ValidationError("Qs", "must be positive");
  const Derived& d = s.derived();
  BlackoutQuery q;
  q.Qs = Qs;
  q.x = static_cast<int>(std::lround(Qs / s.params().T));
  if (q.x < 1) throw ValidationError("Qs", "threshold shorter than one slot");
  q.N = static_cast<int>(std::lround(plat->d0 / d.step));
  q.N_H = d.N_H();
  q.N_s = d.N_s;
  return q;
}

double blackout_probability(const BlackoutQuery& query, const QuantizedPmf& p_hat_B, double phi_s) {
  if (p_hat_B.N_s() != query.N_s) {
    throw ValidationError("p_hat_B", "support does not match N_s");
  }
  // No transmit phase at all, or the harvest phase alone is long enough.
  if (query.x <= query.N_H || query.N <= query.N_H) return 1.0;
  const double q_fail = std::clamp(1.0 - phi_s, 0.0, 1.0);
  double total = 0.0;
  for (int i = 0; i <= query.N_s; ++i) {
    const double mass = p_hat_B[static_cast<std::size_t>(i)];
    if (mass == 0.0) continue;
    const int n_tx = std::min(i, query.N_T());
    if (n_tx <= query.N - query.x + 1) {
      total += mass;
    } else {
      total += mass * run_failure_prob<double>(n_tx - query.N + query.x - 1, q_fail);
    }
  }
  return std::clamp(total, 0.0, 1.0);
}

double blackout_probability(const Scenario& s, double Qs) {
  const BlackoutQuery query = BlackoutQuery::make(s, Qs);
  if (query.x <= query.N_H) return 1.0;
  const Analysis a = analyze(s);
  return blackout_probability(query, post_harvest_pmf(a.stationary.pi, a.p_E),
                              decoding_probability(s));
}

}  // namespace vharvest
