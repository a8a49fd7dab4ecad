#include "vharvest/battery_chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vharvest/errors.hpp"

namespace vharvest {

const char* to_string(PmfRole role) {
  switch (role) {
    case PmfRole::harvest: return "p_E";
    case PmfRole::transmit: return "p_T";
    case PmfRole::battery: return "p_B";
    case PmfRole::post_harvest: return "p_hat_B";
    case PmfRole::stationary: return "pi";
  }
  return "unknown";
}

double QuantizedPmf::sum() const { return std::accumulate(p.begin(), p.end(), 0.0); }

double QuantizedPmf::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) m += static_cast<double>(k) * p[k];
  return m;
}

QuantizedPmf QuantizedPmf::unit(int N_s, int k, PmfRole role) {
  QuantizedPmf out{std::vector<double>(static_cast<std::size_t>(N_s) + 1, 0.0), role};
  out.p[static_cast<std::size_t>(std::clamp(k, 0, N_s))] = 1.0;
  return out;
}

SpacingCdf spacing_cdf(const TrafficModel& traffic) {
  if (const auto* pois = std::get_if<Poisson>(&traffic)) {
    const double mu = pois->mu;
    return {[mu](double y) { return -std::expm1(-mu * y); }, {}, 1.0 / mu};
  }
  const double d0 = std::get<Platoon>(traffic).d0;
  return {[d0](double y) { return y >= d0 ? 1.0 : 0.0; }, {d0}, d0};
}

SpacingCdf shifted_exponential_spacing(double mu, double d_min) {
  if (!(mu > 0.0)) throw ValidationError("mu", "must be strictly positive");
  if (!(d_min >= 0.0)) throw ValidationError("d_min", "must be >= 0");
  return {[mu, d_min](double y) { return y <= d_min ? 0.0 : -std::expm1(-mu * (y - d_min)); },
          {d_min},
          d_min + 1.0 / mu};
}

QuantizedPmf harvest_quanta_pmf(const EnergyCdf& cdf, const Derived& d) {
  const int n = d.N_s;
  QuantizedPmf out{std::vector<double>(static_cast<std::size_t>(n) + 1), PmfRole::harvest};
  double prev = cdf(0.0);
  for (int k = 0; k < n; ++k) {
    const double next = cdf((k + 1) * d.E_tx);
    out.p[static_cast<std::size_t>(k)] = std::max(next - prev, 0.0);
    prev = next;
  }
  out.p[static_cast<std::size_t>(n)] = std::max(1.0 - prev, 0.0);
  return out;
}

QuantizedPmf tp_quanta_pmf(const SpacingCdf& spacing, const Derived& d, double ell) {
  const int n = d.N_s;
  QuantizedPmf out{std::vector<double>(static_cast<std::size_t>(n) + 1), PmfRole::transmit};
  const double base = 2.0 * ell;
  out.p[0] = spacing(base);
  for (int k = 1; k < n; ++k) {
    out.p[static_cast<std::size_t>(k)] =
        std::max(spacing(base + k * d.step) - spacing(base + (k - 1) * d.step), 0.0);
  }
  out.p[static_cast<std::size_t>(n)] = std::max(1.0 - spacing(base + (n - 1) * d.step), 0.0);
  return out;
}

QuantizedPmf tp_quanta_pmf(const TrafficModel& traffic, const Derived& d, double ell) {
  if (const auto* plat = std::get_if<Platoon>(&traffic)) {
    const double tp_length = plat->d0 - 2.0 * ell;
    if (tp_length < 0.0) return QuantizedPmf::unit(d.N_s, 0, PmfRole::transmit);
    const double slots = std::min(tp_length, d.N_s * d.step) / d.step;
    const int k = static_cast<int>(std::floor(slots + 1e-9));
    return QuantizedPmf::unit(d.N_s, k, PmfRole::transmit);
  }
  return tp_quanta_pmf(spacing_cdf(traffic), d, ell);
}

std::vector<double> TransitionMatrix::left_multiply(std::span<const double> pi) const {
  std::vector<double> out(static_cast<std::size_t>(n_), 0.0);
  for (int i = 0; i < n_; ++i) {
    const double w = pi[static_cast<std::size_t>(i)];
    if (w == 0.0) continue;
    const auto r = row(i);
    for (int j = 0; j < n_; ++j) out[static_cast<std::size_t>(j)] += w * r[static_cast<std::size_t>(j)];
  }
  return out;
}

TransitionMatrix transition_matrix(const QuantizedPmf& p_E, const QuantizedPmf& p_T) {
  if (p_E.p.size() != p_T.p.size() || p_E.p.empty()) {
    throw ValidationError("pmf", "p_E and p_T must share the support {0..N_s}");
  }
  const int n = p_E.N_s();
  // tail[a] = sum_{k >= a} p_T(k)
  std::vector<double> tail(static_cast<std::size_t>(n) + 2, 0.0);
  for (int k = n; k >= 0; --k) tail[static_cast<std::size_t>(k)] = tail[static_cast<std::size_t>(k) + 1] + p_T[static_cast<std::size_t>(k)];

  TransitionMatrix M(n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int h = 0; h <= n; ++h) {
      const double ph = p_E[static_cast<std::size_t>(h)];
      if (ph == 0.0) continue;
      const int avail = std::min(i + h, n);
      for (int j = 1; j <= avail; ++j) M(i, j) += ph * p_T[static_cast<std::size_t>(avail - j)];
      M(i, 0) += ph * tail[static_cast<std::size_t>(avail)];
    }
    double row_sum = 0.0;
    for (double v : M.row(i)) row_sum += v;
    if (std::abs(row_sum - 1.0) > 1e-9) {
      throw NumericalError("transition matrix row " + std::to_string(i) + " sums to " +
                           std::to_string(row_sum));
    }
  }
  return M;
}

namespace {

// Number of closed communicating classes of the chain's support graph.
int closed_class_count(const TransitionMatrix& M) {
  const int n = M.size();
  std::vector<std::vector<char>> reach(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  for (int s = 0; s < n; ++s) {
    auto& seen = reach[static_cast<std::size_t>(s)];
    std::vector<int> stack{s};
    seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (M(u, v) > 0.0 && !seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          stack.push_back(v);
        }
      }
    }
  }
  // A state is recurrent iff every state it reaches reaches it back.
  std::vector<int> class_of(static_cast<std::size_t>(n), -1);
  int closed = 0;
  for (int s = 0; s < n; ++s) {
    bool recurrent = true;
    for (int v = 0; v < n && recurrent; ++v) {
      if (reach[static_cast<std::size_t>(s)][static_cast<std::size_t>(v)] && !reach[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)]) recurrent = false;
    }
    if (!recurrent || class_of[static_cast<std::size_t>(s)] >= 0) continue;
    for (int v = 0; v < n; ++v) {
      if (reach[static_cast<std::size_t>(s)][static_cast<std::size_t>(v)]) class_of[static_cast<std::size_t>(v)] = closed;
    }
    ++closed;
  }
  return closed;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

}  // namespace

StationaryResult steady_state(const TransitionMatrix& M) {
  constexpr double kTol = 1e-12;
  constexpr std::size_t kMaxIter = 1'000'000;
  constexpr std::size_t kLazyAfter = 2'000;

  const auto n = static_cast<std::size_t>(M.size());
  StationaryResult out;
  out.reducible = closed_class_count(M) > 1;

  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  for (std::size_t it = 0; it < kMaxIter; ++it) {
    std::vector<double> next = M.left_multiply(pi);
    out.residual = l1_distance(next, pi);
    out.iterations = it;
    if (out.residual < kTol) break;
    // Averaging with the previous iterate keeps the fixed points and removes
    // oscillation on periodic chains.
    if (it >= kLazyAfter) {
      for (std::size_t i = 0; i < n; ++i) next[i] = 0.5 * (next[i] + pi[i]);
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    for (double& v : next) v /= total;
    pi.swap(next);
  }
  if (!(out.residual < kTol)) {
    throw NumericalError("steady state did not converge: residual " + std::to_string(out.residual) +
                         " after " + std::to_string(kMaxIter) + " iterations");
  }
  out.pi = QuantizedPmf{std::move(pi), PmfRole::stationary};
  return out;
}

QuantizedPmf post_harvest_pmf(const QuantizedPmf& p_B, const QuantizedPmf& p_E) {
  if (p_B.p.size() != p_E.p.size() || p_B.p.empty()) {
    throw ValidationError("pmf", "p_B and p_E must share the support {0..N_s}");
  }
  const int n = p_B.N_s();
  QuantizedPmf out{std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0), PmfRole::post_harvest};
  for (int j = 0; j <= n; ++j) {
    const double pb = p_B[static_cast<std::size_t>(j)];
    if (pb == 0.0) continue;
    for (int h = 0; h <= n; ++h) {
      out.p[static_cast<std::size_t>(std::min(j + h, n))] += pb * p_E[static_cast<std::size_t>(h)];
    }
  }
  return out;
}

}  // namespace vharvest
