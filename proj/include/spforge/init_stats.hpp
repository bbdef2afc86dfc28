#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "spforge/error.hpp"
#include "spforge/params.hpp"

namespace spforge {

// ---------------------------------------------------------------------------
// Initialization of the synapse map and permanences
// ---------------------------------------------------------------------------

/// Draws m rows of q distinct input indices in [0, p), uniformly without replacement.
template <class Rng>
std::vector<std::uint32_t> sample_connections(std::uint32_t p, std::uint32_t q, std::uint32_t m, Rng& rng) {
  if (q > p) throw ParamError("q", "q exceeds p (synapses are sampled without replacement)");
  std::vector<std::uint32_t> lambda;
  lambda.reserve(static_cast<std::size_t>(m) * q);
  std::vector<std::uint32_t> pool(p);
  for (std::uint32_t i = 0; i < m; ++i) {
    std::iota(pool.begin(), pool.end(), 0u);
    // Partial Fisher-Yates: the first q slots end up a uniform q-subset in random order.
    for (std::uint32_t k = 0; k < q; ++k) {
      std::uniform_int_distribution<std::uint32_t> pick(k, p - 1);
      std::swap(pool[k], pool[pick(rng)]);
      lambda.push_back(pool[k]);
    }
  }
  return lambda;
}

/**
 * Permanences drawn from Unif(rho_s - phi_delta, rho_s + phi_delta).
 *
 * With `distance_taper` the upper end of each synapse's window shrinks
 * linearly with the column-to-input distance, reaching the lower bound for
 * the farthest input. No connected-count floor is applied here.
 */
template <class Rng>
std::vector<double> draw_permanences(const std::vector<std::uint32_t>& lambda, const ValidatedParams& params,
                                     Rng& rng) {
  const auto& s = params.raw();
  const double lo = s.rho_s - s.phi_delta;
  const double width = 2.0 * s.phi_delta;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> phi(lambda.size());
  for (std::size_t idx = 0; idx < lambda.size(); ++idx) {
    double scale = 1.0;
    if (s.distance_taper && s.p > 1) {
      const std::size_t i = idx / s.q;
      const double col = s.m > 1 ? static_cast<double>(i) * (s.p - 1) / (s.m - 1) : 0.0;
      scale = 1.0 - std::abs(col - static_cast<double>(lambda[idx])) / static_cast<double>(s.p - 1);
    }
    phi[idx] = std::clamp(lo + unit(rng) * width * scale, 0.0, 1.0);
  }
  return phi;
}

/// Raises the largest sub-threshold permanences of each deficient row to exactly rho_s until rho_d are connected.
inline void enforce_connected_floor(std::vector<double>& phi, const ValidatedParams& params) {
  const auto& s = params.raw();
  std::vector<std::uint32_t> order(s.q);
  for (std::size_t i = 0; i < s.m; ++i) {
    double* row = phi.data() + i * s.q;
    std::uint32_t connected = 0;
    for (std::uint32_t k = 0; k < s.q; ++k) connected += row[k] >= s.rho_s;
    if (connected >= s.rho_d) continue;
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [row](std::uint32_t a, std::uint32_t b) { return row[a] > row[b]; });
    std::uint32_t missing = s.rho_d - connected;
    for (auto k : order) {
      if (missing == 0) break;
      if (row[k] >= s.rho_s) continue;
      row[k] = s.rho_s;
      --missing;
    }
  }
}

template <class Rng>
std::vector<double> init_permanences(const std::vector<std::uint32_t>& lambda, const ValidatedParams& params,
                                     Rng& rng) {
  auto phi = draw_permanences(lambda, params, rng);
  enforce_connected_floor(phi, params);
  return phi;
}

// ---------------------------------------------------------------------------
// Closed-form visibility and activity statistics
// ---------------------------------------------------------------------------

/// Which per-column connection probability to use.
enum class ConnectModel {
  eq1,    ///< (q + 1) / p, the telescoped product over k = 0..q
  exact,  ///< q / p, exact for q synapses sampled without replacement
};

namespace detail {
inline void check_pq(std::uint32_t p, std::uint32_t q) {
  if (p == 0) throw ParamError("p", "input width must be at least 1");
  if (q > p) throw ParamError("q", "q exceeds p");
}
}  // namespace detail

/// Probability that a given input is among a column's synapses. The eq1 value is capped at 1 (only reached for q >= p - 1).
inline double prob_input_connect(std::uint32_t p, std::uint32_t q, ConnectModel model = ConnectModel::eq1) {
  detail::check_pq(p, q);
  if (model == ConnectModel::exact) return static_cast<double>(q) / p;
  return std::min(1.0, static_cast<double>(q + 1) / p);
}

/// 1 - prod_{k=0}^{q} (1 - 1/(p - k)); once a factor reaches zero the product stays zero.
inline double prob_input_connect_product(std::uint32_t p, std::uint32_t q) {
  detail::check_pq(p, q);
  double miss = 1.0;
  for (std::uint32_t k = 0; k <= q; ++k) {
    if (p - k <= 1) return 1.0;
    miss *= 1.0 - 1.0 / static_cast<double>(p - k);
  }
  return 1.0 - miss;
}

struct VisibilityStats {
  double p_connect = 0.0;                ///< P(input r connects to a given column)
  double expected_cols_per_input = 0.0;  ///< E[lambda_r]
  double p_never = 0.0;                  ///< P(lambda_r = 0)
  double expected_unobserved = 0.0;      ///< E[lambda'], inputs no column sees
};

inline VisibilityStats visibility_stats(std::uint32_t p, std::uint32_t q, std::uint32_t m,
                                        ConnectModel model = ConnectModel::eq1) {
  if (m < 1) throw ParamError("m", "column count must be at least 1");
  VisibilityStats v;
  v.p_connect = prob_input_connect(p, q, model);
  v.expected_cols_per_input = m * v.p_connect;
  v.p_never = std::pow(1.0 - v.p_connect, static_cast<double>(m));
  v.expected_unobserved = p * v.p_never;
  return v;
}

// Binomial helpers, evaluated in log space.

inline double binomial_log_pmf(std::uint32_t k, std::uint32_t n, double prob) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (k > n) return neg_inf;
  if (prob <= 0.0) return k == 0 ? 0.0 : neg_inf;
  if (prob >= 1.0) return k == n ? 0.0 : neg_inf;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(prob) +
         (n - k) * std::log1p(-prob);
}

namespace detail {
/// log(sum_{t=lo}^{hi} Bin(t; n, prob)) via log-sum-exp.
inline double binomial_log_sum(std::uint32_t lo, std::uint32_t hi, std::uint32_t n, double prob) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (lo > hi) return neg_inf;
  double peak = neg_inf;
  for (std::uint32_t t = lo; t <= hi; ++t) peak = std::max(peak, binomial_log_pmf(t, n, prob));
  if (peak == neg_inf) return neg_inf;
  double acc = 0.0;
  for (std::uint32_t t = lo; t <= hi; ++t) acc += std::exp(binomial_log_pmf(t, n, prob) - peak);
  return peak + std::log(acc);
}
}  // namespace detail

/// P(X >= k) for X ~ Bin(n, prob). Sums the shorter-risk tail directly instead of complementing a value near 1.
inline double binomial_at_least(std::uint32_t k, std::uint32_t n, double prob) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  const double mean = n * prob;
  if (static_cast<double>(k) > mean) return std::exp(detail::binomial_log_sum(k, n, n, prob));
  return 1.0 - std::exp(detail::binomial_log_sum(0, k - 1, n, prob));
}

struct ActivityStats {
  double expected_active_per_column = 0.0;  ///< E[ai_i] = E[a]
  double expected_active_connected = 0.0;   ///< E[ac_i]
  double expected_cols_at_threshold = 0.0;  ///< E[at]
  double expected_cols_active_connected_at_threshold = 0.0;  ///< E[act]
  double pi_x = 0.0;
  double pi_ac = 0.0;
};

/// Expected initial activity for i.i.d. inputs active with probability `p_active`.
inline ActivityStats activity_stats(std::uint32_t m, std::uint32_t q, std::uint32_t rho_d, double rho_s,
                                    double p_active) {
  if (!(p_active >= 0.0 && p_active <= 1.0)) throw ParamError("p_active", "must lie in [0, 1]");
  if (rho_d > q) throw ParamError("rho_d", "activation threshold exceeds q");
  ActivityStats a;
  a.pi_x = p_active;
  a.pi_ac = p_active * rho_s;
  a.expected_active_per_column = q * a.pi_x;
  a.expected_active_connected = q * a.pi_ac;
  a.expected_cols_at_threshold = m * binomial_at_least(rho_d, q, a.pi_x);
  a.expected_cols_active_connected_at_threshold = m * binomial_at_least(rho_d, q, a.pi_ac);
  return a;
}

inline ActivityStats activity_stats(const ValidatedParams& params, double p_active) {
  const auto& s = params.raw();
  return activity_stats(s.m, s.q, s.rho_d, s.rho_s, p_active);
}

}  // namespace spforge
