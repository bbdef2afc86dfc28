#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spforge/error.hpp"
#include "spforge/init_stats.hpp"
#include "spforge/params.hpp"
#include "spforge/sdr.hpp"
#include "spforge/state.hpp"

namespace spforge {

/// Per-column view of one input: x[i*q + k] = u[lambda[i*q + k]].
struct XMask {
  std::uint32_t m = 0, q = 0;
  std::vector<std::uint8_t> x;

  std::span<const std::uint8_t> row(std::size_t i) const { return {x.data() + i * q, q}; }
  friend bool operator==(const XMask&, const XMask&) = default;
};

/// Everything one step computed, for telemetry and tests.
struct ComputeTrace {
  std::vector<std::uint32_t> alpha_hat;  ///< raw overlap counts
  std::vector<double> alpha;             ///< boosted overlaps
  std::vector<double> gamma;             ///< inhibition thresholds
  SdrVector active;
  std::uint32_t boosted_overlap_count = 0;     ///< columns with b > 1 after the boost update
  std::uint32_t boosted_permanence_count = 0;  ///< columns lifted by the permanence boost
  std::uint32_t inhibition_radius = 1;
  std::uint64_t iteration = 0;
};

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

std::uint32_t update_inhibition_radius(SpState& s);

/// Fresh state: random synapse map and permanences from params.seed, unit boosts, zero duty cycles.
inline SpState initialize(const ValidatedParams& params) {
  std::mt19937_64 rng(params->seed);
  SpState s(params);
  s.lambda = sample_connections(params->p, params->q, params->m, rng);
  s.phi = init_permanences(s.lambda, params, rng);
  s.boosts.assign(params->m, 1.0);
  s.adc.assign(params->m, 0.0);
  s.odc.assign(params->m, 0.0);
  s.mdc.assign(params->m, 0.0);
  update_inhibition_radius(s);
  refresh_neighborhoods(s);
  return s;
}

// ---------------------------------------------------------------------------
// Phase 1: overlap
// ---------------------------------------------------------------------------

inline XMask gather_inputs(const SpState& s, std::span<const std::uint8_t> u) {
  detail::require_shape(u.size() == s.p(), "input width " + std::to_string(u.size()) + " does not match p = " +
                                               std::to_string(s.p()));
  XMask x{s.m(), s.q(), std::vector<std::uint8_t>(s.lambda.size())};
  for (std::size_t idx = 0; idx < s.lambda.size(); ++idx) x.x[idx] = u[s.lambda[idx]] != 0;
  return x;
}

struct Overlap {
  std::vector<std::uint32_t> alpha_hat;
  std::vector<double> alpha;
};

inline Overlap compute_overlap(const SpState& s, const XMask& x) {
  detail::require_shape(x.m == s.m() && x.q == s.q(), "XMask shape does not match state");
  const double rho_s = s.params->rho_s;
  const std::uint32_t rho_d = s.params->rho_d;
  Overlap o{std::vector<std::uint32_t>(s.m()), std::vector<double>(s.m(), 0.0)};
  for (std::size_t i = 0; i < s.m(); ++i) {
    auto xi = x.row(i);
    auto phi = s.permanences(i);
    std::uint32_t count = 0;
    for (std::size_t k = 0; k < xi.size(); ++k) count += xi[k] & (phi[k] >= rho_s);
    o.alpha_hat[i] = count;
    if (count >= rho_d) o.alpha[i] = count * s.boosts[i];
  }
  return o;
}

// ---------------------------------------------------------------------------
// Phase 2: inhibition
// ---------------------------------------------------------------------------

/// k-th largest value counting duplicates (k >= 1); 0 when k exceeds the element count.
inline double kmax(std::vector<double> values, std::size_t k) {
  if (k == 0 || k > values.size()) return 0.0;
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(values.begin(), nth, values.end(), std::greater<>());
  return *nth;
}

struct Inhibition {
  SdrVector active;
  std::vector<double> gamma;
};

inline Inhibition inhibit(const SpState& s, std::span<const double> alpha) {
  detail::require_shape(alpha.size() == s.m(), "alpha length does not match m");
  const auto& H = s.neighborhoods;
  const auto& target = s.params.activity();
  Inhibition r{SdrVector(s.m(), 0), std::vector<double>(s.m(), 1.0)};
  std::vector<double> buf;
  // Rows sharing a run share a threshold; global mode is one run.
  std::uint32_t prev_lo = 1, prev_hi = 0;
  double prev_gamma = 1.0;
  for (std::uint32_t i = 0; i < s.m(); ++i) {
    const auto lo = H.first(i), hi = H.last(i);
    if (lo != prev_lo || hi != prev_hi) {
      buf.assign(alpha.begin() + lo, alpha.begin() + hi + 1);
      prev_gamma = std::max(kmax(std::move(buf), target.winners(H.count(i))), 1.0);
      prev_lo = lo;
      prev_hi = hi;
    }
    r.gamma[i] = prev_gamma;
    r.active[i] = alpha[i] >= prev_gamma;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Phase 3: learning
// ---------------------------------------------------------------------------

/// One row of the permanence delta: +phi_plus on active inputs, -phi_minus on inactive ones.
inline std::vector<double> permanence_delta(std::span<const std::uint8_t> x_row, double phi_plus, double phi_minus) {
  std::vector<double> d(x_row.size());
  for (std::size_t k = 0; k < x_row.size(); ++k) d[k] = x_row[k] ? phi_plus : -phi_minus;
  return d;
}

inline void adapt_permanences(SpState& s, const XMask& x, std::span<const std::uint8_t> active) {
  detail::require_shape(active.size() == s.m(), "active length does not match m");
  const double inc = s.params->phi_plus, dec = s.params->phi_minus;
  for (std::size_t i = 0; i < s.m(); ++i) {
    if (!active[i]) continue;
    auto xi = x.row(i);
    auto phi = s.permanences(i);
    for (std::size_t k = 0; k < phi.size(); ++k)
      phi[k] = xi[k] ? std::min(1.0, phi[k] + inc) : std::max(0.0, phi[k] - dec);
  }
  const double trim = s.params->trim_threshold;
  if (trim > 0.0)
    for (auto& v : s.phi)
      if (v <= trim) v = 0.0;
}

/// Duty-cycle period for the current iteration.
inline double duty_period(const SpState& s) {
  return static_cast<double>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(s.iteration, s.params->tau)));
}

inline void update_duty_cycles(SpState& s, std::span<const std::uint32_t> alpha_hat,
                               std::span<const std::uint8_t> active) {
  const double T = duty_period(s);
  const std::uint32_t rho_d = s.params->rho_d;
  for (std::size_t i = 0; i < s.m(); ++i) {
    s.adc[i] = (s.adc[i] * (T - 1.0) + (active[i] ? 1.0 : 0.0)) / T;
    s.odc[i] = (s.odc[i] * (T - 1.0) + (alpha_hat[i] >= rho_d ? 1.0 : 0.0)) / T;
  }
}

inline void update_min_duty_cycles(SpState& s) {
  const double kappa = s.params->kappa_a;
  const auto& H = s.neighborhoods;
  std::uint32_t prev_lo = 1, prev_hi = 0;
  double prev = 0.0;
  for (std::uint32_t i = 0; i < s.m(); ++i) {
    if (H.first(i) != prev_lo || H.last(i) != prev_hi) {
      prev_lo = H.first(i);
      prev_hi = H.last(i);
      prev = *std::max_element(s.adc.begin() + prev_lo, s.adc.begin() + prev_hi + 1);
    }
    s.mdc[i] = kappa * prev;
  }
}

/// Boost for one column; the cases are checked in order.
inline double boost_value(double adc, double mdc, double beta_0) {
  if (mdc == 0.0) return beta_0;
  if (adc > mdc) return 1.0;
  return adc * ((1.0 - beta_0) / mdc) + beta_0;
}

/// Returns the number of columns whose boost exceeds one.
inline std::uint32_t update_boosts(SpState& s) {
  std::uint32_t boosted = 0;
  for (std::size_t i = 0; i < s.m(); ++i) {
    s.boosts[i] = boost_value(s.adc[i], s.mdc[i], s.params->beta_0);
    boosted += s.boosts[i] > 1.0;
  }
  return boosted;
}

/// Lifts every permanence of columns whose overlap duty cycle is below their minimum. Returns that column count.
inline std::uint32_t boost_permanences(SpState& s) {
  const double lift = s.params->kappa_b * s.params->rho_s;
  std::uint32_t boosted = 0;
  for (std::size_t i = 0; i < s.m(); ++i) {
    if (!(s.odc[i] < s.mdc[i])) continue;
    ++boosted;
    for (auto& v : s.permanences(i)) v = std::min(1.0, v + lift);
  }
  return boosted;
}

/// Average connected-synapse distance, floored and at least one.
inline std::uint32_t update_inhibition_radius(SpState& s) {
  const double rho_s = s.params->rho_s;
  double total = 0.0;
  std::uint64_t connected = 0;
  for (std::size_t i = 0; i < s.m(); ++i) {
    auto src = s.sources(i);
    auto phi = s.permanences(i);
    for (std::size_t k = 0; k < src.size(); ++k) {
      if (phi[k] < rho_s) continue;
      total += s.distance(i, src[k]);
      ++connected;
    }
  }
  const double avg = std::floor(total / static_cast<double>(std::max<std::uint64_t>(1, connected)));
  s.inhibition_radius = static_cast<std::uint32_t>(std::max(1.0, avg));
  return s.inhibition_radius;
}

inline const Neighborhoods& update_neighborhoods(SpState& s) {
  refresh_neighborhoods(s);
  return s.neighborhoods;
}

// ---------------------------------------------------------------------------
// Full step
// ---------------------------------------------------------------------------

inline ComputeTrace step(const SpState& s, std::span<const std::uint8_t> u) {
  auto x = gather_inputs(s, u);
  auto ov = compute_overlap(s, x);
  auto inh = inhibit(s, ov.alpha);
  ComputeTrace t;
  t.alpha_hat = std::move(ov.alpha_hat);
  t.alpha = std::move(ov.alpha);
  t.gamma = std::move(inh.gamma);
  t.active = std::move(inh.active);
  t.inhibition_radius = s.inhibition_radius;
  t.iteration = s.iteration;
  for (double b : s.boosts) t.boosted_overlap_count += b > 1.0;
  return t;
}

/// Runs one presentation. With learn=false the state is not touched.
inline ComputeTrace step(SpState& s, std::span<const std::uint8_t> u, bool learn) {
  if (!learn) return step(std::as_const(s), u);
  auto x = gather_inputs(s, u);
  auto ov = compute_overlap(s, x);
  auto inh = inhibit(s, ov.alpha);
  ++s.iteration;
  adapt_permanences(s, x, inh.active);
  update_min_duty_cycles(s);
  update_duty_cycles(s, ov.alpha_hat, inh.active);

  ComputeTrace t;
  if (s.params->boost_enabled) {
    t.boosted_overlap_count = update_boosts(s);
    t.boosted_permanence_count = boost_permanences(s);
  }
  update_inhibition_radius(s);
  update_neighborhoods(s);

  t.alpha_hat = std::move(ov.alpha_hat);
  t.alpha = std::move(ov.alpha);
  t.gamma = std::move(inh.gamma);
  t.active = std::move(inh.active);
  t.inhibition_radius = s.inhibition_radius;
  t.iteration = s.iteration;
  return t;
}

/// Column activations for each pattern, without learning.
inline SdrBatch transform(const SpState& s, const SdrBatch& batch) {
  SdrBatch out;
  out.width = s.m();
  out.rows.reserve(batch.size());
  for (const auto& u : batch.rows) out.rows.push_back(step(s, u).active);
  return out;
}

using StepObserver = std::function<void(std::size_t epoch, std::size_t index, const ComputeTrace&)>;

/// Presents the batch in order `epochs` times with learning on.
inline void train(SpState& s, const SdrBatch& batch, std::size_t epochs, const StepObserver& observe = {}) {
  for (std::size_t e = 0; e < epochs; ++e)
    for (std::size_t j = 0; j < batch.size(); ++j) {
      auto t = step(s, batch[j], true);
      if (observe) observe(e, j, t);
    }
}

}  // namespace spforge
