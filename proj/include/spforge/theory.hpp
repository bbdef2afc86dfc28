#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "spforge/engine.hpp"
#include "spforge/error.hpp"
#include "spforge/sdr.hpp"
#include "spforge/state.hpp"

namespace spforge {

using Rational = boost::multiprecision::cpp_rational;

namespace detail {
inline void check_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ParamError("theta", "must lie in (0, 1)");
}
inline void check_t(double t) {
  if (!(t >= 1.0)) throw ParamError("t", "sample size must be at least 1");
}
}  // namespace detail

/// l(theta) = t*xbar*log(theta) + (t - t*xbar)*log(1 - theta) for t i.i.d. Bernoulli(theta) bits with mean xbar.
inline double log_likelihood(double theta, double x_bar, double t) {
  detail::check_theta(theta);
  detail::check_t(t);
  return t * x_bar * std::log(theta) + (t - t * x_bar) * std::log1p(-theta);
}

inline double likelihood(double theta, double x_bar, double t) { return std::exp(log_likelihood(theta, x_bar, t)); }

/// d l / d theta.
inline double gradient(double theta, double x_bar, double t) {
  detail::check_theta(theta);
  detail::check_t(t);
  return (t / theta) * x_bar - (t / (1.0 - theta)) * (1.0 - x_bar);
}

/// Partial derivative of the log-likelihood contributed by a single bit.
inline double synapse_partial(double theta, std::uint8_t x_bit) {
  detail::check_theta(theta);
  return x_bit ? 1.0 / theta : -1.0 / (1.0 - theta);
}

/// The maximizer of the log-likelihood in closed form.
inline double theta_mle(double x_bar) { return x_bar; }

/// Mean of X as an exact count: `ones` set bits out of `t` gathered synapse inputs.
struct XBar {
  std::uint64_t ones = 0;
  std::uint64_t t = 0;

  double value() const { return t == 0 ? 0.0 : static_cast<double>(ones) / static_cast<double>(t); }
  Rational exact() const { return Rational(ones, t); }
};

/// X-bar over every gathered synapse input of the batch, through the state's synapse map.
inline XBar estimate_x_bar(const SpState& s, const SdrBatch& batch) {
  XBar xb;
  for (const auto& u : batch.rows) {
    auto x = gather_inputs(s, u);
    xb.ones += count_active(x.x);
    xb.t += x.x.size();
  }
  return xb;
}

/**
 * Increment pair phi_plus = kappa / xbar, phi_minus = kappa / (1 - xbar).
 *
 * The exact fields hold the rational values, for which
 * phi_plus*xbar == phi_minus*(1 - xbar) == kappa with no rounding.
 * The doubles are those rationals rounded once.
 */
struct DerivedIncrements {
  double phi_plus = 0.0;
  double phi_minus = 0.0;
  Rational exact_plus;
  Rational exact_minus;
  Rational kappa;
  Rational x_bar;
};

inline DerivedIncrements derived_increments(const Rational& kappa, const Rational& x_bar) {
  if (kappa <= 0) throw ParamError("kappa", "must be positive");
  if (x_bar <= 0 || x_bar >= 1) throw ParamError("x_bar", "must lie strictly between 0 and 1");
  DerivedIncrements d;
  d.kappa = kappa;
  d.x_bar = x_bar;
  d.exact_plus = kappa / x_bar;
  d.exact_minus = kappa / (1 - x_bar);
  if (d.exact_plus > 1)
    throw ParamError("kappa", "kappa / x_bar = " + std::to_string(d.exact_plus.convert_to<double>()) + " exceeds 1");
  if (d.exact_minus > 1)
    throw ParamError("kappa",
                     "kappa / (1 - x_bar) = " + std::to_string(d.exact_minus.convert_to<double>()) + " exceeds 1");
  d.phi_plus = d.exact_plus.convert_to<double>();
  d.phi_minus = d.exact_minus.convert_to<double>();
  return d;
}

/// Doubles are taken at their exact binary values.
inline DerivedIncrements derived_increments(double kappa, double x_bar) {
  if (!std::isfinite(kappa)) throw ParamError("kappa", "must be finite");
  if (!std::isfinite(x_bar)) throw ParamError("x_bar", "must be finite");
  return derived_increments(Rational(kappa), Rational(x_bar));
}

inline DerivedIncrements derived_increments(double kappa, const XBar& x_bar) {
  if (x_bar.t == 0) throw ParamError("x_bar", "no samples");
  return derived_increments(Rational(kappa), x_bar.exact());
}

/// True when both increments stay within [0, 1] for this kappa.
inline bool increments_feasible(double kappa, double x_bar) {
  if (!(kappa > 0.0) || !(x_bar > 0.0 && x_bar < 1.0)) return false;
  Rational k(kappa), x(x_bar);
  return k / x <= 1 && k / (1 - x) <= 1;
}

/// Permanence change of one synapse on an active column.
inline double per_synapse_update(std::uint8_t x_bit, double phi_plus, double phi_minus) {
  return x_bit ? phi_plus : -phi_minus;
}

}  // namespace spforge
