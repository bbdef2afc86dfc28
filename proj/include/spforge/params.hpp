#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>

#include "spforge/error.hpp"

namespace spforge {

enum class InhibitionMode : std::uint8_t { global = 0, local = 1 };

inline const char* to_string(InhibitionMode mode) { return mode == InhibitionMode::global ? "global" : "local"; }

/**
 * User parameters of a spatial pooler region.
 *
 * `rho_c` is overloaded: a whole number >= 1 is a fixed count of winners per
 * neighborhood, anything in (0, 1) is a density of the neighborhood size.
 * `validate()` resolves which one applies.
 */
struct SpParams {
  std::uint64_t n = 0;  ///< pattern count, informational only
  std::uint32_t p = 0;  ///< input width in bits
  std::uint32_t m = 0;  ///< column count
  std::uint32_t q = 0;  ///< proximal synapses per column

  double phi_plus = 0.03;   ///< permanence increment
  double phi_minus = 0.05;  ///< permanence decrement
  double phi_delta = 0.05;  ///< half-width of the initial permanence window

  std::uint32_t rho_d = 0;  ///< segment activation threshold
  double rho_s = 0.5;       ///< synapse connection threshold
  double rho_c = 0.02;      ///< desired activity (count or density)

  double kappa_a = 0.01;  ///< minimum duty cycle scale
  double kappa_b = 0.1;   ///< permanence boost scale
  double beta_0 = 10.0;   ///< maximum boost
  std::uint32_t tau = 100;

  InhibitionMode inhibition_mode = InhibitionMode::global;
  /// Permanences at or below this are zeroed after adaptation. <= 0 disables trimming.
  double trim_threshold = 1e-4;
  std::uint64_t seed = 0;

  /// Engine option: when false both boosting mechanisms are skipped entirely.
  bool boost_enabled = true;
  /// Engine option: bias initial permanences toward inputs near the column.
  bool distance_taper = false;

  friend bool operator==(const SpParams&, const SpParams&) = default;
};

/// Resolved form of rho_c.
struct ActivityTarget {
  enum class Kind : std::uint8_t { constant, density };
  Kind kind = Kind::constant;
  double value = 1.0;

  /// Winners wanted in a neighborhood of `neighbors` columns; never below one.
  std::uint32_t winners(std::size_t neighbors) const {
    if (kind == Kind::constant) return static_cast<std::uint32_t>(value);
    // The epsilon keeps products like 0.07 * 100 from flooring to 6.
    auto k = static_cast<std::uint32_t>(std::floor(value * static_cast<double>(neighbors) + 1e-9));
    return std::max<std::uint32_t>(k, 1);
  }

  friend bool operator==(const ActivityTarget&, const ActivityTarget&) = default;
};

class ValidatedParams;
ValidatedParams validate(const SpParams& params);

/// SpParams that passed `validate()`. Only constructible through it.
class ValidatedParams {
 public:
  const SpParams& raw() const noexcept { return params_; }
  const SpParams* operator->() const noexcept { return &params_; }
  const ActivityTarget& activity() const noexcept { return activity_; }

  friend bool operator==(const ValidatedParams&, const ValidatedParams&) = default;

 private:
  friend ValidatedParams validate(const SpParams& params);
  ValidatedParams(const SpParams& p, ActivityTarget a) : params_(p), activity_(a) {}

  SpParams params_;
  ActivityTarget activity_;
};

namespace detail {

inline void check(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ParamError(field, what);
}

inline bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace detail

/// Checks every parameter domain in declaration order and throws ParamError on the first violation.
inline ValidatedParams validate(const SpParams& params) {
  using detail::check;
  using detail::in_unit;
  const auto& s = params;

  check(s.p >= 1, "p", "input width must be at least 1");
  check(s.m >= 1, "m", "column count must be at least 1");
  check(s.q >= 1, "q", "synapses per column must be at least 1");
  check(s.q <= s.p, "q", "q exceeds p (synapses are sampled without replacement)");
  check(in_unit(s.phi_plus), "phi_plus", "must lie in [0, 1]");
  check(in_unit(s.phi_minus), "phi_minus", "must lie in [0, 1]");
  check(s.rho_d <= s.q, "rho_d", "activation threshold exceeds q");
  check(s.rho_s > 0.0 && s.rho_s < 1.0, "rho_s", "must lie in (0, 1)");
  check(s.phi_delta >= 0.0, "phi_delta", "must be non-negative");
  check(s.rho_s - s.phi_delta >= 0.0 && s.rho_s + s.phi_delta <= 1.0, "phi_delta",
        "rho_s +/- phi_delta leaves [0, 1]");

  ActivityTarget activity;
  check(std::isfinite(s.rho_c) && s.rho_c > 0.0, "rho_c", "must be positive");
  if (s.rho_c >= 1.0) {
    check(s.rho_c == std::floor(s.rho_c), "rho_c", "values >= 1 must be whole column counts");
    check(s.rho_c <= static_cast<double>(s.m), "rho_c", "constant activity exceeds m");
    activity = {ActivityTarget::Kind::constant, s.rho_c};
  } else {
    activity = {ActivityTarget::Kind::density, s.rho_c};
  }

  check(s.kappa_a >= 0.0 && s.kappa_a <= 1.0, "kappa_a", "must lie in [0, 1]");
  check(s.kappa_b >= 0.0, "kappa_b", "must be non-negative");
  check(s.beta_0 >= 1.0, "beta_0", "maximum boost must be at least 1");
  check(s.tau >= 1, "tau", "duty cycle period must be at least 1");
  check(!std::isnan(s.trim_threshold) && s.trim_threshold < 1.0, "trim_threshold", "must be below 1");
  return ValidatedParams(params, activity);
}

// ---------------------------------------------------------------------------
// Config file: UTF-8 `key=value` lines named after the SpParams members.
// `#` starts a comment. Unknown keys are rejected.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream ss(text);
  T v{};
  ss >> v;
  if (!ss || !(ss >> std::ws).eof()) throw FormatError("config: bad value for " + key + ": '" + text + "'");
  if constexpr (std::is_unsigned_v<T>) {
    if (text.find('-') != std::string::npos) throw FormatError("config: " + key + " must be non-negative");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw FormatError("config: bad boolean for " + key + ": '" + text + "'");
}

}  // namespace detail

inline void apply_config_entry(SpParams& s, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "n") s.n = parse_number<std::uint64_t>(key, value);
  else if (key == "p") s.p = parse_number<std::uint32_t>(key, value);
  else if (key == "m") s.m = parse_number<std::uint32_t>(key, value);
  else if (key == "q") s.q = parse_number<std::uint32_t>(key, value);
  else if (key == "phi_plus") s.phi_plus = parse_number<double>(key, value);
  else if (key == "phi_minus") s.phi_minus = parse_number<double>(key, value);
  else if (key == "phi_delta") s.phi_delta = parse_number<double>(key, value);
  else if (key == "rho_d") s.rho_d = parse_number<std::uint32_t>(key, value);
  else if (key == "rho_s") s.rho_s = parse_number<double>(key, value);
  else if (key == "rho_c") s.rho_c = parse_number<double>(key, value);
  else if (key == "kappa_a") s.kappa_a = parse_number<double>(key, value);
  else if (key == "kappa_b") s.kappa_b = parse_number<double>(key, value);
  else if (key == "beta_0") s.beta_0 = parse_number<double>(key, value);
  else if (key == "tau") s.tau = parse_number<std::uint32_t>(key, value);
  else if (key == "inhibition_mode") {
    if (value == "global") s.inhibition_mode = InhibitionMode::global;
    else if (value == "local") s.inhibition_mode = InhibitionMode::local;
    else throw FormatError("config: inhibition_mode must be global or local");
  } else if (key == "trim_threshold") s.trim_threshold = parse_number<double>(key, value);
  else if (key == "seed") s.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "boost_enabled") s.boost_enabled = detail::parse_bool(key, value);
  else if (key == "distance_taper") s.distance_taper = detail::parse_bool(key, value);
  else throw FormatError("config: unknown key '" + key + "'");
}

/// Parses a config stream on top of `base` (defaults if omitted). Does not validate.
inline SpParams read_config(std::istream& in, SpParams base = {}) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(line_no) + ": expected key=value");
    apply_config_entry(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return base;
}

inline void write_config(std::ostream& out, const SpParams& s) {
  auto old = out.precision(17);
  out << "n=" << s.n << '\n'
      << "p=" << s.p << '\n'
      << "m=" << s.m << '\n'
      << "q=" << s.q << '\n'
      << "phi_plus=" << s.phi_plus << '\n'
      << "phi_minus=" << s.phi_minus << '\n'
      << "phi_delta=" << s.phi_delta << '\n'
      << "rho_d=" << s.rho_d << '\n'
      << "rho_s=" << s.rho_s << '\n'
      << "rho_c=" << s.rho_c << '\n'
      << "kappa_a=" << s.kappa_a << '\n'
      << "kappa_b=" << s.kappa_b << '\n'
      << "beta_0=" << s.beta_0 << '\n'
      << "tau=" << s.tau << '\n'
      << "inhibition_mode=" << to_string(s.inhibition_mode) << '\n'
      << "trim_threshold=" << s.trim_threshold << '\n'
      << "seed=" << s.seed << '\n'
      << "boost_enabled=" << (s.boost_enabled ? "true" : "false") << '\n'
      << "distance_taper=" << (s.distance_taper ? "true" : "false") << '\n';
  out.precision(old);
}

}  // namespace spforge
