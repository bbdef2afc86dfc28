#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spforge/error.hpp"
#include "spforge/params.hpp"

namespace spforge {

/**
 * Column membership mask H on the 1-D column line.
 *
 * Columns sit at evenly spaced coordinates of the input line
 * (column i at i*(p-1)/(m-1)), so in local mode each row of H is a
 * contiguous run of column indices. The mask is stored as those runs;
 * `dense()` materializes the full m x m matrix.
 */
class Neighborhoods {
 public:
  Neighborhoods() = default;

  static Neighborhoods global(std::uint32_t m) {
    Neighborhoods h;
    h.m_ = m;
    h.lo_.assign(m, 0);
    h.hi_.assign(m, m == 0 ? 0 : m - 1);
    return h;
  }

  /// Row i holds every j with |pos(i) - pos(j)| <= radius.
  static Neighborhoods local(std::uint32_t m, std::uint32_t p, std::uint32_t radius) {
    Neighborhoods h;
    h.m_ = m;
    h.lo_.resize(m);
    h.hi_.resize(m);
    // |i - j| * (p - 1) / (m - 1) <= radius, kept in integers so the boundary is exact.
    std::uint64_t reach = m > 1 && p > 1 ? (static_cast<std::uint64_t>(radius) * (m - 1)) / (p - 1) : m;
    for (std::uint32_t i = 0; i < m; ++i) {
      h.lo_[i] = static_cast<std::uint32_t>(i >= reach ? i - reach : 0);
      h.hi_[i] = static_cast<std::uint32_t>(std::min<std::uint64_t>(m - 1, i + reach));
    }
    return h;
  }

  std::uint32_t columns() const noexcept { return m_; }
  std::uint32_t first(std::uint32_t i) const { return lo_[i]; }
  std::uint32_t last(std::uint32_t i) const { return hi_[i]; }
  std::size_t count(std::uint32_t i) const { return static_cast<std::size_t>(hi_[i] - lo_[i]) + 1; }
  bool contains(std::uint32_t i, std::uint32_t j) const { return j >= lo_[i] && j <= hi_[i]; }

  std::vector<std::uint8_t> dense() const {
    std::vector<std::uint8_t> h(static_cast<std::size_t>(m_) * m_, 0);
    for (std::uint32_t i = 0; i < m_; ++i)
      for (std::uint32_t j = lo_[i]; j <= hi_[i]; ++j) h[static_cast<std::size_t>(i) * m_ + j] = 1;
    return h;
  }

  friend bool operator==(const Neighborhoods&, const Neighborhoods&) = default;

 private:
  std::uint32_t m_ = 0;
  std::vector<std::uint32_t> lo_, hi_;
};

/// Mutable state of one pooler region. Matrices are row-major m x q.
struct SpState {
  ValidatedParams params;
  std::vector<std::uint32_t> lambda;  ///< source input of each synapse
  std::vector<double> phi;            ///< permanences, always in [0, 1]
  std::vector<double> boosts;
  std::vector<double> adc;  ///< active duty cycles
  std::vector<double> odc;  ///< overlap duty cycles
  std::vector<double> mdc;  ///< minimum duty cycles
  std::uint32_t inhibition_radius = 1;
  Neighborhoods neighborhoods;
  std::uint64_t iteration = 0;  ///< completed learning steps

  explicit SpState(ValidatedParams p) : params(std::move(p)) {}

  std::uint32_t m() const noexcept { return params->m; }
  std::uint32_t q() const noexcept { return params->q; }
  std::uint32_t p() const noexcept { return params->p; }

  std::span<const std::uint32_t> sources(std::size_t i) const { return {lambda.data() + i * q(), q()}; }
  std::span<const double> permanences(std::size_t i) const { return {phi.data() + i * q(), q()}; }
  std::span<double> permanences(std::size_t i) { return {phi.data() + i * q(), q()}; }

  double column_position(std::size_t i) const {
    if (m() <= 1) return 0.0;
    return static_cast<double>(i) * static_cast<double>(p() - 1) / static_cast<double>(m() - 1);
  }
  static double input_position(std::size_t r) { return static_cast<double>(r); }

  /// Distance between column i and input r, including the fixed inter-layer offset.
  double distance(std::size_t i, std::size_t r) const {
    return std::abs(column_position(i) - input_position(r)) + kLayerOffset;
  }

  static constexpr double kLayerOffset = 0.5;

  friend bool operator==(const SpState&, const SpState&) = default;
};

/// Rebuilds H from the current radius and inhibition mode.
inline void refresh_neighborhoods(SpState& s) {
  s.neighborhoods = s.params->inhibition_mode == InhibitionMode::global
                        ? Neighborhoods::global(s.m())
                        : Neighborhoods::local(s.m(), s.p(), s.inhibition_radius);
}

/// Throws FormatError if any state invariant is broken.
inline void check_state(const SpState& s) {
  const std::size_t mq = static_cast<std::size_t>(s.m()) * s.q();
  auto fail = [](const std::string& what) { throw FormatError("invalid state: " + what); };
  if (s.lambda.size() != mq || s.phi.size() != mq) fail("matrix sizes do not match m x q");
  for (const auto* v : {&s.boosts, &s.adc, &s.odc, &s.mdc})
    if (v->size() != s.m()) fail("column vector size does not match m");
  std::vector<std::uint8_t> seen(s.p(), 0);
  for (std::size_t i = 0; i < s.m(); ++i) {
    auto row = s.sources(i);
    for (auto r : row) {
      if (r >= s.p()) fail("synapse source out of range");
      if (seen[r]) fail("duplicate synapse source in row " + std::to_string(i));
      seen[r] = 1;
    }
    for (auto r : row) seen[r] = 0;
  }
  for (double x : s.phi)
    if (!(x >= 0.0 && x <= 1.0)) fail("permanence outside [0, 1]");
  for (const auto* v : {&s.adc, &s.odc, &s.mdc})
    for (double x : *v)
      if (!(x >= 0.0 && x <= 1.0)) fail("duty cycle outside [0, 1]");
  for (double b : s.boosts)
    if (!std::isfinite(b) || b < 0.0) fail("boost is not a finite non-negative value");
  if (s.inhibition_radius < 1) fail("inhibition radius below one");
}

// ---------------------------------------------------------------------------
// Model file. Little-endian throughout:
//   "SPFORGE" | u32 version | SpParams | lambda u32[m*q] | phi f64[m*q]
//   | boosts, adc, odc, mdc f64[m] | u32 radius | u64 iteration
// ---------------------------------------------------------------------------

inline constexpr char kModelMagic[] = "SPFORGE";
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

class LeWriter {
 public:
  explicit LeWriter(std::ostream& out) : out_(out) {}

  template <class T>
  void uint(T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out_.write(reinterpret_cast<const char*>(buf), sizeof(T));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void u8(std::uint8_t v) { uint(v); }

 private:
  std::ostream& out_;
};

class LeReader {
 public:
  explicit LeReader(std::istream& in) : in_(in) {}

  template <class T>
  T uint() {
    unsigned char buf[sizeof(T)];
    if (!in_.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError("model file truncated");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(buf[i]) << (8 * i));
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::uint8_t u8() { return uint<std::uint8_t>(); }

  void bytes(char* dst, std::size_t n) {
    if (!in_.read(dst, static_cast<std::streamsize>(n))) throw FormatError("model file truncated");
  }

 private:
  std::istream& in_;
};

inline void write_params(LeWriter& w, const SpParams& s) {
  w.uint(s.n);
  w.uint(s.p);
  w.uint(s.m);
  w.uint(s.q);
  w.f64(s.phi_plus);
  w.f64(s.phi_minus);
  w.f64(s.phi_delta);
  w.uint(s.rho_d);
  w.f64(s.rho_s);
  w.f64(s.rho_c);
  w.f64(s.kappa_a);
  w.f64(s.kappa_b);
  w.f64(s.beta_0);
  w.uint(s.tau);
  w.u8(static_cast<std::uint8_t>(s.inhibition_mode));
  w.f64(s.trim_threshold);
  w.uint(s.seed);
  w.u8(s.boost_enabled ? 1 : 0);
  w.u8(s.distance_taper ? 1 : 0);
}

inline SpParams read_params(LeReader& r) {
  SpParams s;
  s.n = r.uint<std::uint64_t>();
  s.p = r.uint<std::uint32_t>();
  s.m = r.uint<std::uint32_t>();
  s.q = r.uint<std::uint32_t>();
  s.phi_plus = r.f64();
  s.phi_minus = r.f64();
  s.phi_delta = r.f64();
  s.rho_d = r.uint<std::uint32_t>();
  s.rho_s = r.f64();
  s.rho_c = r.f64();
  s.kappa_a = r.f64();
  s.kappa_b = r.f64();
  s.beta_0 = r.f64();
  s.tau = r.uint<std::uint32_t>();
  auto mode = r.u8();
  if (mode > 1) throw FormatError("model file: unknown inhibition mode");
  s.inhibition_mode = static_cast<InhibitionMode>(mode);
  s.trim_threshold = r.f64();
  s.seed = r.uint<std::uint64_t>();
  s.boost_enabled = r.u8() != 0;
  s.distance_taper = r.u8() != 0;
  return s;
}

}  // namespace detail

inline void save(const SpState& s, std::ostream& out) {
  detail::LeWriter w(out);
  out.write(kModelMagic, sizeof(kModelMagic) - 1);
  w.uint(kModelVersion);
  detail::write_params(w, s.params.raw());
  for (auto v : s.lambda) w.uint(v);
  for (auto v : s.phi) w.f64(v);
  for (const auto* vec : {&s.boosts, &s.adc, &s.odc, &s.mdc})
    for (auto v : *vec) w.f64(v);
  w.uint(s.inhibition_radius);
  w.uint(s.iteration);
  if (!out) throw Error("failed writing model");
}

inline SpState load(std::istream& in) {
  detail::LeReader r(in);
  char magic[sizeof(kModelMagic) - 1];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) throw FormatError("model file: bad magic");
  auto version = r.uint<std::uint32_t>();
  if (version != kModelVersion)
    throw FormatError("model file: unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(kModelVersion) + ")");

  SpParams raw = detail::read_params(r);
  ValidatedParams params = [&] {
    try {
      return validate(raw);
    } catch (const ParamError& e) {
      throw FormatError(std::string("model file: ") + e.what());
    }
  }();

  SpState s(params);
  const std::size_t mq = static_cast<std::size_t>(raw.m) * raw.q;
  s.lambda.resize(mq);
  for (auto& v : s.lambda) v = r.uint<std::uint32_t>();
  s.phi.resize(mq);
  for (auto& v : s.phi) v = r.f64();
  for (auto* vec : {&s.boosts, &s.adc, &s.odc, &s.mdc}) {
    vec->resize(raw.m);
    for (auto& v : *vec) v = r.f64();
  }
  s.inhibition_radius = r.uint<std::uint32_t>();
  s.iteration = r.uint<std::uint64_t>();
  check_state(s);
  refresh_neighborhoods(s);
  return s;
}

}  // namespace spforge
