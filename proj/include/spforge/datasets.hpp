#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spforge/encoders.hpp"
#include "spforge/error.hpp"
#include "spforge/params.hpp"
#include "spforge/sdr.hpp"

namespace spforge {

/// Categorical records with per-attribute vocabularies in first-appearance order.
struct CategoricalDataset {
  std::vector<std::vector<std::uint32_t>> records;
  std::vector<std::uint32_t> labels;
  std::vector<std::vector<std::string>> vocab;  ///< vocab[a][j] is category j of attribute a
  std::vector<std::string> classes;

  std::size_t size() const noexcept { return records.size(); }
  std::size_t attributes() const noexcept { return vocab.size(); }
};

namespace detail {

inline std::uint32_t intern(std::vector<std::string>& vocab, const std::string& token) {
  for (std::size_t j = 0; j < vocab.size(); ++j)
    if (vocab[j] == token) return static_cast<std::uint32_t>(j);
  vocab.push_back(token);
  return static_cast<std::uint32_t>(vocab.size() - 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/**
 * Comma-separated categorical rows. With `has_label`, the last token is the class.
 * `expected_tokens` = 0 takes the token count of the first row.
 */
inline CategoricalDataset load_categorical_csv(std::istream& in, bool has_label = true,
                                               std::size_t expected_tokens = 0) {
  CategoricalDataset d;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    auto tok = detail::split_csv_line(line);
    if (expected_tokens == 0) {
      expected_tokens = tok.size();
      if (expected_tokens < (has_label ? 2u : 1u)) throw FormatError("line 1: too few fields");
    }
    if (tok.size() != expected_tokens)
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(expected_tokens) +
                        " fields, got " + std::to_string(tok.size()));
    for (const auto& t : tok)
      if (t.empty()) throw FormatError("line " + std::to_string(line_no) + ": empty field");
    const std::size_t n_attr = has_label ? tok.size() - 1 : tok.size();
    if (d.vocab.empty()) d.vocab.resize(n_attr);
    std::vector<std::uint32_t> rec(n_attr);
    for (std::size_t a = 0; a < n_attr; ++a) rec[a] = detail::intern(d.vocab[a], tok[a]);
    d.records.push_back(std::move(rec));
    if (has_label) d.labels.push_back(detail::intern(d.classes, tok.back()));
  }
  return d;
}

/// The car evaluation file: six attributes and a class per line.
inline CategoricalDataset load_car_eval(std::istream& in) { return load_categorical_csv(in, true, 7); }

/// One categorical encoder of `bits_per_attribute` bits per attribute, vocabularies as block order.
inline MultivariateEncoderSpec encoder_for(const CategoricalDataset& d, std::uint32_t bits_per_attribute) {
  MultivariateEncoderSpec spec;
  for (const auto& v : d.vocab) spec.parts.push_back({bits_per_attribute, v});
  return spec;
}

inline SdrBatch encode_dataset(const MultivariateEncoderSpec& spec, const CategoricalDataset& d) {
  SdrBatch b;
  b.width = spec.width();
  for (const auto& r : d.records) b.rows.push_back(encode_record(spec, r));
  return b;
}

// ---------------------------------------------------------------------------
// IDX files (big-endian header: 0x00000803 images, 0x00000801 labels)
// ---------------------------------------------------------------------------

namespace detail {
inline std::uint32_t read_be32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError(std::string("idx: truncated ") + what);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}
}  // namespace detail

inline std::vector<ByteImage> load_idx_images(std::istream& in) {
  const auto magic = detail::read_be32(in, "header");
  if (magic != 0x00000803u) {
    std::ostringstream os;
    os << "idx images: bad magic 0x" << std::hex << magic;
    throw FormatError(os.str());
  }
  const auto n = detail::read_be32(in, "header");
  const auto rows = detail::read_be32(in, "header");
  const auto cols = detail::read_be32(in, "header");
  if (rows == 0 || cols == 0) throw FormatError("idx images: zero image dimension");
  std::vector<ByteImage> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    ByteImage img{rows, cols, std::vector<std::uint8_t>(std::size_t{rows} * cols)};
    if (!in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size())))
      throw FormatError("idx images: truncated payload at image " + std::to_string(i));
    out.push_back(std::move(img));
  }
  return out;
}

inline std::vector<std::uint8_t> load_idx_labels(std::istream& in) {
  const auto magic = detail::read_be32(in, "header");
  if (magic != 0x00000801u) {
    std::ostringstream os;
    os << "idx labels: bad magic 0x" << std::hex << magic;
    throw FormatError(os.str());
  }
  const auto n = detail::read_be32(in, "header");
  std::vector<std::uint8_t> out(n);
  if (n > 0 && !in.read(reinterpret_cast<char*>(out.data()), n)) throw FormatError("idx labels: truncated payload");
  return out;
}

// ---------------------------------------------------------------------------
// Bundled synthetic digits for offline runs
// ---------------------------------------------------------------------------

struct LabeledImages {
  std::vector<ByteImage> images;
  std::vector<std::uint32_t> labels;
};

namespace detail {
// clang-format off
inline constexpr std::array<std::array<const char*, 8>, 10> kDigitGlyphs{{
    {"..####..", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", "..####..", "........"},
    {"...##...", "..###...", "...##...", "...##...", "...##...", "...##...", "..####..", "........"},
    {"..####..", ".##..##.", ".....##.", "....##..", "...##...", "..##....", ".######.", "........"},
    {"..####..", ".##..##.", ".....##.", "...###..", ".....##.", ".##..##.", "..####..", "........"},
    {"....##..", "...###..", "..####..", ".##.##..", ".######.", "....##..", "....##..", "........"},
    {".######.", ".##.....", ".#####..", ".....##.", ".....##.", ".##..##.", "..####..", "........"},
    {"..####..", ".##.....", ".#####..", ".##..##.", ".##..##.", ".##..##.", "..####..", "........"},
    {".######.", ".....##.", "....##..", "...##...", "..##....", "..##....", "..##....", "........"},
    {"..####..", ".##..##.", ".##..##.", "..####..", ".##..##.", ".##..##.", "..####..", "........"},
    {"..####..", ".##..##.", ".##..##.", "..#####.", ".....##.", "....##..", "..###...", "........"},
}};
// clang-format on
}  // namespace detail

/// Side of the square canvas the 8x8 glyphs are drawn on.
inline constexpr std::uint32_t kDigitCanvas = 12;

/**
 * `per_class` noisy renderings of each 8x8 digit glyph, centred on a
 * kDigitCanvas x kDigitCanvas canvas: a random shift of at most one pixel,
 * gray-level jitter, and `flip_prob` salt-and-pepper pixels.
 * Samples are interleaved by class.
 */
inline LabeledImages synthetic_digits(std::size_t per_class, std::uint64_t seed, double flip_prob = 0.03) {
  constexpr int side = static_cast<int>(kDigitCanvas);
  constexpr int margin = (side - 8) / 2;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> shift(-1, 1);
  std::uniform_int_distribution<int> on_level(170, 255), off_level(0, 90);
  std::bernoulli_distribution flip(flip_prob);
  LabeledImages out;
  for (std::size_t n = 0; n < per_class; ++n)
    for (std::uint32_t digit = 0; digit < 10; ++digit) {
      const int dr = margin + shift(rng), dc = margin + shift(rng);
      ByteImage img{kDigitCanvas, kDigitCanvas, std::vector<std::uint8_t>(kDigitCanvas * kDigitCanvas)};
      for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
          const int sr = r - dr, sc = c - dc;
          bool on = sr >= 0 && sr < 8 && sc >= 0 && sc < 8 && detail::kDigitGlyphs[digit][sr][sc] == '#';
          if (flip(rng)) on = !on;
          img.pixels[r * side + c] = static_cast<std::uint8_t>(on ? on_level(rng) : off_level(rng));
        }
      out.images.push_back(std::move(img));
      out.labels.push_back(digit);
    }
  return out;
}

inline SdrBatch binarize_all(const std::vector<ByteImage>& images) {
  SdrBatch b;
  for (const auto& img : images) b.push_back(binarize_image(img));
  return b;
}

}  // namespace spforge
