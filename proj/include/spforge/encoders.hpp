#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "spforge/error.hpp"
#include "spforge/sdr.hpp"

namespace spforge {

/// Disjoint equal blocks of active bits, one per category, right padded with zeros.
struct CategoricalEncoderSpec {
  std::uint32_t total_bits = 50;
  std::vector<std::string> categories;  ///< block order; category j owns block j

  std::uint32_t num_categories() const { return static_cast<std::uint32_t>(categories.size()); }
  std::uint32_t active_bits() const { return categories.empty() ? 0 : total_bits / num_categories(); }

  /// Block index of a category name; throws FormatError when unknown.
  std::uint32_t index_of(const std::string& value) const {
    auto it = std::find(categories.begin(), categories.end(), value);
    if (it == categories.end()) throw FormatError("unknown category value '" + value + "'");
    return static_cast<std::uint32_t>(it - categories.begin());
  }

  friend bool operator==(const CategoricalEncoderSpec&, const CategoricalEncoderSpec&) = default;
};

/// Categories named "0".."n-1".
inline CategoricalEncoderSpec make_categorical(std::uint32_t total_bits, std::uint32_t num_categories) {
  CategoricalEncoderSpec s{total_bits, {}};
  for (std::uint32_t j = 0; j < num_categories; ++j) s.categories.push_back(std::to_string(j));
  return s;
}

namespace detail {
inline void check_encoder(const CategoricalEncoderSpec& spec) {
  if (spec.categories.empty()) throw ParamError("num_categories", "encoder needs at least one category");
  if (spec.num_categories() > spec.total_bits)
    throw ParamError("num_categories", "more categories (" + std::to_string(spec.num_categories()) + ") than bits (" +
                                           std::to_string(spec.total_bits) + ")");
}
}  // namespace detail

inline void encode_categorical_into(const CategoricalEncoderSpec& spec, std::uint32_t index, SdrVector& out) {
  detail::check_encoder(spec);
  if (index >= spec.num_categories())
    throw ParamError("category_index", "index " + std::to_string(index) + " out of range for " +
                                           std::to_string(spec.num_categories()) + " categories");
  const std::size_t base = out.size();
  out.resize(base + spec.total_bits, 0);
  const std::uint32_t w = spec.active_bits();
  std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(base + std::size_t{index} * w), w, 1);
}

inline SdrVector encode_categorical(const CategoricalEncoderSpec& spec, std::uint32_t index) {
  SdrVector out;
  encode_categorical_into(spec, index, out);
  return out;
}

struct MultivariateEncoderSpec {
  std::vector<CategoricalEncoderSpec> parts;

  std::size_t width() const {
    std::size_t w = 0;
    for (const auto& p : parts) w += p.total_bits;
    return w;
  }
  friend bool operator==(const MultivariateEncoderSpec&, const MultivariateEncoderSpec&) = default;
};

inline SdrVector encode_record(const MultivariateEncoderSpec& spec, const std::vector<std::uint32_t>& indices) {
  if (indices.size() != spec.parts.size())
    throw ShapeError("record has " + std::to_string(indices.size()) + " values but the encoder has " +
                     std::to_string(spec.parts.size()) + " parts");
  SdrVector out;
  out.reserve(spec.width());
  for (std::size_t j = 0; j < indices.size(); ++j) encode_categorical_into(spec.parts[j], indices[j], out);
  return out;
}

inline SdrVector encode_record(const MultivariateEncoderSpec& spec, const std::vector<std::string>& values) {
  if (values.size() != spec.parts.size())
    throw ShapeError("record has " + std::to_string(values.size()) + " values but the encoder has " +
                     std::to_string(spec.parts.size()) + " parts");
  std::vector<std::uint32_t> idx(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) idx[j] = spec.parts[j].index_of(values[j]);
  return encode_record(spec, idx);
}

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

struct ByteImage {
  std::uint32_t rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;  ///< row-major

  std::uint8_t at(std::uint32_t r, std::uint32_t c) const { return pixels[std::size_t{r} * cols + c]; }
  friend bool operator==(const ByteImage&, const ByteImage&) = default;
};

/// Pixels >= 128 become 1; rows are concatenated.
inline SdrVector binarize_image(const ByteImage& img) {
  if (img.rows == 0 || img.cols == 0) throw ShapeError("binarize_image: empty image");
  detail::require_shape(img.pixels.size() == std::size_t{img.rows} * img.cols, "binarize_image: pixel count mismatch");
  SdrVector out(img.pixels.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.pixels[i] >= 128;
  return out;
}

inline SdrVector binarize_image(const std::vector<std::vector<std::uint8_t>>& gray) {
  if (gray.empty() || gray.front().empty()) throw ShapeError("binarize_image: empty image");
  ByteImage img{static_cast<std::uint32_t>(gray.size()), static_cast<std::uint32_t>(gray.front().size()), {}};
  for (const auto& row : gray) {
    detail::require_shape(row.size() == img.cols, "binarize_image: ragged rows");
    img.pixels.insert(img.pixels.end(), row.begin(), row.end());
  }
  return binarize_image(img);
}

// ---------------------------------------------------------------------------
// Random patterns
// ---------------------------------------------------------------------------

/// Active bits per pattern for a given sparsity (fraction of zeros).
inline std::size_t active_bits_for(std::size_t width, double sparsity) {
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw ParamError("sparsity", "must lie in [0, 1]");
  return static_cast<std::size_t>(std::llround(static_cast<double>(width) * (1.0 - sparsity)));
}

template <class Rng>
SdrBatch random_sdr_batch(std::size_t count, std::size_t width, double sparsity, Rng& rng) {
  const std::size_t active = active_bits_for(width, sparsity);
  SdrBatch batch;
  batch.width = width;
  std::vector<std::uint32_t> pool(width);
  for (std::size_t n = 0; n < count; ++n) {
    std::iota(pool.begin(), pool.end(), 0u);
    SdrVector row(width, 0);
    for (std::size_t k = 0; k < active; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, width - 1);
      std::swap(pool[k], pool[pick(rng)]);
      row[pool[k]] = 1;
    }
    batch.rows.push_back(std::move(row));
  }
  return batch;
}

}  // namespace spforge
