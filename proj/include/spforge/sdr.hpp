#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "spforge/error.hpp"

namespace spforge {

/// A binary row vector; every element is 0 or 1.
using SdrVector = std::vector<std::uint8_t>;

/// A set of equal-width patterns, one per row.
struct SdrBatch {
  std::size_t width = 0;
  std::vector<SdrVector> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }

  void push_back(SdrVector row) {
    if (rows.empty() && width == 0) width = row.size();
    detail::require_shape(row.size() == width, "SdrBatch: row width " + std::to_string(row.size()) +
                                                   " does not match batch width " + std::to_string(width));
    rows.push_back(std::move(row));
  }

  const SdrVector& operator[](std::size_t i) const { return rows[i]; }

  friend bool operator==(const SdrBatch&, const SdrBatch&) = default;
};

inline std::size_t count_active(std::span<const std::uint8_t> bits) {
  std::size_t n = 0;
  for (auto b : bits) n += (b != 0);
  return n;
}

/// |a ∩ b| / |a ∪ b|; two empty vectors are identical (1.0).
inline double jaccard(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  detail::require_shape(a.size() == b.size(), "jaccard: width mismatch");
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    both += (a[i] && b[i]);
    either += (a[i] || b[i]);
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

// ---------------------------------------------------------------------------
// 0/1 CSV: one pattern per line, comma separated. Blank lines are skipped.
// ---------------------------------------------------------------------------

inline SdrBatch read_sdr_csv(std::istream& in) {
  SdrBatch batch;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    SdrVector row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      auto b = cell.find_first_not_of(" \t");
      auto e = cell.find_last_not_of(" \t");
      if (b == std::string::npos || b != e || (cell[b] != '0' && cell[b] != '1'))
        throw FormatError("sdr csv line " + std::to_string(line_no) + ": expected 0 or 1, got '" + cell + "'");
      row.push_back(static_cast<std::uint8_t>(cell[b] - '0'));
    }
    if (!batch.empty() && row.size() != batch.width)
      throw FormatError("sdr csv line " + std::to_string(line_no) + ": width " + std::to_string(row.size()) +
                        " differs from " + std::to_string(batch.width));
    batch.push_back(std::move(row));
  }
  return batch;
}

inline void write_sdr_row(std::ostream& out, std::span<const std::uint8_t> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << (row[i] ? '1' : '0');
  }
  out << '\n';
}

inline void write_sdr_csv(std::ostream& out, const SdrBatch& batch) {
  for (const auto& row : batch.rows) write_sdr_row(out, row);
}

}  // namespace spforge
