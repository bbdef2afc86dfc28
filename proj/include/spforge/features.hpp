#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spforge/error.hpp"
#include "spforge/sdr.hpp"
#include "spforge/state.hpp"

namespace spforge {

enum class CombineMode { max };

/// Per-input learned probability: the largest permanence of any synapse sourcing the input, 0 if none does.
struct AttributeProbabilities {
  std::vector<double> phi_hat;
  CombineMode combine_mode = CombineMode::max;
};

inline AttributeProbabilities attribute_probabilities(const SpState& s) {
  AttributeProbabilities out{std::vector<double>(s.p(), 0.0)};
  for (std::size_t idx = 0; idx < s.lambda.size(); ++idx) {
    auto& slot = out.phi_hat[s.lambda[idx]];
    slot = std::max(slot, s.phi[idx]);
  }
  return out;
}

/// z_r = 1 iff phi_hat_r >= rho_s.
inline SdrVector attribute_mask(const AttributeProbabilities& probs, double rho_s) {
  SdrVector z(probs.phi_hat.size());
  for (std::size_t r = 0; r < z.size(); ++r) z[r] = probs.phi_hat[r] >= rho_s;
  return z;
}

/// Keeps the columns of each pattern where the mask is set, in order.
inline SdrBatch reduce(const SdrBatch& batch, std::span<const std::uint8_t> mask) {
  if (!batch.empty())
    detail::require_shape(batch.width == mask.size(), "reduce: batch width " + std::to_string(batch.width) +
                                                          " does not match mask width " + std::to_string(mask.size()));
  SdrBatch out;
  out.width = count_active(mask);
  out.rows.reserve(batch.size());
  for (const auto& row : batch.rows) {
    SdrVector kept;
    kept.reserve(out.width);
    for (std::size_t r = 0; r < row.size(); ++r)
      if (mask[r]) kept.push_back(row[r]);
    out.rows.push_back(std::move(kept));
  }
  return out;
}

/// Input bits supported by a connected synapse of some active column.
inline SdrVector reconstruct(const SpState& s, std::span<const std::uint8_t> active) {
  detail::require_shape(active.size() == s.m(), "reconstruct: active length does not match m");
  const double rho_s = s.params->rho_s;
  SdrVector u(s.p(), 0);
  for (std::size_t i = 0; i < s.m(); ++i) {
    if (!active[i]) continue;
    auto src = s.sources(i);
    auto phi = s.permanences(i);
    for (std::size_t k = 0; k < src.size(); ++k)
      if (phi[k] >= rho_s) u[src[k]] = 1;
  }
  return u;
}

}  // namespace spforge
