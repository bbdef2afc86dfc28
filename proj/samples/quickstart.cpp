// Train a small pooler on random patterns, then look at what it learned.

#include <iostream>
#include <random>

#include "spforge/spforge.hpp"

int main() {
  using namespace spforge;

  SpParams p;
  p.p = 64;
  p.m = 128;
  p.q = 32;
  p.rho_d = 2;
  p.rho_c = 5;  // five winners per step; 0.04 would mean 4% of the neighbourhood
  p.boost_enabled = false;
  p.seed = 1;
  auto state = initialize(validate(p));

  std::mt19937_64 rng(7);
  auto patterns = random_sdr_batch(10, p.p, 0.7, rng);
  train(state, patterns, 20);

  for (std::size_t n = 0; n < patterns.size(); ++n) {
    auto active = step(std::as_const(state), patterns[n]).active;
    auto back = reconstruct(state, active);
    std::cout << "pattern " << n << ": " << count_active(active) << " columns, reconstruction jaccard "
              << jaccard(back, patterns[n]) << '\n';
  }

  auto mask = attribute_mask(attribute_probabilities(state), p.rho_s);
  std::cout << count_active(mask) << " of " << p.p << " inputs kept by the attribute mask\n";

  auto xb = estimate_x_bar(state, patterns);
  auto inc = derived_increments(0.01, xb);
  std::cout << "x_bar " << xb.value() << " -> phi_plus " << inc.phi_plus << ", phi_minus " << inc.phi_minus << '\n';
}
