// Acceptance gate: one PASS/FAIL line per criterion, exit code 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spforge/spforge.hpp"

using namespace spforge;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string first_failure;
  void fail(const std::string& why) {
    if (pass) first_failure = why;
    pass = false;
  }
};

struct MeanSe {
  double sum = 0, sum2 = 0;
  std::size_t n = 0;
  void add(double x) {
    sum += x;
    sum2 += x * x;
    ++n;
  }
  double mean() const { return sum / n; }
  double se() const {
    const double m = mean();
    const double var = std::max(0.0, (sum2 - n * m * m) / (n - 1));
    return std::sqrt(var / n);
  }
};

bool within_3se(const MeanSe& mc, double closed) { return std::abs(mc.mean() - closed) <= 3 * mc.se() + 1e-9; }

// 1. Monte-Carlo statistics vs closed forms.
Outcome statistics_oracle() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  constexpr std::size_t kSamples = 100000;
  int checks = 0, worst_draw = -1;
  double worst_z = 0;
  for (int draw = 0; draw < 20; ++draw) {
    auto uni = [&](std::uint32_t lo, std::uint32_t hi) { return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng); };
    const std::uint32_t p = uni(2, 200);
    const std::uint32_t q = uni(1, std::min<std::uint32_t>(p, 12));
    const std::uint32_t m = uni(1, 12);
    // Thresholds below q/2 and moderate activity keep every event frequent enough to estimate.
    const std::uint32_t rho_d = uni(0, (q - 1) / 2);
    const double pi_x = std::uniform_real_distribution<double>(0.2, 0.8)(rng);

    SpParams sp;
    sp.p = p;
    sp.m = m;
    sp.q = q;
    sp.rho_d = rho_d;
    sp.rho_s = 0.5;
    sp.phi_delta = std::uniform_real_distribution<double>(0.01, 0.5)(rng);
    sp.rho_c = 1;
    auto params = validate(sp);

    // Eq. 1 product form vs the telescoped value.
    if (std::abs(prob_input_connect_product(p, q) - prob_input_connect(p, q)) > 1e-12)
      o.fail("product form differs at p=" + std::to_string(p) + " q=" + std::to_string(q));

    MeanSe lam, at, act;
    std::vector<std::uint8_t> seen(p), u(p);
    std::bernoulli_distribution bit(pi_x);
    for (std::size_t s = 0; s < kSamples; ++s) {
      auto lambda = sample_connections(p, q, m, rng);
      std::fill(seen.begin(), seen.end(), 0);
      for (auto r : lambda) seen[r] = 1;
      lam.add(static_cast<double>(p - count_active(seen)));

      for (auto& b : u) b = bit(rng);
      auto phi = draw_permanences(lambda, params, rng);
      std::uint32_t n_at = 0, n_act = 0;
      for (std::uint32_t i = 0; i < m; ++i) {
        std::uint32_t a = 0, ac = 0;
        for (std::uint32_t k = 0; k < q; ++k) {
          const bool on = u[lambda[i * q + k]];
          a += on;
          ac += on && phi[i * q + k] >= sp.rho_s;
        }
        n_at += a >= rho_d;
        n_act += ac >= rho_d;
      }
      at.add(n_at);
      act.add(n_act);
    }
    const auto vis = visibility_stats(p, q, m, ConnectModel::exact);
    const auto stats = activity_stats(params, pi_x);
    const std::pair<const MeanSe*, double> cmp[] = {{&lam, vis.expected_unobserved},
                                                    {&at, stats.expected_cols_at_threshold},
                                                    {&act, stats.expected_cols_active_connected_at_threshold}};
    const char* names[] = {"E[unobserved]", "E[at]", "E[act]"};
    for (int c = 0; c < 3; ++c) {
      ++checks;
      const auto& [mc, closed] = cmp[c];
      const double z = mc->se() > 0 ? std::abs(mc->mean() - closed) / mc->se() : 0.0;
      if (z > worst_z) {
        worst_z = z;
        worst_draw = draw;
      }
      if (!within_3se(*mc, closed)) {
        std::ostringstream w;
        w << names[c] << " draw " << draw << " (p=" << p << " q=" << q << " m=" << m << " rho_d=" << rho_d
          << "): mc " << mc->mean() << " +- " << mc->se() << " vs " << closed;
        o.fail(w.str());
      }
    }
  }
  o.detail << checks << " comparisons, worst |z| = " << std::setprecision(3) << worst_z << " (draw " << worst_draw
           << ")";
  return o;
}

// 2. Vectorized phases vs the per-column transliteration.
Outcome engine_equivalence() {
  Outcome o;
  std::size_t steps = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(seed);
    auto sp = oracle::random_small_params(rng, 12, 16, 6);
    auto state = initialize(validate(sp));
    oracle::ReferencePooler ref(state);
    std::bernoulli_distribution bit(std::uniform_real_distribution<double>(0.2, 0.8)(rng));
    for (int t = 0; t < 25; ++t) {
      std::vector<std::uint8_t> u(sp.p);
      for (auto& b : u) b = bit(rng);
      auto trace = step(state, u, true);
      ref.phase1(u);
      ref.phase2();
      ref.phase3(u);
      ++steps;
      if (trace.alpha != ref.overlaps()) o.fail("alpha differs at seed " + std::to_string(seed));
      if (trace.active != ref.active()) o.fail("active set differs at seed " + std::to_string(seed));
      if (state.phi != ref.permanences()) o.fail("permanences differ at seed " + std::to_string(seed));
      if (state.boosts != ref.boosts()) o.fail("boosts differ at seed " + std::to_string(seed));
      if (state.inhibition_radius != ref.radius) o.fail("radius differs at seed " + std::to_string(seed));
      if (!o.pass) return o;
    }
  }
  o.detail << "200 seeds, " << steps << " learning steps compared";
  return o;
}

// 3. Boost sweep shape at the desk preset.
Outcome boost_sweep_shape() {
  Outcome o;
  auto cfg = sweep_preset("desk");
  auto res = run_boost_sweep(cfg, {0.50, 0.74, 0.90});
  const auto &lo = res[0], &mid = res[1], &hi = res[2];
  int wins = 0;
  o.detail << "per-trial epoch-averaged permanence boost % (0.50/0.74/0.90):";
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const double a = epoch_average(lo.trials[t].permanence_boost), b = epoch_average(mid.trials[t].permanence_boost),
                 c = epoch_average(hi.trials[t].permanence_boost);
    wins += b > a && b > c;
    o.detail << ' ' << std::setprecision(3) << a << '/' << b << '/' << c;
  }
  const double first = mid.permanence_boost.front().median, last = mid.permanence_boost.back().median;
  o.detail << "; 0.74 wins " << wins << "/" << cfg.trials << "; 0.74 median epoch1 " << first << " epoch10 " << last;
  if (wins < 4) o.fail("0.74 beats both neighbours in only " + std::to_string(wins) + " trials");
  if (!(first >= last)) o.fail("0.74 series not front-loaded");
  return o;
}

// 4. Likelihood analysis.
Outcome mle_suite() {
  Outcome o;
  std::mt19937_64 rng(4);
  double worst_arg = 0, worst_rel = 0;
  for (int n = 0; n < 50; ++n) {
    const double xb = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
    const double t = std::uniform_int_distribution<int>(1, 5000)(rng);
    // Golden-section search on the log-likelihood.
    double a = 1e-9, b = 1 - 1e-9;
    const double g = (std::sqrt(5.0) - 1) / 2;
    double c = b - g * (b - a), d = a + g * (b - a);
    while (b - a > 1e-10) {
      if (log_likelihood(c, xb, t) > log_likelihood(d, xb, t))
        b = d;
      else
        a = c;
      c = b - g * (b - a);
      d = a + g * (b - a);
    }
    const double arg = (a + b) / 2;
    worst_arg = std::max(worst_arg, std::abs(arg - xb));
    if (std::abs(arg - xb) > 1e-6) o.fail("argmax off by " + std::to_string(arg - xb));
    if (theta_mle(xb) != xb) o.fail("closed-form MLE differs from x_bar");

    for (double theta = 0.001; theta <= 0.999; theta += 0.007) {
      const double h = 1e-6;
      const double fd = (log_likelihood(theta + h, xb, t) - log_likelihood(theta - h, xb, t)) / (2 * h);
      const double gr = gradient(theta, xb, t);
      if (std::abs(gr) < 1e-3 * t) continue;  // relative error is meaningless at the stationary point
      const double rel = std::abs(fd - gr) / std::abs(gr);
      worst_rel = std::max(worst_rel, rel);
      if (rel > 1e-4) o.fail("gradient vs finite difference rel " + std::to_string(rel));
    }
  }

  int exact = 0;
  for (int n = 0; n < 2000; ++n) {
    const std::uint64_t tt = std::uniform_int_distribution<std::uint64_t>(2, 100000)(rng);
    const std::uint64_t ones = std::uniform_int_distribution<std::uint64_t>(1, tt - 1)(rng);
    XBar xb{ones, tt};
    const double lim = std::min(xb.value(), 1 - xb.value());
    const double kappa = std::uniform_real_distribution<double>(1e-6, lim)(rng) * (1 - 1e-9);
    auto d = derived_increments(kappa, xb);
    const Rational x = xb.exact();
    if (d.exact_plus * x != Rational(kappa) || d.exact_minus * (1 - x) != Rational(kappa))
      o.fail("increment identity not exact");
    else
      ++exact;
  }

  for (int n = 0; n < 200; ++n) {
    SpParams sp;
    sp.p = 32;
    sp.m = 8;
    sp.q = 12;
    sp.rho_c = 8;
    sp.seed = n;
    sp.trim_threshold = 0;
    auto xb = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
    auto inc = derived_increments(0.01, xb);
    sp.phi_plus = inc.phi_plus;
    sp.phi_minus = inc.phi_minus;
    auto state = initialize(validate(sp));
    std::vector<std::uint8_t> u(sp.p);
    for (auto& b : u) b = std::bernoulli_distribution(xb)(rng);
    auto x = gather_inputs(state, u);
    for (std::uint32_t i = 0; i < sp.m; ++i) {
      auto delta = permanence_delta(x.row(i), sp.phi_plus, sp.phi_minus);
      for (std::uint32_t k = 0; k < sp.q; ++k)
        if (per_synapse_update(x.row(i)[k], inc.phi_plus, inc.phi_minus) != delta[k])
          o.fail("per-synapse update differs from the permanence delta row");
    }
    // The engine applies exactly clip(phi + delta) to active rows.
    auto before = state.phi;
    SdrVector all(sp.m, 1);
    adapt_permanences(state, x, all);
    for (std::uint32_t i = 0; i < sp.m; ++i) {
      auto delta = permanence_delta(x.row(i), sp.phi_plus, sp.phi_minus);
      for (std::uint32_t k = 0; k < sp.q; ++k)
        if (state.phi[i * sp.q + k] != std::clamp(before[i * sp.q + k] + delta[k], 0.0, 1.0))
          o.fail("engine update differs from clip(phi + delta)");
    }
  }
  o.detail << "max |argmax - x_bar| " << std::setprecision(3) << worst_arg << ", max gradient rel err " << worst_rel
           << ", " << exact << " exact increment identities";
  return o;
}

// 5. Car evaluation pipeline.
Outcome car_classification() {
  Outcome o;
  const char* env = std::getenv("SPFORGE_CAR_DATA");
  const std::string path = env ? env : std::string(SPFORGE_DATA_DIR) + "/car.data";
  std::ifstream in(path);
  if (!in) {
    o.fail("cannot open " + path);
    return o;
  }
  auto d = load_car_eval(in);
  if (d.size() != 1728) o.fail("expected 1728 records, got " + std::to_string(d.size()));
  auto enc = encoder_for(d, 50);
  LabeledBatch data{encode_dataset(enc, d), d.labels};
  auto cfg = car_preset();
  auto rep = run_classification(cfg, data, FeatureMode::column);
  o.detail << std::setprecision(4) << "median error SP+linear " << rep.median_error << ", raw+linear "
           << rep.median_baseline_error << " over " << rep.splits.size() << " splits";
  if (!(rep.median_error <= 0.5 * rep.median_baseline_error)) o.fail("SP error above half the raw error");
  if (!(rep.median_error <= 0.10)) o.fail("SP error above 0.10");
  return o;
}

// 6. Reconstruction of learned prototypes.
Outcome reconstruction_fidelity() {
  Outcome o;
  double total = 0;
  o.detail << "per-seed mean Jaccard:";
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SpParams sp;
    sp.p = 64;
    sp.m = 128;
    sp.q = 32;
    sp.rho_d = 2;
    sp.rho_c = 5;
    sp.boost_enabled = false;
    sp.seed = seed;
    auto state = initialize(validate(sp));
    std::mt19937_64 rng(1000 + seed);
    auto protos = random_sdr_batch(10, 64, 0.70, rng);
    train(state, protos, 20);
    double j = 0;
    for (const auto& u : protos.rows) j += jaccard(reconstruct(state, step(std::as_const(state), u).active), u);
    j /= protos.size();
    o.detail << ' ' << std::setprecision(3) << j;
    total += j;
  }
  total /= 5;
  o.detail << "; overall " << total;
  if (total < 0.85) o.fail("mean Jaccard below 0.85");
  return o;
}

// 7. Invariants.
Outcome invariant_battery() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::size_t steps = 0;
  for (int run = 0; run < 10; ++run) {
    auto sp = oracle::random_small_params(rng, 24, 40, 12);
    sp.boost_enabled = true;
    auto state = initialize(validate(sp));
    const double T0 = 0;
    (void)T0;
    std::vector<double> adc(sp.m, 0.0), odc(sp.m, 0.0);
    for (int t = 0; t < 100; ++t) {
      std::vector<std::uint8_t> u(sp.p);
      for (auto& b : u) b = std::bernoulli_distribution(0.4)(rng);

      // learn=false leaves the state untouched and is repeatable.
      std::ostringstream before;
      save(state, before);
      auto a1 = step(state, u, false), a2 = step(state, u, false);
      std::ostringstream after;
      save(state, after);
      if (before.str() != after.str() || a1.active != a2.active) o.fail("learn=false changed state");

      auto tr = step(state, u, true);
      ++steps;
      const double T = std::min<double>(t + 1, sp.tau);
      for (std::uint32_t i = 0; i < sp.m; ++i) {
        adc[i] = (adc[i] * (T - 1) + tr.active[i]) / T;
        odc[i] = (odc[i] * (T - 1) + (tr.alpha_hat[i] >= sp.rho_d)) / T;
      }
      if (adc != state.adc || odc != state.odc) o.fail("duty cycles differ from the recurrence");
      for (double g : tr.gamma)
        if (g < 1) o.fail("gamma below one");
      for (double v : state.phi)
        if (v < 0 || v > 1) o.fail("permanence out of bounds");
      for (std::uint32_t i = 0; i < sp.m; ++i)
        if (state.mdc[i] == 0 && state.boosts[i] != sp.beta_0) o.fail("zero minimum duty cycle without maximum boost");
    }
    std::stringstream io;
    save(state, io);
    if (!(load(io) == state)) o.fail("persistence round trip differs");
  }
  if (boost_value(0.9, 0.0, 10.0) != 10.0) o.fail("boost precedence");
  o.detail << steps << " learning steps over 10 random configurations";
  return o;
}

// 8. Dimensionality reduction on the synthetic digits.
Outcome reduction_sanity() {
  Outcome o;
  auto digits = synthetic_digits(100, 7);
  LabeledBatch data{binarize_all(digits.images), digits.labels};
  auto cfg = digits_desk_preset();
  auto rep = run_classification(cfg, data, FeatureMode::reduction);
  std::vector<double> dims;
  bool all_smaller = true;
  for (const auto& s : rep.splits) {
    dims.push_back(static_cast<double>(s.dims_out));
    all_smaller = all_smaller && s.dims_out < s.dims_in;
  }
  const double change = rep.median_error - rep.median_baseline_error;
  o.detail << std::setprecision(4) << "dims " << data.patterns.width << " -> median " << median(dims)
           << ", error reduction " << rep.median_error << " vs raw " << rep.median_baseline_error;
  if (!all_smaller) o.fail("reduction did not shrink the feature count in every split");
  if (std::abs(change) > 0.05) o.fail("error changed by more than 5 points");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 statistics oracle", statistics_oracle},
      {"2 engine equivalence", engine_equivalence},
      {"3 boost sweep shape", boost_sweep_shape},
      {"4 likelihood suite", mle_suite},
      {"5 car classification", car_classification},
      {"6 reconstruction fidelity", reconstruction_fidelity},
      {"7 invariant battery", invariant_battery},
      {"8 reduction sanity", reduction_sanity},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << "  (" << std::fixed << std::setprecision(1)
              << secs << "s)  " << std::defaultfloat << o.detail.str();
    if (!o.pass) std::cout << "; first failure: " << o.first_failure;
    std::cout << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
