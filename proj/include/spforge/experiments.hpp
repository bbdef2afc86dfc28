#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "spforge/classifier.hpp"
#include "spforge/datasets.hpp"
#include "spforge/encoders.hpp"
#include "spforge/engine.hpp"
#include "spforge/error.hpp"
#include "spforge/features.hpp"
#include "spforge/params.hpp"
#include "spforge/sdr.hpp"

namespace spforge {

/// Independent 64-bit stream seed for (seed, a, b).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t{out[0]} << 32) | out[1];
}

/// Linear-interpolation quantile of unsorted values (the usual "type 7" definition).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw Error("quantile of an empty set");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

// ---------------------------------------------------------------------------
// Boost-frequency sweep
// ---------------------------------------------------------------------------

struct SweepConfig {
  SpParams sp;                  ///< p, m, q ... ; seed is the base seed
  std::size_t patterns = 100;   ///< random patterns per trial
  std::size_t trials = 10;
  std::size_t epochs = 10;
};

/// Random-input sweep parameters for m columns: p = 100, q = 40, rho_d = 15, rho_c = floor(0.02 m).
inline SweepConfig sweep_preset(std::uint32_t m) {
  SweepConfig c;
  auto& s = c.sp;
  s.p = 100;
  s.m = m;
  s.q = 40;
  s.rho_d = 15;
  s.rho_s = 0.5;
  s.phi_delta = 0.05;
  s.rho_c = std::max(1.0, std::floor(0.02 * m));
  s.phi_plus = 0.03;
  s.phi_minus = 0.05;
  s.beta_0 = 10;
  s.tau = 100;
  s.trim_threshold = 1e-4;
  s.n = c.patterns;
  return c;
}

/// "desk" (m = 256, 5 trials) or "paper" (m = 2048, 10 trials).
inline SweepConfig sweep_preset(const std::string& name) {
  if (name == "desk") {
    auto c = sweep_preset(256);
    c.trials = 5;
    return c;
  }
  if (name == "paper") return sweep_preset(2048);
  throw ParamError("preset", "unknown preset '" + name + "' (expected desk or paper)");
}

/// Percentages of boosted columns, one entry per epoch.
struct TrialSeries {
  std::vector<double> overlap_boost;
  std::vector<double> permanence_boost;
  std::uint64_t active_columns = 0;  ///< total activations over the whole trial
};

struct Quartiles {
  double q1 = 0, median = 0, q3 = 0;
};

struct SweepResult {
  double sparsity = 0;
  std::vector<TrialSeries> trials;
  std::vector<Quartiles> overlap_boost;     ///< per epoch, across trials
  std::vector<Quartiles> permanence_boost;  ///< per epoch, across trials
};

inline Quartiles quartiles(const std::vector<double>& v) {
  return {quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)};
}

/// Mean over epochs of a trial's series.
inline double epoch_average(const std::vector<double>& series) {
  if (series.empty()) return 0.0;
  double s = 0;
  for (double x : series) s += x;
  return s / static_cast<double>(series.size());
}

/// One trial: fresh SP and pattern set seeded from (seed, trial).
inline TrialSeries run_boost_trial(const SweepConfig& cfg, double sparsity, std::size_t trial) {
  SpParams sp = cfg.sp;
  sp.seed = derive_seed(cfg.sp.seed, trial, 0);
  auto params = validate(sp);
  std::mt19937_64 data_rng(derive_seed(cfg.sp.seed, trial, 1));
  auto batch = random_sdr_batch(cfg.patterns, sp.p, sparsity, data_rng);
  auto state = initialize(params);

  TrialSeries t;
  t.overlap_boost.assign(cfg.epochs, 0.0);
  t.permanence_boost.assign(cfg.epochs, 0.0);
  const double scale = 100.0 / (static_cast<double>(sp.m) * static_cast<double>(std::max<std::size_t>(1, batch.size())));
  train(state, batch, cfg.epochs, [&](std::size_t e, std::size_t, const ComputeTrace& tr) {
    t.overlap_boost[e] += tr.boosted_overlap_count * scale;
    t.permanence_boost[e] += tr.boosted_permanence_count * scale;
    t.active_columns += count_active(tr.active);
  });
  return t;
}

inline std::vector<SweepResult> run_boost_sweep(const SweepConfig& cfg, const std::vector<double>& sparsities) {
  validate(cfg.sp);
  if (cfg.trials == 0) throw ParamError("trials", "need at least one trial");
  std::vector<SweepResult> out;
  for (double sparsity : sparsities) {
    SweepResult r;
    r.sparsity = sparsity;
    for (std::size_t t = 0; t < cfg.trials; ++t) r.trials.push_back(run_boost_trial(cfg, sparsity, t));
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
      std::vector<double> ob, pb;
      for (const auto& t : r.trials) {
        ob.push_back(t.overlap_boost[e]);
        pb.push_back(t.permanence_boost[e]);
      }
      r.overlap_boost.push_back(quartiles(ob));
      r.permanence_boost.push_back(quartiles(pb));
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// "lo:hi:step", inclusive of hi up to rounding; or a comma list.
inline std::vector<double> parse_range(const std::string& text) {
  std::vector<double> out;
  auto parse = [&](const std::string& s) {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError("bad number '" + s + "'");
    return v;
  };
  try {
    auto c1 = text.find(':');
    if (c1 == std::string::npos) {
      std::size_t start = 0;
      while (start <= text.size()) {
        auto comma = text.find(',', start);
        out.push_back(parse(text.substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return out;
    }
    auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw FormatError("range needs lo:hi:step");
    const double lo = parse(text.substr(0, c1)), hi = parse(text.substr(c1 + 1, c2 - c1 - 1)),
                 step = parse(text.substr(c2 + 1));
    if (!(step > 0) || hi < lo) throw FormatError("range needs lo <= hi and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
  } catch (const std::invalid_argument&) {
    throw FormatError("bad range '" + text + "'");
  } catch (const std::out_of_range&) {
    throw FormatError("bad range '" + text + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification harness
// ---------------------------------------------------------------------------

enum class FeatureMode { column, probabilistic, reduction };

inline const char* to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::column: return "column";
    case FeatureMode::probabilistic: return "probabilistic";
    case FeatureMode::reduction: return "reduction";
  }
  return "?";
}

inline FeatureMode parse_feature_mode(const std::string& s) {
  if (s == "column") return FeatureMode::column;
  if (s == "probabilistic") return FeatureMode::probabilistic;
  if (s == "reduction") return FeatureMode::reduction;
  throw ParamError("mode", "unknown feature mode '" + s + "'");
}

struct Split {
  std::vector<std::size_t> train, test;
};

/**
 * Stratified shuffle splits: each split independently draws
 * round(test_fraction * n_c) test samples from every class c (at least one,
 * and at least one left for training when the class has two or more).
 */
inline std::vector<Split> stratified_shuffle_split(const std::vector<std::uint32_t>& labels, std::size_t splits,
                                                   double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ParamError("test_fraction", "must lie in (0, 1)");
  if (labels.empty()) throw Error("stratified split of an empty dataset");
  const std::uint32_t classes = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<Split> out;
  for (std::size_t s = 0; s < splits; ++s) {
    std::mt19937_64 rng(derive_seed(seed, s, 2));
    Split sp;
    for (auto members : by_class) {
      if (members.empty()) continue;
      std::shuffle(members.begin(), members.end(), rng);
      auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
      n_test = std::clamp<std::size_t>(n_test, 1, members.size() > 1 ? members.size() - 1 : 1);
      sp.test.insert(sp.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
      sp.train.insert(sp.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    }
    std::sort(sp.train.begin(), sp.train.end());
    std::sort(sp.test.begin(), sp.test.end());
    out.push_back(std::move(sp));
  }
  return out;
}

/// Throws if any index is in both halves of the split.
inline void check_disjoint(const Split& s) {
  std::vector<std::size_t> both;
  std::set_intersection(s.train.begin(), s.train.end(), s.test.begin(), s.test.end(), std::back_inserter(both));
  if (!both.empty()) throw Error("train/test split overlaps at index " + std::to_string(both.front()));
  if (s.train.empty() || s.test.empty()) throw Error("empty train or test split");
}

struct LabeledBatch {
  SdrBatch patterns;
  std::vector<std::uint32_t> labels;
};

struct ClassificationConfig {
  SpParams sp;  ///< p must match the pattern width; seed is the base seed
  std::size_t sp_epochs = 1;
  std::size_t splits = 5;
  double test_fraction = 0.2;
  PerceptronOptions classifier;
};

struct SplitResult {
  std::size_t split = 0;
  double error = 0;           ///< SP features
  double baseline_error = 0;  ///< raw patterns through the same classifier
  std::size_t dims_in = 0;
  std::size_t dims_out = 0;
};

struct ClassificationReport {
  FeatureMode mode = FeatureMode::column;
  std::vector<SplitResult> splits;
  double median_error = 0;
  double median_baseline_error = 0;
};

inline SdrBatch subset(const SdrBatch& b, const std::vector<std::size_t>& idx) {
  SdrBatch out;
  out.width = b.width;
  for (auto i : idx) out.rows.push_back(b.rows[i]);
  return out;
}

inline std::vector<std::uint32_t> subset(const std::vector<std::uint32_t>& v, const std::vector<std::size_t>& idx) {
  std::vector<std::uint32_t> out;
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

/// Input bits weighted by the learned attribute probabilities.
inline FeatureMatrix probabilistic_features(const SdrBatch& batch, const AttributeProbabilities& probs) {
  FeatureMatrix f;
  f.reserve(batch.size());
  for (const auto& row : batch.rows) {
    std::vector<double> x(row.size());
    for (std::size_t r = 0; r < row.size(); ++r) x[r] = row[r] ? probs.phi_hat[r] : 0.0;
    f.push_back(std::move(x));
  }
  return f;
}

inline ClassificationReport run_classification(const ClassificationConfig& cfg, const LabeledBatch& data,
                                               FeatureMode mode) {
  if (data.patterns.size() != data.labels.size()) throw ShapeError("pattern and label counts differ");
  if (data.patterns.empty()) throw Error("empty dataset");
  std::vector<std::uint32_t> distinct(data.labels);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw Error("classification needs at least two classes");
  if (data.patterns.width != cfg.sp.p)
    throw ShapeError("pattern width " + std::to_string(data.patterns.width) + " does not match p = " +
                     std::to_string(cfg.sp.p));

  ClassificationReport rep;
  rep.mode = mode;
  auto splits = stratified_shuffle_split(data.labels, cfg.splits, cfg.test_fraction, cfg.sp.seed);
  std::vector<double> errs, base;
  for (std::size_t k = 0; k < splits.size(); ++k) {
    const auto& sp = splits[k];
    check_disjoint(sp);
    auto train_x = subset(data.patterns, sp.train);
    auto test_x = subset(data.patterns, sp.test);
    auto train_y = subset(data.labels, sp.train);
    auto test_y = subset(data.labels, sp.test);

    // Same initialization for every mode of a given split.
    SpParams p = cfg.sp;
    p.seed = derive_seed(cfg.sp.seed, k, 3);
    auto state = initialize(validate(p));
    train(state, train_x, cfg.sp_epochs);

    FeatureMatrix f_train, f_test;
    std::size_t dims_out = 0;
    switch (mode) {
      case FeatureMode::column:
        f_train = to_features(transform(state, train_x));
        f_test = to_features(transform(state, test_x));
        dims_out = state.m();
        break;
      case FeatureMode::probabilistic: {
        auto probs = attribute_probabilities(state);
        f_train = probabilistic_features(train_x, probs);
        f_test = probabilistic_features(test_x, probs);
        dims_out = state.p();
        break;
      }
      case FeatureMode::reduction: {
        auto z = attribute_mask(attribute_probabilities(state), state.params->rho_s);
        f_train = to_features(reduce(train_x, z));
        f_test = to_features(reduce(test_x, z));
        dims_out = count_active(z);
        break;
      }
    }

    SplitResult r;
    r.split = k;
    r.dims_in = data.patterns.width;
    r.dims_out = dims_out;
    auto opt = cfg.classifier;
    opt.seed = derive_seed(cfg.classifier.seed, k, 4);
    if (dims_out == 0) {
      // Nothing survived the mask: every prediction is class 0.
      r.error = error_rate(std::vector<std::uint32_t>(test_y.size(), 0), test_y);
    } else {
      r.error = error_rate(classify(train_linear_classifier(f_train, train_y, opt), f_test), test_y);
    }
    r.baseline_error =
        error_rate(classify(train_linear_classifier(to_features(train_x), train_y, opt), to_features(test_x)), test_y);
    errs.push_back(r.error);
    base.push_back(r.baseline_error);
    rep.splits.push_back(r);
  }
  rep.median_error = median(errs);
  rep.median_baseline_error = median(base);
  return rep;
}

/// SP settings for the car evaluation pipeline (4096 columns, ~20% activity, one epoch, no boosting).
inline ClassificationConfig car_preset() {
  ClassificationConfig c;
  auto& s = c.sp;
  s.p = 300;
  s.m = 4096;
  s.q = 25;
  s.rho_d = 0;
  s.rho_s = 0.5;
  s.phi_delta = 0.5;
  s.rho_c = 819;
  s.phi_plus = 0.001;
  s.phi_minus = 0.001;
  s.boost_enabled = false;
  s.inhibition_mode = InhibitionMode::global;
  c.sp_epochs = 1;
  c.splits = 8;
  c.test_fraction = 0.1;
  return c;
}

/// Desk settings for the bundled synthetic digits (12 x 12 canvas).
inline ClassificationConfig digits_desk_preset() {
  ClassificationConfig c;
  auto& s = c.sp;
  s.p = kDigitCanvas * kDigitCanvas;
  s.m = 256;
  s.q = 48;
  s.rho_d = 4;
  s.rho_s = 0.5;
  s.phi_delta = 0.05;
  s.rho_c = 0.2;
  s.phi_plus = 0.03;
  s.phi_minus = 0.02;
  s.boost_enabled = false;
  c.sp_epochs = 5;
  c.splits = 5;
  c.test_fraction = 0.2;
  return c;
}

/// Full-size MNIST settings (global inhibition); not validated at desk scale.
inline ClassificationConfig digits_paper_preset() {
  ClassificationConfig c;
  auto& s = c.sp;
  s.p = 784;
  s.m = 936;
  s.q = 353;
  s.rho_d = 14;
  s.phi_delta = 0.0105;
  s.rho_c = 182;
  s.phi_plus = 0.0355;
  s.phi_minus = 0.0024;
  s.beta_0 = 18;
  s.tau = 164;
  c.sp_epochs = 1;
  c.splits = 5;
  c.test_fraction = 0.2;
  return c;
}

}  // namespace spforge
