#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "spforge/error.hpp"
#include "spforge/sdr.hpp"

namespace spforge {

using FeatureMatrix = std::vector<std::vector<double>>;

inline FeatureMatrix to_features(const SdrBatch& batch) {
  FeatureMatrix f;
  f.reserve(batch.size());
  for (const auto& row : batch.rows) f.emplace_back(row.begin(), row.end());
  return f;
}

/// One-vs-rest averaged perceptron. weights[c] holds d feature weights followed by a bias.
struct LinearModel {
  std::size_t dims = 0;
  std::uint32_t classes = 0;
  std::vector<std::vector<double>> weights;

  double score(std::uint32_t c, const std::vector<double>& x) const {
    const auto& w = weights[c];
    double s = w[dims];
    for (std::size_t j = 0; j < dims; ++j) s += w[j] * x[j];
    return s;
  }
};

struct PerceptronOptions {
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
};

inline LinearModel train_linear_classifier(const FeatureMatrix& features, const std::vector<std::uint32_t>& labels,
                                           const PerceptronOptions& opt = {}) {
  if (features.size() != labels.size()) throw ShapeError("classifier: feature and label counts differ");
  if (features.empty()) throw ShapeError("classifier: no training samples");
  const std::size_t d = features.front().size();
  for (const auto& row : features)
    if (row.size() != d) throw ShapeError("classifier: ragged feature matrix");
  const std::uint32_t classes = *std::max_element(labels.begin(), labels.end()) + 1;

  LinearModel model{d, classes, std::vector<std::vector<double>>(classes, std::vector<double>(d + 1, 0.0))};
  // Lazy averaging: avg = w - u / c, where u accumulates c * update.
  std::vector<std::vector<double>> u(classes, std::vector<double>(d + 1, 0.0));
  double c = 1.0;

  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(opt.seed);
  for (std::size_t e = 0; e < opt.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto n : order) {
      const auto& x = features[n];
      for (std::uint32_t k = 0; k < classes; ++k) {
        const double y = labels[n] == k ? 1.0 : -1.0;
        if (y * model.score(k, x) > 0.0) continue;
        auto& w = model.weights[k];
        auto& acc = u[k];
        for (std::size_t j = 0; j < d; ++j) {
          if (x[j] == 0.0) continue;
          w[j] += y * x[j];
          acc[j] += c * y * x[j];
        }
        w[d] += y;
        acc[d] += c * y;
      }
      c += 1.0;
    }
  }
  for (std::uint32_t k = 0; k < classes; ++k)
    for (std::size_t j = 0; j <= d; ++j) model.weights[k][j] -= u[k][j] / c;
  return model;
}

/// Highest-scoring class; ties go to the lowest index.
inline std::uint32_t classify(const LinearModel& model, const std::vector<double>& x) {
  if (x.size() != model.dims) throw ShapeError("classify: feature width does not match model");
  std::uint32_t best = 0;
  double best_score = model.score(0, x);
  for (std::uint32_t k = 1; k < model.classes; ++k) {
    const double s = model.score(k, x);
    if (s > best_score) {
      best = k;
      best_score = s;
    }
  }
  return best;
}

inline std::vector<std::uint32_t> classify(const LinearModel& model, const FeatureMatrix& features) {
  std::vector<std::uint32_t> out;
  out.reserve(features.size());
  for (const auto& x : features) out.push_back(classify(model, x));
  return out;
}

inline double error_rate(const std::vector<std::uint32_t>& predicted, const std::vector<std::uint32_t>& truth) {
  if (predicted.size() != truth.size()) throw ShapeError("error_rate: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

}  // namespace spforge
