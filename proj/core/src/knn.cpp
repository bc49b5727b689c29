#include "landscape_lab/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "landscape_lab/errors.hpp"

namespace landscape_lab {

std::size_t Prediction::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < distribution.size(); ++i) {
    if (distribution[i] > distribution[best]) best = i;
  }
  return best;
}

double SoftWeights::effective_count() const {
  double entropy = 0.0;
  for (double w : weights) {
    if (w > 0.0) entropy -= w * std::log(w);
  }
  return std::exp(entropy);
}

std::vector<std::size_t> nearest_k(const MemorySet& memories, const Vector& query, std::size_t k) {
  if (k < 1 || k > memories.size()) {
    throw InputError("k = " + std::to_string(k) + " outside [1, " +
                     std::to_string(memories.size()) + "]");
  }
  const Vector d2 = (memories.points().colwise() - query).colwise().squaredNorm().transpose();
  std::vector<std::size_t> order(memories.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) {
    const double da = d2[static_cast<Eigen::Index>(a)];
    const double db = d2[static_cast<Eigen::Index>(b)];
    return da < db || (da == db && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
  order.resize(k);
  return order;
}

namespace {

Prediction weighted_prediction(const MemorySet& memories, const std::vector<double>& weights) {
  Prediction p;
  p.distribution.assign(memories.classes().size(), 0.0);
  for (std::size_t i = 0; i < memories.size(); ++i) {
    if (weights[i] == 0.0) continue;
    p.distribution[memories.class_index(memories.label(i))] += weights[i];
    p.mean_label += weights[i] * static_cast<double>(memories.label(i));
  }
  return p;
}

}  // namespace

Prediction knn_predict(const MemorySet& memories, const Vector& query, std::size_t k) {
  if (query.size() != memories.dim()) throw InputError("query dimension does not match memories");
  // counts and label sums, divided once at the end
  Prediction p;
  p.distribution.assign(memories.classes().size(), 0.0);
  for (std::size_t i : nearest_k(memories, query, k)) {
    p.distribution[memories.class_index(memories.label(i))] += 1.0;
    p.mean_label += static_cast<double>(memories.label(i));
  }
  const double kk = static_cast<double>(k);
  for (double& v : p.distribution) v /= kk;
  p.mean_label /= kk;
  return p;
}

SoftPrediction soft_knn_predict(const MemorySet& memories, const Vector& query, double tau) {
  if (!(tau > 0.0)) throw InputError("tau must be positive");
  if (query.size() != memories.dim()) throw InputError("query dimension does not match memories");
  const Vector d2 = (memories.points().colwise() - query).colwise().squaredNorm().transpose();
  Vector logits = -d2 / tau;
  logits = (logits.array() - logits.maxCoeff()).exp();
  logits /= logits.sum();

  SoftPrediction out;
  out.weights.tau = tau;
  out.weights.weights.assign(logits.data(), logits.data() + logits.size());
  out.prediction = weighted_prediction(memories, out.weights.weights);
  return out;
}

SoftWeights attendance_profile(const EnergyLandscape& landscape, const Vector& query,
                               const FlowConfig& config) {
  const FlowResult r = flow(landscape, query, config);
  const Vector w = landscape.weights(r.terminal);
  SoftWeights out;
  out.tau = landscape.temperature();
  out.weights.assign(w.data(), w.data() + w.size());
  return out;
}

}  // namespace landscape_lab
