#pragma once

#include <cstddef>
#include <vector>

#include "landscape_lab/dynamics.hpp"
#include "landscape_lab/landscape.hpp"

namespace landscape_lab {

// Labels enter predictions one-hot, so a prediction is a distribution over
// MemorySet::classes(). `mean_label` is the same average taken over the raw
// integer labels, for numeric use.
struct Prediction {
  std::vector<double> distribution;
  double mean_label = 0.0;

  // Class index with the largest mass; ties go to the lower index.
  std::size_t argmax() const;
};

struct SoftWeights {
  std::vector<double> weights;
  double tau = 0.0;

  // exp(entropy of the weights): 1 for a point mass, N for uniform weights.
  double effective_count() const;
};

struct SoftPrediction {
  Prediction prediction;
  SoftWeights weights;
};

// Indices of the k nearest memories, ordered by (distance, index).
std::vector<std::size_t> nearest_k(const MemorySet& memories, const Vector& query, std::size_t k);

// Unweighted average over the k nearest memories.
Prediction knn_predict(const MemorySet& memories, const Vector& query, std::size_t k);

// w_i proportional to exp(-|Q - x_i|^2 / tau).
SoftPrediction soft_knn_predict(const MemorySet& memories, const Vector& query, double tau);

// Softmax weights of the landscape at the flow terminal of `query`; tau is the
// landscape temperature 2 / beta.
SoftWeights attendance_profile(const EnergyLandscape& landscape, const Vector& query,
                               const FlowConfig& config);

}  // namespace landscape_lab
