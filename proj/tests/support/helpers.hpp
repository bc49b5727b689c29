#pragma once

#include <vector>

#include "landscape_lab/landscape.hpp"
#include "oracles.hpp"

namespace testing {

namespace ll = landscape_lab;

inline ll::Vector vec(std::initializer_list<double> v) {
  ll::Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

inline ll::Vector vec(const oracle::Point& p) {
  return Eigen::Map<const ll::Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
}

inline oracle::Point point(const ll::Vector& v) { return {v.data(), v.data() + v.size()}; }

inline ll::MemorySet memories_1d(const std::vector<double>& xs, std::vector<ll::ClassId> labels = {}) {
  std::vector<ll::Vector> pts;
  for (double x : xs) pts.push_back(vec({x}));
  if (labels.empty()) labels.assign(xs.size(), 0);
  return ll::MemorySet(pts, labels);
}

inline std::vector<oracle::Point> points_of(const ll::MemorySet& m) {
  std::vector<oracle::Point> out;
  for (std::size_t i = 0; i < m.size(); ++i) out.push_back(point(m.point(i)));
  return out;
}

// Random memory set with n points in [-2, 2]^dim, two classes.
inline ll::MemorySet random_memories(int dim, std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<ll::Vector> pts;
  std::vector<ll::ClassId> labels;
  for (std::size_t i = 0; i < n; ++i) {
    ll::Vector x(dim);
    for (int k = 0; k < dim; ++k) x[k] = u(rng);
    pts.push_back(x);
    labels.push_back(static_cast<ll::ClassId>(i % 2));
  }
  return ll::MemorySet(pts, labels);
}

}  // namespace testing
