#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace landscape_lab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ClassId = int;

// Labeled memory points in R^d. Points are stored column-wise (d x N).
class MemorySet {
 public:
  // Throws InputError when empty, ragged, label count mismatched, or when two
  // points are identical.
  MemorySet(const std::vector<Vector>& points, std::vector<ClassId> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  int dim() const noexcept { return static_cast<int>(points_.rows()); }

  const Matrix& points() const noexcept { return points_; }
  Vector point(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }
  ClassId label(std::size_t i) const { return labels_[i]; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }

  // Sorted distinct labels, and the number of points carrying each.
  const std::vector<ClassId>& classes() const noexcept { return classes_; }
  std::vector<std::size_t> class_counts() const;
  std::size_t class_index(ClassId c) const;

  Vector centroid() const;
  // Largest distance from the centroid to a point.
  double radius() const;
  // Largest pairwise distance.
  double diameter() const;

  // Index of the nearest point; ties go to the lower index.
  std::size_t nearest(const Vector& x) const;
  // Distances from x to every point, in index order.
  Vector distances(const Vector& x) const;

 private:
  Matrix points_;
  std::vector<ClassId> labels_;
  std::vector<ClassId> classes_;
};

// Anything the flow and the smoothness estimators can descend on.
class Energy {
 public:
  virtual ~Energy() = default;

  virtual int dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;

  virtual double value_and_gradient(const Vector& x, Vector& grad) const {
    grad = gradient(x);
    return value(x);
  }
};

// Soft-min of squared distances to the memories:
//
//   E(x) = -(1/beta) ln sum_i m_i exp(-beta |x - x_i|^2 / 2)
//
// with multiplicities m_i (all 1 unless a resampled set is being modelled).
// The softmax weights w_i(x) of the exponent are the soft k-NN weights with
// temperature 2/beta, and grad E(x) = x - sum_i w_i(x) x_i.
class EnergyLandscape final : public Energy {
 public:
  EnergyLandscape(MemorySet memories, double beta);
  // Multiplicities must be non-negative with at least one positive entry;
  // zero-multiplicity memories do not contribute.
  EnergyLandscape(MemorySet memories, double beta, std::vector<double> multiplicity);

  const MemorySet& memories() const noexcept { return memories_; }
  double beta() const noexcept { return beta_; }
  double temperature() const noexcept { return 2.0 / beta_; }
  const std::vector<double>& multiplicity() const noexcept { return multiplicity_; }
  bool present(std::size_t i) const { return multiplicity_[i] > 0.0; }

  EnergyLandscape with_beta(double beta) const;

  int dim() const override { return memories_.dim(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  double value_and_gradient(const Vector& x, Vector& grad) const override;

  // Softmax weights w_i(x); non-negative, summing to one.
  Vector weights(const Vector& x) const;
  // sum_i w_i(x) x_i
  Vector weighted_mean(const Vector& x) const;

  // Nearest memory with positive multiplicity; ties go to the lower index.
  std::size_t nearest_present(const Vector& x) const;

 private:
  // Fills the normalized weights and returns max exponent + ln(sum).
  double log_partition(const Vector& x, Vector& w) const;
  void check_dim(const Vector& x) const;

  MemorySet memories_;
  double beta_;
  std::vector<double> multiplicity_;
  Vector log_multiplicity_;
};

// Central-difference Hessian built from gradient differences, before and after
// symmetrization (H + H^T) / 2.
Matrix hessian_fd_raw(const Energy& energy, const Vector& x, double h = 1e-4);
Matrix hessian_fd(const Energy& energy, const Vector& x, double h = 1e-4);

// Largest |eigenvalue| of a symmetric matrix.
double spectral_norm_symmetric(const Matrix& m);
// Largest singular value of a general matrix.
double operator_norm(const Matrix& m);

struct BlobSpec {
  // Class c receives class_counts[c] points and label c.
  std::vector<std::size_t> class_counts;
  // Per-axis standard deviation of each blob.
  double spread = 0.5;
  // Distance between consecutive class centres along axis 0.
  double separation = 2.0;
  // Rejection threshold on the distance between any two generated points.
  double min_spacing = 0.0;
  // Two classes only: class 1 is the reflection of class 0 through the
  // hyperplane midway between the centres.
  bool mirror = false;
};

// Gaussian class blobs, deterministic in seed.
MemorySet generate_blobs(int dim, const BlobSpec& spec, std::uint64_t seed);

// CSV with header x_0..x_{d-1},label; '.' decimal separator.
MemorySet read_memory_csv(const std::filesystem::path& path);
void write_memory_csv(const std::filesystem::path& path, const MemorySet& memories);

}  // namespace landscape_lab
