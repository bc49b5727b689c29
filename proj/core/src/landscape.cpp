#include "landscape_lab/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "landscape_lab/errors.hpp"
#include "landscape_lab/random.hpp"

namespace landscape_lab {

MemorySet::MemorySet(const std::vector<Vector>& points, std::vector<ClassId> labels)
    : labels_(std::move(labels)) {
  if (points.empty()) throw InputError("memory set must not be empty");
  if (points.size() != labels_.size()) {
    throw InputError("memory set has " + std::to_string(points.size()) + " points but " +
                     std::to_string(labels_.size()) + " labels");
  }
  const Eigen::Index d = points.front().size();
  if (d <= 0) throw InputError("memory points must have positive dimension");
  points_.resize(d, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d) {
      throw InputError("memory point " + std::to_string(i) + " has dimension " +
                       std::to_string(points[i].size()) + ", expected " + std::to_string(d));
    }
    if (!points[i].allFinite()) {
      throw InputError("memory point " + std::to_string(i) + " is not finite");
    }
    points_.col(static_cast<Eigen::Index>(i)) = points[i];
  }

  // Duplicates would make class counts ambiguous.
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto lex_less = [&](std::size_t a, std::size_t b) {
    const auto ca = points_.col(static_cast<Eigen::Index>(a));
    const auto cb = points_.col(static_cast<Eigen::Index>(b));
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
  };
  std::sort(order.begin(), order.end(), lex_less);
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (points_.col(static_cast<Eigen::Index>(order[k])) ==
        points_.col(static_cast<Eigen::Index>(order[k - 1]))) {
      throw InputError("duplicate memory points at indices " +
                       std::to_string(std::min(order[k], order[k - 1])) + " and " +
                       std::to_string(std::max(order[k], order[k - 1])));
    }
  }

  classes_ = labels_;
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
}

std::vector<std::size_t> MemorySet::class_counts() const {
  std::vector<std::size_t> counts(classes_.size(), 0);
  for (ClassId y : labels_) ++counts[class_index(y)];
  return counts;
}

std::size_t MemorySet::class_index(ClassId c) const {
  auto it = std::lower_bound(classes_.begin(), classes_.end(), c);
  if (it == classes_.end() || *it != c) {
    throw InputError("unknown class " + std::to_string(c));
  }
  return static_cast<std::size_t>(it - classes_.begin());
}

Vector MemorySet::centroid() const { return points_.rowwise().mean(); }

double MemorySet::radius() const {
  const Vector c = centroid();
  return (points_.colwise() - c).colwise().norm().maxCoeff();
}

double MemorySet::diameter() const {
  double best = 0.0;
  for (Eigen::Index i = 0; i < points_.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < points_.cols(); ++j) {
      best = std::max(best, (points_.col(i) - points_.col(j)).norm());
    }
  }
  return best;
}

Vector MemorySet::distances(const Vector& x) const {
  if (x.size() != points_.rows()) {
    throw InputError("query has dimension " + std::to_string(x.size()) + ", expected " +
                     std::to_string(points_.rows()));
  }
  return (points_.colwise() - x).colwise().norm().transpose();
}

std::size_t MemorySet::nearest(const Vector& x) const {
  const Vector d = distances(x);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < d.size(); ++i) {
    if (d[i] < d[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

EnergyLandscape::EnergyLandscape(MemorySet memories, double beta)
    : EnergyLandscape(std::move(memories), beta, {}) {}

EnergyLandscape::EnergyLandscape(MemorySet memories, double beta,
                                 std::vector<double> multiplicity)
    : memories_(std::move(memories)), beta_(beta), multiplicity_(std::move(multiplicity)) {
  if (!(beta_ > 0.0) || !std::isfinite(beta_)) {
    throw InputError("beta must be positive and finite");
  }
  if (multiplicity_.empty()) multiplicity_.assign(memories_.size(), 1.0);
  if (multiplicity_.size() != memories_.size()) {
    throw InputError("multiplicity vector length does not match memory count");
  }
  log_multiplicity_.resize(static_cast<Eigen::Index>(multiplicity_.size()));
  bool any = false;
  for (std::size_t i = 0; i < multiplicity_.size(); ++i) {
    const double m = multiplicity_[i];
    if (!(m >= 0.0) || !std::isfinite(m)) throw InputError("multiplicities must be non-negative");
    any = any || m > 0.0;
    log_multiplicity_[static_cast<Eigen::Index>(i)] =
        m > 0.0 ? std::log(m) : -std::numeric_limits<double>::infinity();
  }
  if (!any) throw InputError("at least one memory must have positive multiplicity");
}

EnergyLandscape EnergyLandscape::with_beta(double beta) const {
  return EnergyLandscape(memories_, beta, multiplicity_);
}

void EnergyLandscape::check_dim(const Vector& x) const {
  if (x.size() != memories_.dim()) {
    throw InputError("point has dimension " + std::to_string(x.size()) + ", expected " +
                     std::to_string(memories_.dim()));
  }
}

double EnergyLandscape::log_partition(const Vector& x, Vector& w) const {
  const Vector d2 = (memories_.points().colwise() - x).colwise().squaredNorm().transpose();
  w = log_multiplicity_ - (0.5 * beta_) * d2;
  const double top = w.maxCoeff();
  w = (w.array() - top).exp();
  const double total = w.sum();
  w /= total;
  return top + std::log(total);
}

double EnergyLandscape::value(const Vector& x) const {
  check_dim(x);
  Vector w;
  return -log_partition(x, w) / beta_;
}

Vector EnergyLandscape::weights(const Vector& x) const {
  check_dim(x);
  Vector w;
  log_partition(x, w);
  return w;
}

Vector EnergyLandscape::weighted_mean(const Vector& x) const {
  return memories_.points() * weights(x);
}

Vector EnergyLandscape::gradient(const Vector& x) const {
  return x - weighted_mean(x);
}

double EnergyLandscape::value_and_gradient(const Vector& x, Vector& grad) const {
  check_dim(x);
  Vector w;
  const double lz = log_partition(x, w);
  grad = x - memories_.points() * w;
  return -lz / beta_;
}

std::size_t EnergyLandscape::nearest_present(const Vector& x) const {
  const Vector d = memories_.distances(x);
  std::size_t best = memories_.size();
  for (std::size_t i = 0; i < memories_.size(); ++i) {
    if (!present(i)) continue;
    if (best == memories_.size() || d[static_cast<Eigen::Index>(i)] < d[static_cast<Eigen::Index>(best)]) {
      best = i;
    }
  }
  return best;
}

Matrix hessian_fd_raw(const Energy& energy, const Vector& x, double h) {
  if (!(h > 0.0)) throw InputError("finite-difference step must be positive");
  if (x.size() != energy.dim()) throw InputError("point dimension does not match energy");
  const Eigen::Index d = x.size();
  Matrix hess(d, d);
  Vector probe = x;
  for (Eigen::Index j = 0; j < d; ++j) {
    probe[j] = x[j] + h;
    const Vector up = energy.gradient(probe);
    probe[j] = x[j] - h;
    const Vector down = energy.gradient(probe);
    probe[j] = x[j];
    hess.col(j) = (up - down) / (2.0 * h);
  }
  return hess;
}

Matrix hessian_fd(const Energy& energy, const Vector& x, double h) {
  const Matrix raw = hessian_fd_raw(energy, x, h);
  return 0.5 * (raw + raw.transpose());
}

double spectral_norm_symmetric(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double operator_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

MemorySet generate_blobs(int dim, const BlobSpec& spec, std::uint64_t seed) {
  if (dim <= 0) throw InputError("dimension must be positive");
  if (spec.class_counts.empty()) throw InputError("at least one class count is required");
  if (!(spec.spread > 0.0)) throw InputError("blob spread must be positive");
  if (spec.min_spacing < 0.0) throw InputError("min_spacing must be non-negative");
  if (spec.mirror &&
      (spec.class_counts.size() != 2 || spec.class_counts[0] != spec.class_counts[1])) {
    throw InputError("mirrored blobs need exactly two classes of equal size");
  }

  std::vector<Vector> points;
  std::vector<ClassId> labels;
  SplitMix64 rng(derive_seed(seed, StreamKind::kMemories, 0));
  std::normal_distribution<double> normal(0.0, spec.spread);
  constexpr int kMaxAttempts = 10000;

  auto far_enough = [&](const Vector& p) {
    for (const auto& q : points) {
      if ((p - q).norm() <= spec.min_spacing) return false;
    }
    return true;
  };

  const std::size_t generated_classes = spec.mirror ? 1 : spec.class_counts.size();
  for (std::size_t c = 0; c < generated_classes; ++c) {
    Vector center = Vector::Zero(dim);
    center[0] = spec.separation * static_cast<double>(c);
    for (std::size_t n = 0; n < spec.class_counts[c]; ++n) {
      int attempts = 0;
      while (true) {
        Vector p(dim);
        for (int k = 0; k < dim; ++k) p[k] = center[k] + normal(rng);
        bool ok = far_enough(p);
        if (ok && spec.mirror) {
          Vector r = p;
          r[0] = spec.separation - p[0];
          ok = (r - p).norm() > spec.min_spacing && far_enough(r) &&
               std::all_of(points.begin(), points.end(), [&](const Vector& q) {
                 Vector rq = q;
                 rq[0] = spec.separation - q[0];
                 return (rq - p).norm() > spec.min_spacing;
               });
        }
        if (ok) {
          points.push_back(p);
          labels.push_back(static_cast<ClassId>(c));
          break;
        }
        if (++attempts >= kMaxAttempts) {
          throw InputError("could not place blob points with the requested min_spacing");
        }
      }
    }
  }
  if (spec.mirror) {
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
      Vector r = points[i];
      r[0] = spec.separation - r[0];
      points.push_back(r);
      labels.push_back(1);
    }
  }
  return MemorySet(points, std::move(labels));
}

}  // namespace landscape_lab
