#include "landscape_lab/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "landscape_lab/errors.hpp"
#include "landscape_lab/parallel.hpp"
#include "landscape_lab/random.hpp"

namespace landscape_lab {

AbstractionHierarchy::AbstractionHierarchy(DecoderFamily family, std::vector<double> factors,
                                           int dim, double tanh_scale)
    : family_(family), factors_(std::move(factors)), dim_(dim), tanh_scale_(tanh_scale) {
  if (dim_ <= 0) throw InputError("hierarchy dimension must be positive");
  if (factors_.empty()) throw InputError("hierarchy needs at least level 0");
  if (factors_[0] != 1.0) throw InputError("contraction factor of level 0 must be 1");
  for (std::size_t a = 1; a < factors_.size(); ++a) {
    if (!(factors_[a] > 0.0) || !(factors_[a] < factors_[a - 1])) {
      throw InputError("contraction factors must be strictly decreasing in (0, 1]; level " +
                       std::to_string(a) + " violates this");
    }
  }
  if (!(tanh_scale_ > 0.0)) throw InputError("tanh saturation scale must be positive");
}

AbstractionHierarchy AbstractionHierarchy::geometric(DecoderFamily family, int top_level,
                                                     double ratio, int dim,
                                                     double tanh_scale) {
  if (top_level < 0) throw InputError("top level must be non-negative");
  if (!(ratio > 0.0 && ratio < 1.0) && top_level > 0) {
    throw InputError("geometric ratio must lie in (0, 1)");
  }
  std::vector<double> factors(static_cast<std::size_t>(top_level) + 1);
  for (int a = 0; a <= top_level; ++a) factors[static_cast<std::size_t>(a)] = std::pow(ratio, a);
  return AbstractionHierarchy(family, std::move(factors), dim, tanh_scale);
}

void AbstractionHierarchy::check_level(int level) const {
  if (level < 0 || level > top_level()) {
    throw InputError("abstraction level " + std::to_string(level) + " outside [0, " +
                     std::to_string(top_level()) + "]");
  }
}

void AbstractionHierarchy::check_dim(const Vector& v) const {
  if (v.size() != dim_) {
    throw InputError("vector has dimension " + std::to_string(v.size()) + ", hierarchy has " +
                     std::to_string(dim_));
  }
}

double AbstractionHierarchy::contraction(int level) const {
  check_level(level);
  return factors_[static_cast<std::size_t>(level)];
}

Vector AbstractionHierarchy::decode(int level, const Vector& z) const {
  check_level(level);
  check_dim(z);
  if (level == 0) return z;
  const double c = factors_[static_cast<std::size_t>(level)];
  if (family_ == DecoderFamily::kDiagonal) return c * z;
  const double s = tanh_scale_;
  return (c * s) * (z.array() / s).tanh().matrix();
}

Vector AbstractionHierarchy::encode(int level, const Vector& x) const {
  check_level(level);
  check_dim(x);
  if (level == 0) return x;
  const double c = factors_[static_cast<std::size_t>(level)];
  if (family_ == DecoderFamily::kDiagonal) return x / c;
  const double s = tanh_scale_;
  Vector z(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double u = x[k] / (c * s);
    if (!(std::abs(u) < 1.0)) {
      throw InputError("point lies outside the image of the tanh decoder at level " +
                       std::to_string(level));
    }
    z[k] = s * std::atanh(u);
  }
  return z;
}

Matrix AbstractionHierarchy::jacobian(int level, const Vector& z) const {
  check_level(level);
  check_dim(z);
  if (level == 0) return Matrix::Identity(dim_, dim_);
  const double c = factors_[static_cast<std::size_t>(level)];
  if (family_ == DecoderFamily::kDiagonal) return c * Matrix::Identity(dim_, dim_);
  const Eigen::ArrayXd t = (z.array() / tanh_scale_).tanh();
  return (c * (1.0 - t.square())).matrix().asDiagonal();
}

LevelEnergy::LevelEnergy(const AbstractionHierarchy& hierarchy, const Energy& base, int level)
    : hierarchy_(&hierarchy), base_(&base), level_(level) {
  hierarchy.contraction(level);
  if (base.dim() != hierarchy.dim()) {
    throw InputError("base energy dimension does not match hierarchy dimension");
  }
}

double LevelEnergy::value(const Vector& z) const {
  return base_->value(hierarchy_->decode(level_, z));
}

Vector LevelEnergy::gradient(const Vector& z) const {
  const Vector g = base_->gradient(hierarchy_->decode(level_, z));
  if (level_ == 0) return g;
  return hierarchy_->jacobian(level_, z).transpose() * g;
}

double LevelEnergy::value_and_gradient(const Vector& z, Vector& grad) const {
  Vector g;
  const double e = base_->value_and_gradient(hierarchy_->decode(level_, z), g);
  grad = level_ == 0 ? g : Vector(hierarchy_->jacobian(level_, z).transpose() * g);
  return e;
}

double level_energy(const AbstractionHierarchy& hierarchy, const Energy& base, int level,
                    const Vector& z) {
  return LevelEnergy(hierarchy, base, level).value(z);
}

namespace {

constexpr int kSegmentSamples = 64;

// Uniform sample in the unit ball of R^d.
Vector unit_ball_sample(int dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(dim);
  double norm = 0.0;
  do {
    for (int k = 0; k < dim; ++k) u[k] = normal(rng);
    norm = u.norm();
  } while (norm == 0.0);
  const double r = std::pow(rng.uniform(), 1.0 / dim);
  return (r / norm) * u;
}

}  // namespace

std::vector<SmoothnessReport> smoothness_report(const AbstractionHierarchy& hierarchy,
                                                const EnergyLandscape& base,
                                                const SmoothnessOptions& options) {
  if (options.probes < 2) throw InputError("smoothness_report needs at least 2 probes");
  if (base.dim() != hierarchy.dim()) {
    throw InputError("landscape dimension does not match hierarchy dimension");
  }
  const int d = hierarchy.dim();
  const double radius =
      options.probe_radius > 0.0 ? options.probe_radius : 2.0 * base.memories().radius();
  if (!(radius > 0.0)) throw InputError("probe radius must be positive");
  const auto n = static_cast<std::size_t>(options.probes);

  std::vector<Vector> unit(n);
  for (std::size_t j = 0; j < n; ++j) {
    unit[j] = unit_ball_sample(d, derive_seed(options.seed, StreamKind::kSmoothnessProbe, j));
  }

  const Vector centroid = base.memories().centroid();
  std::vector<SmoothnessReport> reports;
  for (int a = 0; a <= hierarchy.top_level(); ++a) {
    const LevelEnergy energy(hierarchy, base, a);
    const Vector center = hierarchy.encode(a, centroid);
    // radius / c_a: for a linear decoder this is the same ball of H at every level
    const double level_radius = radius / hierarchy.contraction(a);

    std::vector<Vector> points(n);
    std::vector<Vector> grads(n);
    std::vector<double> hess_norm(n);
    parallel_for(n, options.workers, [&](std::size_t j) {
      points[j] = center + level_radius * unit[j];
      grads[j] = energy.gradient(points[j]);
      hess_norm[j] = spectral_norm_symmetric(hessian_fd(energy, points[j], options.fd_step));
    });

    SmoothnessReport rep;
    rep.level = a;
    rep.hessian_norm_est = *std::max_element(hess_norm.begin(), hess_norm.end());
    std::vector<double> lip(n, 0.0);
    std::vector<std::size_t> partner(n, 0);
    parallel_for(n, options.workers, [&](std::size_t i) {
      double best = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dz = (points[i] - points[j]).norm();
        if (dz > 0.0) {
          const double r = (grads[i] - grads[j]).norm() / dz;
          if (r > best) {
            best = r;
            partner[i] = j;
          }
        }
      }
      lip[i] = best;
    });
    const auto arg = static_cast<std::size_t>(std::max_element(lip.begin(), lip.end()) - lip.begin());
    rep.lipschitz_est = lip[arg];

    // The gradient ratio of a pair is bounded by the Hessian norm somewhere on
    // its segment, so the extremal segment is sampled as well.
    if (lip[arg] > 0.0) {
      const Vector a0 = points[arg];
      const Vector delta = points[partner[arg]] - a0;
      std::vector<double> seg(kSegmentSamples - 1);
      parallel_for(seg.size(), options.workers, [&](std::size_t k) {
        const double t = static_cast<double>(k + 1) / kSegmentSamples;
        seg[k] = spectral_norm_symmetric(hessian_fd(energy, Vector(a0 + t * delta), options.fd_step));
      });
      rep.hessian_norm_est = std::max(rep.hessian_norm_est, *std::max_element(seg.begin(), seg.end()));
    }
    rep.jacobian_norm_est = jacobian_norm_probe(hierarchy, a, options.probes, options.seed);
    reports.push_back(rep);
  }
  return reports;
}

double jacobian_norm_probe(const AbstractionHierarchy& hierarchy, int level, int probes,
                           std::uint64_t seed, double probe_radius, double fd_step) {
  hierarchy.contraction(level);
  if (probes < 1) throw InputError("jacobian_norm_probe needs at least one probe");
  if (!(fd_step > 0.0)) throw InputError("finite-difference step must be positive");
  const int d = hierarchy.dim();
  double best = 0.0;
  for (int j = 0; j < probes; ++j) {
    const Vector z =
        j == 0 ? Vector(Vector::Zero(d))
               : Vector(probe_radius *
                        unit_ball_sample(d, derive_seed(seed, StreamKind::kJacobianProbe,
                                                        static_cast<std::uint64_t>(j))));
    Matrix jac(d, d);
    Vector zp = z;
    for (int k = 0; k < d; ++k) {
      zp[k] = z[k] + fd_step;
      const Vector up = hierarchy.decode(level, zp);
      zp[k] = z[k] - fd_step;
      const Vector down = hierarchy.decode(level, zp);
      zp[k] = z[k];
      jac.col(k) = (up - down) / (2.0 * fd_step);
    }
    best = std::max(best, operator_norm(jac));
  }
  return best;
}

}  // namespace landscape_lab
