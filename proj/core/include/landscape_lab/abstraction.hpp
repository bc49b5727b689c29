#pragma once

#include <cstdint>
#include <vector>

#include "landscape_lab/landscape.hpp"

namespace landscape_lab {

enum class DecoderFamily {
  // psi(z) = c * z
  kDiagonal,
  // psi(z) = c * s * tanh(z / s), componentwise; s is the saturation scale
  kScaledTanh,
};

// Hierarchy of decoders psi^(a): Z^(a) -> H for a = 0..A. psi^(0) is the
// identity and the contraction factors c_a bound the decoder Jacobian norms.
//
// The decoders are the contractive objects: E^(a) = E o psi^(a), so the
// level Hessian is J^T (hess E) J plus a term in the decoder's second
// derivatives, and |J| <= c_a < 1 for a >= 1.
class AbstractionHierarchy {
 public:
  // factors[0] must be 1, the rest strictly decreasing inside (0, 1].
  AbstractionHierarchy(DecoderFamily family, std::vector<double> factors, int dim,
                       double tanh_scale = 1.0);

  // c_a = ratio^a for a = 0..top_level.
  static AbstractionHierarchy geometric(DecoderFamily family, int top_level, double ratio,
                                        int dim, double tanh_scale = 1.0);

  DecoderFamily family() const noexcept { return family_; }
  int top_level() const noexcept { return static_cast<int>(factors_.size()) - 1; }
  int dim() const noexcept { return dim_; }
  double tanh_scale() const noexcept { return tanh_scale_; }
  const std::vector<double>& factors() const noexcept { return factors_; }
  double contraction(int level) const;

  // psi^(a)(z)
  Vector decode(int level, const Vector& z) const;
  // (psi^(a))^{-1}(x); throws InputError when x is outside the decoder's image.
  Vector encode(int level, const Vector& x) const;
  // Analytic Jacobian of psi^(a) at z.
  Matrix jacobian(int level, const Vector& z) const;

 private:
  void check_level(int level) const;
  void check_dim(const Vector& v) const;

  DecoderFamily family_;
  std::vector<double> factors_;
  int dim_;
  double tanh_scale_;
};

// E^(a)(z) = E(psi^(a)(z)) with gradient J^T grad E(psi^(a)(z)). Holds
// references: the hierarchy and the base energy must outlive it.
class LevelEnergy final : public Energy {
 public:
  LevelEnergy(const AbstractionHierarchy& hierarchy, const Energy& base, int level);

  int level() const noexcept { return level_; }
  const AbstractionHierarchy& hierarchy() const noexcept { return *hierarchy_; }

  int dim() const override { return hierarchy_->dim(); }
  double value(const Vector& z) const override;
  Vector gradient(const Vector& z) const override;
  double value_and_gradient(const Vector& z, Vector& grad) const override;

 private:
  const AbstractionHierarchy* hierarchy_;
  const Energy* base_;
  int level_;
};

double level_energy(const AbstractionHierarchy& hierarchy, const Energy& base, int level,
                    const Vector& z);

struct SmoothnessReport {
  int level = 0;
  // Max spectral norm of the finite-difference Hessian over the probes and
  // 63 interior points of the probe pair that sets lipschitz_est.
  double hessian_norm_est = 0.0;
  // Max |grad E(z1) - grad E(z2)| / |z1 - z2| over probe pairs.
  double lipschitz_est = 0.0;
  double jacobian_norm_est = 0.0;
};

struct SmoothnessOptions {
  int probes = 256;
  // Measured in H. <= 0 selects twice the memory-set radius.
  double probe_radius = 0.0;
  std::uint64_t seed = 0;
  double fd_step = 1e-4;
  int workers = 1;
};

// One report per level. Probe j uses the same unit-ball sample at every level,
// scaled by probe_radius / c_a and centred on the encoded memory centroid.
std::vector<SmoothnessReport> smoothness_report(const AbstractionHierarchy& hierarchy,
                                                const EnergyLandscape& base,
                                                const SmoothnessOptions& options);

// Max finite-difference Jacobian operator norm of psi^(a) over probe points
// in a ball around the origin of Z^(a). Probe 0 is the origin itself.
double jacobian_norm_probe(const AbstractionHierarchy& hierarchy, int level, int probes,
                           std::uint64_t seed, double probe_radius = 1.0,
                           double fd_step = 1e-6);

// Row-major 2D field.
struct Grid2D {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Grid2D() = default;
  Grid2D(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  double& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const {
    return values[static_cast<std::size_t>(r) * cols + c];
  }
};

// Maps an out-of-range index onto [0, n) by half-sample symmetric reflection
// (... c b a | a b c ... ).
int reflect_index(int i, int n);

// Truncated Gaussian smoothing, kernel radius ceil(3 sigma), reflected
// boundary, same shape as the input.
Grid2D grid_smooth(const Grid2D& grid, double sigma);

// Sum of |5-point Laplacian| over the grid with the same reflected boundary.
double discrete_curvature(const Grid2D& grid);

}  // namespace landscape_lab
