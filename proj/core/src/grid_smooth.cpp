#include <cmath>
#include <vector>

#include "landscape_lab/abstraction.hpp"
#include "landscape_lab/errors.hpp"

namespace landscape_lab {

int reflect_index(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

Grid2D grid_smooth(const Grid2D& grid, double sigma) {
  if (grid.rows < 3 || grid.cols < 3) throw InputError("grid must have at least 3 cells per side");
  if (grid.values.size() != static_cast<std::size_t>(grid.rows) * static_cast<std::size_t>(grid.cols)) {
    throw InputError("grid storage does not match its shape");
  }
  if (!(sigma > 0.0)) throw InputError("sigma must be positive");

  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double w = std::exp(-static_cast<double>(t * t) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(t + radius)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  // Separable: rows then columns. The product of the normalized 1D kernels is
  // the normalized 2D kernel.
  Grid2D tmp(grid.rows, grid.cols);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += kernel[static_cast<std::size_t>(t + radius)] * grid(r, reflect_index(c + t, grid.cols));
      }
      tmp(r, c) = acc;
    }
  }
  Grid2D out(grid.rows, grid.cols);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += kernel[static_cast<std::size_t>(t + radius)] * tmp(reflect_index(r + t, grid.rows), c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

double discrete_curvature(const Grid2D& grid) {
  double total = 0.0;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const double lap = grid(reflect_index(r - 1, grid.rows), c) +
                         grid(reflect_index(r + 1, grid.rows), c) +
                         grid(r, reflect_index(c - 1, grid.cols)) +
                         grid(r, reflect_index(c + 1, grid.cols)) - 4.0 * grid(r, c);
      total += std::abs(lap);
    }
  }
  return total;
}

}  // namespace landscape_lab
