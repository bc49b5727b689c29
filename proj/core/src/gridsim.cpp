#include "landscape_lab/gridsim.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "landscape_lab/errors.hpp"
#include "landscape_lab/random.hpp"

namespace landscape_lab {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

ClassGrid::ClassGrid(int side, std::vector<std::uint8_t> cells)
    : side_(side), cells_(std::move(cells)) {
  if (!is_power_of_two(side_)) throw InputError("grid side must be a power of two");
  if (cells_.size() != static_cast<std::size_t>(side_) * static_cast<std::size_t>(side_)) {
    throw InputError("grid cell count does not match side");
  }
  for (auto v : cells_) {
    if (v > 1) throw InputError("grid cells must be 0 or 1");
  }
}

double ClassGrid::red_share() const {
  std::size_t red = 0;
  for (auto v : cells_) red += v;
  return static_cast<double>(red) / static_cast<double>(cells_.size());
}

ClassGrid init_grid(int side, double p_red, std::uint64_t seed) {
  if (!is_power_of_two(side) || side < 2) {
    throw InputError("grid side must be a power of two >= 2, got " + std::to_string(side));
  }
  if (!(p_red >= 0.0 && p_red <= 1.0)) throw InputError("p_red must lie in [0, 1]");
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
  for (int r = 0; r < side; ++r) {
    SplitMix64 rng(derive_seed(seed, StreamKind::kGridRow, static_cast<std::uint64_t>(r)));
    for (int c = 0; c < side; ++c) {
      cells[static_cast<std::size_t>(r) * static_cast<std::size_t>(side) + static_cast<std::size_t>(c)] =
          rng.uniform() < p_red ? 1 : 0;
    }
  }
  return ClassGrid(side, std::move(cells));
}

ClassGrid coarsen(const ClassGrid& grid, std::uint64_t seed) {
  if (grid.side() < 2) throw InputError("cannot coarsen a grid of side 1");
  const int half = grid.side() / 2;
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(half) * static_cast<std::size_t>(half));
  for (int r = 0; r < half; ++r) {
    for (int c = 0; c < half; ++c) {
      const int red = grid(2 * r, 2 * c) + grid(2 * r, 2 * c + 1) + grid(2 * r + 1, 2 * c) +
                      grid(2 * r + 1, 2 * c + 1);
      std::uint8_t out = 0;
      if (red > 2) {
        out = 1;
      } else if (red == 2) {
        SplitMix64 rng(derive_seed(seed, StreamKind::kGridTie, static_cast<std::uint64_t>(r),
                                   static_cast<std::uint64_t>(c)));
        out = rng.uniform() < 0.5 ? 1 : 0;
      }
      cells[static_cast<std::size_t>(r) * static_cast<std::size_t>(half) + static_cast<std::size_t>(c)] = out;
    }
  }
  return ClassGrid(half, std::move(cells));
}

std::vector<CurvePoint> amplification_curve(int side, double p_red, int levels,
                                            std::uint64_t seed) {
  if (!is_power_of_two(side) || side < 2) throw InputError("grid side must be a power of two >= 2");
  if (levels < 0) throw InputError("levels must be non-negative");
  int max_levels = 0;
  while ((1 << (max_levels + 1)) <= side) ++max_levels;
  if (levels > max_levels) {
    throw InputError("levels = " + std::to_string(levels) + " exceeds log2(side) = " +
                     std::to_string(max_levels));
  }
  std::vector<CurvePoint> curve;
  ClassGrid grid = init_grid(side, p_red, seed);
  curve.push_back({0, grid.red_share()});
  for (int level = 1; level <= levels; ++level) {
    grid = coarsen(grid, derive_seed(seed, StreamKind::kLevel, static_cast<std::uint64_t>(level)));
    curve.push_back({level, grid.red_share()});
  }
  return curve;
}

double majority_map(double p) {
  const double q = 1.0 - p;
  return std::pow(p, 4) + 4.0 * std::pow(p, 3) * q + 3.0 * p * p * q * q;
}

double iterate_majority_map(double p, int levels) {
  for (int i = 0; i < levels; ++i) p = majority_map(p);
  return p;
}

void write_pbm(const std::filesystem::path& path, const ClassGrid& grid) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "P1\n" << grid.side() << ' ' << grid.side() << '\n';
  for (int r = 0; r < grid.side(); ++r) {
    for (int c = 0; c < grid.side(); ++c) {
      if (c) out << ' ';
      out << static_cast<int>(grid(r, c));
    }
    out << '\n';
  }
}

}  // namespace landscape_lab
