#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace landscape_lab {

// Square two-class grid: 0 = minority ("blue"), 1 = majority ("red").
class ClassGrid {
 public:
  // side must be a power of two >= 1.
  ClassGrid(int side, std::vector<std::uint8_t> cells);

  int side() const noexcept { return side_; }
  std::uint8_t operator()(int r, int c) const {
    return cells_[static_cast<std::size_t>(r) * static_cast<std::size_t>(side_) + static_cast<std::size_t>(c)];
  }
  const std::vector<std::uint8_t>& cells() const noexcept { return cells_; }

  double red_share() const;

 private:
  int side_;
  std::vector<std::uint8_t> cells_;
};

bool is_power_of_two(int n);

// iid Bernoulli(p_red) cells; side must be a power of two >= 2.
ClassGrid init_grid(int side, double p_red, std::uint64_t seed);

// Majority of each 2x2 block; a 2-2 tie is broken uniformly at random from a
// stream seeded by (seed, block row, block column).
ClassGrid coarsen(const ClassGrid& grid, std::uint64_t seed);

struct CurvePoint {
  int level = 0;
  double red_share = 0.0;
};

// Red share at levels 0..levels, coarsening once per level.
std::vector<CurvePoint> amplification_curve(int side, double p_red, int levels,
                                            std::uint64_t seed);

// Expected red share after one coarsening of an iid grid with red share p:
// P(>= 3 red) + P(2 red) / 2 = p^4 + 4 p^3 (1-p) + 3 p^2 (1-p)^2.
double majority_map(double p);
double iterate_majority_map(double p, int levels);

// Plain (P1) portable bitmap; red cells are written as black pixels.
void write_pbm(const std::filesystem::path& path, const ClassGrid& grid);

}  // namespace landscape_lab
