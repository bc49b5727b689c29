#pragma once

#include <span>
#include <vector>

namespace landscape_lab {

// Ranks starting at 1; tied values share the average of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average ranks. NaN when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

// Standard error of a binomial proportion under the normal approximation.
double binomial_stderr(double p, double n);

}  // namespace landscape_lab
