#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace bvqa::quality {

/// A correlation is undefined for the given input (constant vector, too few
/// points, mismatched lengths).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Pearson linear correlation coefficient.
double plcc(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation: Pearson correlation of average-tie ranks.
double srcc(std::span<const double> x, std::span<const double> y);

/// 1-based ranks with ties sharing their average rank. Ascending gives rank 1
/// to the smallest value; descending gives rank 1 to the largest.
std::vector<double> average_ranks(std::span<const double> values, bool descending = false);

}  // namespace bvqa::quality
