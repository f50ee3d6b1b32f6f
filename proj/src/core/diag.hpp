#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "image.hpp"

namespace opstego {

/// Horizontal backward/forward differences on interior columns.
/// backward(r, j) = I(r, j) - I(r, j-1), forward(r, j) = I(r, j) - I(r, j+1)
/// for j in [1, width-2] (0-based); stored as height x (width-2).
struct DiffFields {
  int rows = 0;
  int cols = 0;
  std::vector<int> backward;
  std::vector<int> forward;
};

DiffFields diff_fields(const GrayImage& img);

inline constexpr int kDefaultSupportBound = 16;

/// Empirical joint distribution of (backward, forward) differences, each
/// clamped to [-bound, bound].
class JointProb {
 public:
  JointProb() = default;
  JointProb(int bound, std::vector<double> table, std::uint64_t total_pairs);

  int bound() const noexcept { return bound_; }
  int side() const noexcept { return 2 * bound_ + 1; }
  std::uint64_t total_pairs() const noexcept { return total_pairs_; }
  const std::vector<double>& table() const noexcept { return table_; }

  /// P(x, y) for x, y in [-bound, bound].
  double operator()(int x, int y) const {
    return table_[std::size_t(x + bound_) * std::size_t(side()) + std::size_t(y + bound_)];
  }

 private:
  int bound_ = 0;
  std::vector<double> table_;
  std::uint64_t total_pairs_ = 0;
};

JointProb joint_probability(const GrayImage& img, int bound = kDefaultSupportBound);

/// Elementwise mean of tables sharing one bound.
JointProb average_joint_probability(const std::vector<JointProb>& tables);

/// Mass in the first and third quadrants (both differences nonzero and of
/// equal sign): the local extrema.
double quadrant_mass(const JointProb& jp);

/// Mass with max(|x|, |y|) >= radius.
double far_mass(const JointProb& jp, int radius);

/// Fraction of interior pixels that are strict horizontal local extrema
/// (backward * forward > 0).
double extrema_ratio(const GrayImage& img);

/// CSV grid: row x = -bound..bound, column y = -bound..bound.
std::string export_jointprob(const JointProb& jp);
JointProb parse_jointprob_csv(std::string_view csv);

}  // namespace opstego
