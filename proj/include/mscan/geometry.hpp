#pragma once

// Support-set geometry: the convex hull of the covariates, its volume, and
// the rules that pick the minimal window side t_n.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "mscan/matrix.hpp"

namespace mscan {

struct SupportHull {
  std::size_t dimension = 0;
  // Counter-clockwise hull polygon, first vertex lexicographically smallest.
  // Empty for dimension 1.
  std::vector<std::array<double, 2>> vertices;
  std::vector<double> lower;  // per-coordinate minimum
  std::vector<double> upper;  // per-coordinate maximum
  double volume = 0.0;        // length (d=1) or area (d=2)
};

// Exact hull for d_X in {1, 2}. Throws UnsupportedDimension for d_X > 2 and
// DegenerateSupport when every point coincides.
SupportHull build_hull(const Matrix& points);

// Per-coordinate max - min.
std::vector<double> coordinate_ranges(const Matrix& points);

struct TruncationRule {
  enum class Kind { fixed, power, power_scaled };

  Kind kind = Kind::power_scaled;
  double value = 1.0 / 3.0;  // t_n for fixed, δ for the power rules

  static TruncationRule fixed(double t) { return {Kind::fixed, t}; }
  static TruncationRule power(double delta) { return {Kind::power, delta}; }
  static TruncationRule power_scaled(double delta) { return {Kind::power_scaled, delta}; }

  // "n^-1/3", "range*n^-1/3", or the fixed value.
  std::string label() const;

  bool operator==(const TruncationRule&) const = default;
};

// t_n for a sample of size n. power: n^{-δ}; power_scaled: n^{-δ} times the
// coordinate range (geometric mean of ranges for d_X ≥ 2); fixed: the value.
double truncation(const TruncationRule& rule, std::size_t n, const Matrix& points);

}  // namespace mscan
