#pragma once

// Moment functions of the median-regression models with interval-censored
// or missing outcomes. Both return values in {-1/2, +1/2}.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mscan/matrix.hpp"

namespace mscan {

// Covariates plus the outcome bounds [w_lo, w_hi]; ±infinity encodes an
// unbounded side. Models read only the columns they need.
struct Dataset {
  Matrix x;
  std::vector<double> w_lo;
  std::vector<double> w_hi;

  std::size_t size() const noexcept { return x.rows(); }
  std::size_t dimension() const noexcept { return x.cols(); }

  // Throws InvalidInput if columns disagree on n, a covariate is not finite,
  // a bound is NaN, or w_lo > w_hi.
  void validate() const;
};

struct IntervalObservation {
  std::vector<double> x;
  double w_lo;
  double w_hi;
};

Dataset make_dataset(std::span<const IntervalObservation> observations);

// Intercept followed by one slope per covariate.
struct Theta {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }
  bool operator==(const Theta&) const = default;
};

struct MomentMatrix {
  Matrix values;  // n x d_Y
  Theta theta;

  std::size_t moments() const noexcept { return values.cols(); }
};

enum class ModelKind { interval, missing };

std::size_t moment_count(ModelKind model);
std::string to_string(ModelKind model);

// m1 = 1(θ1 + θ2'x <= w_hi) - 1/2,  m2 = 1/2 - 1(θ1 + θ2'x <= w_lo).
MomentMatrix interval_regression_moments(const Dataset& data, const Theta& theta);

// m = 1(θ1 + θ2'x <= w_hi) - 1/2, w_hi = +inf for a missing outcome.
MomentMatrix missing_data_moment(const Dataset& data, const Theta& theta);

MomentMatrix evaluate_moments(ModelKind model, const Dataset& data, const Theta& theta);

}  // namespace mscan
