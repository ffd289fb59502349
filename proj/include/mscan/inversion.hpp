#pragma once

// Confidence regions by test inversion over a rectangular θ grid.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mscan/critval.hpp"
#include "mscan/geometry.hpp"
#include "mscan/models.hpp"
#include "mscan/scan.hpp"

namespace mscan {

struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  std::size_t steps = 1;  // evenly spaced points including both ends; 1 -> {min}

  double value(std::size_t k) const;
};

class ThetaGrid {
 public:
  ThetaGrid() = default;
  // Throws InvalidGrid on an empty axis list, steps == 0 or min > max.
  explicit ThetaGrid(std::vector<GridAxis> axes);

  std::size_t dimension() const noexcept { return axes_.size(); }
  std::size_t size() const noexcept { return size_; }
  const std::vector<GridAxis>& axes() const noexcept { return axes_; }

  // Row-major: the last coordinate varies fastest.
  Theta point(std::size_t index) const;

 private:
  std::vector<GridAxis> axes_;
  std::size_t size_ = 0;
};

struct CritvalSpec {
  CritvalMethod method = CritvalMethod::analytic;
  std::size_t replications = kDefaultReplications;
  CovarianceFn covariance;  // simulated method; empty means identity
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct ConfidenceRegion {
  double level = 0.95;
  ThetaGrid grid;
  CriticalValue critical_value;
  std::size_t n = 0;
  double t_n = 0.0;
  std::vector<double> statistic;  // S_n(θ) per grid point
  std::vector<bool> accepted;
  // [min, max] of each coordinate over accepted points; empty if none accepted.
  std::vector<Interval> projections;

  std::size_t accepted_count() const;
};

// min/max projections of the accepted points.
std::vector<Interval> project(const ThetaGrid& grid, const std::vector<bool>& accepted);

// θ-independent critical value for a dataset; shared by every grid point.
CriticalValue dataset_critical_value(const Dataset& data, ModelKind model, double t_n,
                                     const CritvalSpec& spec, double alpha, std::uint64_t seed,
                                     const TruncationRule& rule, const ScanConfig& config = {});

// Accepts θ iff S_n(θ) does not exceed the critical value.
ConfidenceRegion invert_test(const Dataset& data, ModelKind model, const ThetaGrid& grid,
                             const TruncationRule& rule, const CritvalSpec& spec, double alpha,
                             std::uint64_t seed, const ScanConfig& config = {});

// theta1,...,statistic,threshold,accepted; threshold on the S_n scale.
std::string region_csv(const ConfidenceRegion& region);

}  // namespace mscan
