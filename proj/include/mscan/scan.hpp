#pragma once

// Multiscale studentized scan statistic.
//
// For moment column j the statistic is
//
//   T_j = max(0, -min_cells  sum_{i in cell} m_ij / sqrt(n * sum m_ij^2 - (sum m_ij)^2))
//
// over every closed box with all sides >= t_n that fits inside the
// covariates' bounding box. Only the member set of a box matters, so the
// minimum is taken over data-realizable member sets: per coordinate, a
// contiguous range of distinct values [v_a, v_b] is realizable when the box
// can be stretched to width t_n without swallowing the neighbouring values
// v_{a-1}, v_{b+1}. S = max_j T_j.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mscan/matrix.hpp"

namespace mscan {

// A cell whose n * sum m^2 - (sum m)^2 does not exceed this fraction of
// n * sum m^2 has zero sample variance (or is empty) and is skipped.
inline constexpr double kZeroVarianceTolerance = 1e-10;

inline constexpr std::size_t kDefaultMaxEdgesPerDim = 64;

struct ScanConfig {
  // Per-coordinate cap on candidate edges for d_X >= 2. Coordinates with
  // more distinct values are coarsened to this many quantile-spaced groups.
  std::size_t max_edges_per_dim = kDefaultMaxEdgesPerDim;
};

// Inclusive index range.
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;

  bool operator==(const IndexRange&) const = default;
  auto operator<=>(const IndexRange&) const = default;
};

struct Cell {
  std::vector<double> lower;  // s, one realizing box
  std::vector<double> side;   // t, each >= t_n
  // Per coordinate: range of distinct-value groups the box covers.
  std::vector<IndexRange> ranks;
  std::vector<std::size_t> members;  // observation indices, ascending
};

struct ScanResult {
  std::vector<double> T;  // one per moment, >= 0
  double S = 0.0;         // max_j T_j
  // Minimising cell per moment; set whenever T_j > 0.
  std::vector<std::optional<Cell>> argmin;
  // (cell, moment) pairs that produced a statistic / were skipped for zero
  // variance.
  std::size_t cells_evaluated = 0;
  std::size_t cells_skipped = 0;
};

// sum / sqrt(n * sum_sq - sum^2), or nullopt when the cell is skipped.
std::optional<double> studentized_statistic(double sum, double sum_sq, std::size_t n);

// Statistic of one moment column restricted to `members`; n is the full
// sample size, not the cell count.
std::optional<double> cell_statistic(std::span<const double> column,
                                     std::span<const std::size_t> members, std::size_t n);

// Closed-box realizability of a contiguous run of values. The run is bounded
// by the values just outside it (or by its own extreme value at the edge of
// the support). When the run spans the whole support the box may be exactly
// as wide as the support; otherwise a neighbour must be excluded and the
// available width is open.
inline bool range_realizable(double lower_bound, double upper_bound, bool whole_support,
                             double t_n) {
  const double width = upper_bound - lower_bound;
  return whole_support ? width >= t_n : width > t_n;
}

// All index ranges [i..j] of an ascending sample (0-based) that some closed
// interval [s, s+t], t >= t_n, inside [x_0, x_{n-1}] selects exactly, in
// lexicographic order.
std::vector<IndexRange> enumerate_cells_1d(std::span<const double> sorted_x, double t_n);

// Scan plan for a fixed covariate matrix and t_n; evaluating a moment matrix
// reuses the sort order and realizable cell list. Safe to share between
// threads.
class Scanner {
 public:
  // Throws InvalidInput on bad covariates and InvalidTruncation when no cell
  // is realizable.
  Scanner(const Matrix& x, double t_n, ScanConfig config = {});

  ScanResult operator()(const Matrix& moments) const;

  std::size_t size() const noexcept { return x_.rows(); }
  std::size_t dimension() const noexcept { return x_.cols(); }
  double truncation() const noexcept { return t_n_; }
  // Number of realizable cells (per moment).
  std::size_t cell_count() const noexcept { return cell_count_; }
  // True when no coordinate was coarsened, i.e. the statistic is exact.
  bool exact() const noexcept { return exact_; }

 private:
  struct Axis {
    std::vector<double> values;            // distinct coordinate values, ascending
    std::vector<std::size_t> group_first;  // first value index of each group, plus sentinel
    std::vector<IndexRange> ranges;        // realizable group ranges, lexicographic
  };

  std::size_t groups(std::size_t k) const { return axes_[k].group_first.size() - 1; }
  bool group_range_realizable(std::size_t k, std::size_t a, std::size_t b) const;
  void box_geometry(std::size_t k, IndexRange r, double& lower, double& side) const;

  ScanResult scan_1d(const Matrix& moments) const;
  ScanResult scan_grid(const Matrix& moments) const;
  void run_sums(const Matrix& moments, std::size_t j, std::vector<double>& sums,
                std::vector<double>& sum_sqs) const;
  Cell make_cell(const std::vector<IndexRange>& ranks) const;

  Matrix x_;
  double t_n_;
  ScanConfig config_;
  std::vector<std::size_t> order_;     // observations sorted lexicographically by row
  std::vector<std::size_t> run_first_; // runs of identical rows in order_, plus sentinel
  std::vector<Axis> axes_;
  std::vector<std::size_t> run_cell_;  // grid cell (flat, row-major over groups) of each run
  std::vector<std::size_t> first_upper_;  // 1-D: first realizable upper group per lower group
  std::size_t cell_count_ = 0;
  bool exact_ = true;
};

// Exact statistic for d_X = 1; for d_X >= 2 dispatches to the grid path with
// config.max_edges_per_dim.
ScanResult scan_statistic(const Matrix& x, const Matrix& moments, double t_n,
                          const ScanConfig& config = {});

// Summed-area-table path. Coincides with the exact statistic when no
// coordinate has more than max_edges_per_dim distinct values; otherwise a
// lower bound on it.
ScanResult scan_statistic_grid(const Matrix& x, const Matrix& moments, double t_n,
                               std::size_t max_edges_per_dim = kDefaultMaxEdgesPerDim);

}  // namespace mscan
