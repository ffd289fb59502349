#include "mscan/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mscan/errors.hpp"

namespace mscan {

namespace {

bool rows_less(const Matrix& m, std::size_t a, std::size_t b) {
  const auto ra = m.row(a);
  const auto rb = m.row(b);
  return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
}

bool rows_equal(const Matrix& m, std::size_t a, std::size_t b) {
  const auto ra = m.row(a);
  const auto rb = m.row(b);
  return std::equal(ra.begin(), ra.end(), rb.begin());
}

void check_moments(const Matrix& moments, std::size_t n) {
  if (moments.rows() != n) {
    throw InvalidInput("scan: moment matrix has " + std::to_string(moments.rows()) +
                       " rows, covariates have " + std::to_string(n));
  }
  if (moments.cols() == 0) throw InvalidInput("scan: need at least one moment column");
  for (double v : moments.data()) {
    if (!std::isfinite(v)) throw InvalidInput("scan: non-finite moment value");
  }
}

// Prefix and summed-area differences carry rounding of order eps times the
// table total. Sums below this share of the total are treated as exactly zero,
// so cells whose true variance is zero are skipped instead of producing noise.
double rounding_resolution(std::size_t d) {
  const double corners = std::ldexp(1.0, static_cast<int>(d));
  return 4.0 * (static_cast<double>(d) + corners) * std::numeric_limits<double>::epsilon();
}

}  // namespace

std::optional<double> studentized_statistic(double sum, double sum_sq, std::size_t n) {
  const double nq = static_cast<double>(n) * sum_sq;
  const double denom2 = nq - sum * sum;
  if (!(denom2 > kZeroVarianceTolerance * nq)) return std::nullopt;
  return sum / std::sqrt(denom2);
}

std::optional<double> cell_statistic(std::span<const double> column,
                                     std::span<const std::size_t> members, std::size_t n) {
  double sum = 0.0, sum_sq = 0.0;
  for (auto i : members) {
    sum += column[i];
    sum_sq += column[i] * column[i];
  }
  return studentized_statistic(sum, sum_sq, n);
}

std::vector<IndexRange> enumerate_cells_1d(std::span<const double> x, double t_n) {
  std::vector<IndexRange> out;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && x[i - 1] == x[i]) continue;  // cannot split a tie
    const double lower = i > 0 ? x[i - 1] : x[0];
    for (std::size_t j = i; j < n; ++j) {
      if (j + 1 < n && x[j + 1] == x[j]) continue;
      const double upper = j + 1 < n ? x[j + 1] : x[n - 1];
      if (range_realizable(lower, upper, i == 0 && j + 1 == n, t_n)) out.push_back({i, j});
    }
  }
  return out;
}

Scanner::Scanner(const Matrix& x, double t_n, ScanConfig config)
    : x_(x), t_n_(t_n), config_(config) {
  const std::size_t n = x_.rows();
  const std::size_t d = x_.cols();
  if (n < 2) throw InvalidInput("scan: need at least 2 observations");
  if (d == 0) throw InvalidInput("scan: covariates have no columns");
  for (double v : x_.data()) {
    if (!std::isfinite(v)) throw InvalidInput("scan: non-finite covariate");
  }
  if (!(t_n >= 0.0) || !std::isfinite(t_n)) throw InvalidTruncation("scan: invalid t_n");
  if (d > 1 && config_.max_edges_per_dim < 2) {
    throw InvalidInput("scan: max_edges_per_dim must be at least 2");
  }

  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::sort(order_.begin(), order_.end(),
            [this](std::size_t a, std::size_t b) { return rows_less(x_, a, b); });
  for (std::size_t p = 0; p < n; ++p) {
    if (p == 0 || !rows_equal(x_, order_[p - 1], order_[p])) run_first_.push_back(p);
  }
  run_first_.push_back(n);

  axes_.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    auto& axis = axes_[k];
    axis.values = x_.col(k);
    std::sort(axis.values.begin(), axis.values.end());
    axis.values.erase(std::unique(axis.values.begin(), axis.values.end()), axis.values.end());
    const std::size_t distinct = axis.values.size();
    const std::size_t g = (d == 1) ? distinct : std::min(distinct, config_.max_edges_per_dim);
    if (g < distinct) exact_ = false;
    axis.group_first.resize(g + 1);
    for (std::size_t q = 0; q <= g; ++q) axis.group_first[q] = q * distinct / g;
  }

  if (d == 1) {
    const std::size_t g = groups(0);
    first_upper_.assign(g, g);
    std::size_t b = 0;
    for (std::size_t a = 0; a < g; ++a) {
      b = std::max(b, a);
      while (b < g && !group_range_realizable(0, a, b)) ++b;
      first_upper_[a] = b;
      cell_count_ += g - b;
    }
  } else {
    cell_count_ = 1;
    for (std::size_t k = 0; k < d; ++k) {
      auto& axis = axes_[k];
      const std::size_t g = groups(k);
      for (std::size_t a = 0; a < g; ++a) {
        for (std::size_t b = a; b < g; ++b) {
          if (group_range_realizable(k, a, b)) axis.ranges.push_back({a, b});
        }
      }
      cell_count_ *= axis.ranges.size();
    }

    // Map each run of identical rows to its grid cell.
    std::vector<std::size_t> stride(d);
    std::size_t s = 1;
    for (std::size_t k = d; k-- > 0;) {
      stride[k] = s;
      s *= groups(k);
    }
    run_cell_.resize(run_first_.size() - 1);
    for (std::size_t r = 0; r + 1 < run_first_.size(); ++r) {
      const std::size_t i = order_[run_first_[r]];
      std::size_t flat = 0;
      for (std::size_t k = 0; k < d; ++k) {
        const auto& axis = axes_[k];
        const std::size_t vi = static_cast<std::size_t>(
            std::lower_bound(axis.values.begin(), axis.values.end(), x_(i, k)) -
            axis.values.begin());
        const std::size_t gi = static_cast<std::size_t>(
            std::upper_bound(axis.group_first.begin(), axis.group_first.end(), vi) -
            axis.group_first.begin() - 1);
        flat += gi * stride[k];
      }
      run_cell_[r] = flat;
    }
  }

  if (cell_count_ == 0) {
    throw InvalidTruncation("scan: no realizable cell; t_n is larger than the support");
  }
}

bool Scanner::group_range_realizable(std::size_t k, std::size_t a, std::size_t b) const {
  const auto& axis = axes_[k];
  const std::size_t first = axis.group_first[a];
  const std::size_t last = axis.group_first[b + 1] - 1;
  const std::size_t distinct = axis.values.size();
  const double lower = first > 0 ? axis.values[first - 1] : axis.values[first];
  const double upper = last + 1 < distinct ? axis.values[last + 1] : axis.values[last];
  return range_realizable(lower, upper, first == 0 && last + 1 == distinct, t_n_);
}

void Scanner::box_geometry(std::size_t k, IndexRange r, double& lower, double& side) const {
  const auto& axis = axes_[k];
  const std::size_t first = axis.group_first[r.first];
  const std::size_t last = axis.group_first[r.last + 1] - 1;
  const double lo = axis.values[first];
  const double hi = axis.values[last];
  const double width = hi - lo;
  if (width >= t_n_) {
    lower = lo;
    side = width;
    return;
  }
  // Stretch into the gaps on either side in proportion to their size.
  const double slack_lo = first > 0 ? lo - axis.values[first - 1] : 0.0;
  const double slack_hi = last + 1 < axis.values.size() ? axis.values[last + 1] - hi : 0.0;
  const double extra = t_n_ - width;
  const double total = slack_lo + slack_hi;
  lower = total > 0.0 ? lo - extra * slack_lo / total : lo;
  side = t_n_;
}

void Scanner::run_sums(const Matrix& moments, std::size_t j, std::vector<double>& sums,
                       std::vector<double>& sum_sqs) const {
  const std::size_t runs = run_first_.size() - 1;
  sums.assign(runs, 0.0);
  sum_sqs.assign(runs, 0.0);
  std::vector<std::size_t> tied;
  for (std::size_t r = 0; r < runs; ++r) {
    const std::size_t begin = run_first_[r];
    const std::size_t end = run_first_[r + 1];
    if (end - begin == 1) {
      const double v = moments(order_[begin], j);
      sums[r] = v;
      sum_sqs[r] = v * v;
      continue;
    }
    // Canonical summation order for tied covariates.
    tied.assign(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                order_.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(tied.begin(), tied.end(),
              [&](std::size_t a, std::size_t b) { return rows_less(moments, a, b); });
    double s = 0.0, q = 0.0;
    for (auto i : tied) {
      const double v = moments(i, j);
      s += v;
      q += v * v;
    }
    sums[r] = s;
    sum_sqs[r] = q;
  }
}

Cell Scanner::make_cell(const std::vector<IndexRange>& ranks) const {
  const std::size_t d = dimension();
  Cell cell;
  cell.ranks = ranks;
  cell.lower.resize(d);
  cell.side.resize(d);
  std::vector<double> lo(d), hi(d);
  for (std::size_t k = 0; k < d; ++k) {
    box_geometry(k, ranks[k], cell.lower[k], cell.side[k]);
    const auto& axis = axes_[k];
    lo[k] = axis.values[axis.group_first[ranks[k].first]];
    hi[k] = axis.values[axis.group_first[ranks[k].last + 1] - 1];
  }
  for (std::size_t i = 0; i < size(); ++i) {
    bool inside = true;
    for (std::size_t k = 0; k < d && inside; ++k) inside = x_(i, k) >= lo[k] && x_(i, k) <= hi[k];
    if (inside) cell.members.push_back(i);
  }
  return cell;
}

ScanResult Scanner::operator()(const Matrix& moments) const {
  check_moments(moments, size());
  return dimension() == 1 ? scan_1d(moments) : scan_grid(moments);
}

ScanResult Scanner::scan_1d(const Matrix& moments) const {
  const std::size_t dy = moments.cols();
  const std::size_t g = groups(0);
  const double n = static_cast<double>(size());

  ScanResult result;
  result.T.assign(dy, 0.0);
  result.argmin.resize(dy);

  std::vector<double> sums, sum_sqs;
  std::vector<double> prefix(g + 1), prefix_sq(g + 1);
  for (std::size_t j = 0; j < dy; ++j) {
    run_sums(moments, j, sums, sum_sqs);
    prefix[0] = prefix_sq[0] = 0.0;
    for (std::size_t r = 0; r < g; ++r) {
      prefix[r + 1] = prefix[r] + sums[r];
      prefix_sq[r + 1] = prefix_sq[r] + sum_sqs[r];
    }

    const double q_floor = rounding_resolution(1) * prefix_sq[g];
    const double s_floor = rounding_resolution(1) * std::sqrt(n * prefix_sq[g]);
    double best = 0.0;
    std::size_t best_a = 0, best_b = 0;
    bool found = false;
    std::size_t skipped = 0;
    for (std::size_t a = 0; a < g; ++a) {
      const double pa = prefix[a];
      const double qa = prefix_sq[a];
      for (std::size_t b = first_upper_[a]; b < g; ++b) {
        double s = prefix[b + 1] - pa;
        const double q = prefix_sq[b + 1] - qa;
        if (std::abs(s) <= s_floor) s = 0.0;
        const double nq = n * q;
        const double denom2 = nq - s * s;
        if (q <= q_floor || !(denom2 > kZeroVarianceTolerance * nq)) {
          ++skipped;
          continue;
        }
        if (s < 0.0) {
          const double stat = s / std::sqrt(denom2);
          if (stat < best) {
            best = stat;
            best_a = a;
            best_b = b;
            found = true;
          }
        }
      }
    }
    result.cells_skipped += skipped;
    result.cells_evaluated += cell_count_ - skipped;
    if (found) {
      result.T[j] = -best;
      result.argmin[j] = make_cell({IndexRange{best_a, best_b}});
    }
  }
  result.S = *std::max_element(result.T.begin(), result.T.end());
  return result;
}

ScanResult Scanner::scan_grid(const Matrix& moments) const {
  const std::size_t dy = moments.cols();
  const std::size_t d = dimension();
  const double n = static_cast<double>(size());

  // Summed-area tables over (G_k + 1) per axis, zero-padded at index 0.
  std::vector<std::size_t> grid_stride(d), table_stride(d);
  std::size_t grid_size = 1, table_size = 1;
  for (std::size_t k = d; k-- > 0;) {
    grid_stride[k] = grid_size;
    table_stride[k] = table_size;
    grid_size *= groups(k);
    table_size *= groups(k) + 1;
  }

  // Per axis, table offsets of each realizable range's lower/upper face.
  std::vector<std::vector<std::size_t>> lo_off(d), hi_off(d);
  for (std::size_t k = 0; k < d; ++k) {
    for (const auto& r : axes_[k].ranges) {
      lo_off[k].push_back(r.first * table_stride[k]);
      hi_off[k].push_back((r.last + 1) * table_stride[k]);
    }
  }

  ScanResult result;
  result.T.assign(dy, 0.0);
  result.argmin.resize(dy);

  // grid cell -> table position shifted by one on every axis
  const std::size_t runs = run_first_.size() - 1;
  std::vector<std::size_t> run_pos(runs);
  for (std::size_t r = 0; r < runs; ++r) {
    std::size_t flat = run_cell_[r], pos = 0;
    for (std::size_t k = 0; k < d; ++k) {
      pos += (flat / grid_stride[k] + 1) * table_stride[k];
      flat %= grid_stride[k];
    }
    run_pos[r] = pos;
  }
  auto accumulate = [&](std::vector<std::size_t>& t) {
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t extent = groups(k) + 1;
      for (std::size_t p = 0; p < table_size; ++p) {
        if ((p / table_stride[k]) % extent != 0) t[p] += t[p - table_stride[k]];
      }
    }
  };
  // Integer counts, so empty boxes are recognised exactly rather than through
  // whatever rounding residue the moment tables leave behind.
  std::vector<std::size_t> counts(table_size, 0);
  for (std::size_t r = 0; r < runs; ++r) counts[run_pos[r]] += run_first_[r + 1] - run_first_[r];
  accumulate(counts);

  std::vector<double> sums, sum_sqs;
  std::vector<double> table(table_size), table_sq(table_size);
  std::vector<std::size_t> idx(d);
  for (std::size_t j = 0; j < dy; ++j) {
    run_sums(moments, j, sums, sum_sqs);
    std::fill(table.begin(), table.end(), 0.0);
    std::fill(table_sq.begin(), table_sq.end(), 0.0);
    for (std::size_t r = 0; r < runs; ++r) {
      table[run_pos[r]] += sums[r];
      table_sq[run_pos[r]] += sum_sqs[r];
    }
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t extent = groups(k) + 1;
      for (std::size_t p = 0; p < table_size; ++p) {
        if ((p / table_stride[k]) % extent == 0) continue;
        table[p] += table[p - table_stride[k]];
        table_sq[p] += table_sq[p - table_stride[k]];
      }
    }

    const double q_floor = rounding_resolution(d) * table_sq.back();
    const double s_floor = rounding_resolution(d) * std::sqrt(n * table_sq.back());
    double best = 0.0;
    std::vector<std::size_t> best_idx;
    std::size_t skipped = 0;
    auto consider = [&](std::size_t count, double s, double q) -> bool {
      if (std::abs(s) <= s_floor) s = 0.0;
      const double nq = n * q;
      if (count == 0 || q <= q_floor) {
        ++skipped;
        return false;
      }
      const double denom2 = nq - s * s;
      if (!(denom2 > kZeroVarianceTolerance * nq)) {
        ++skipped;
        return false;
      }
      if (s < 0.0) {
        const double stat = s / std::sqrt(denom2);
        if (stat < best) {
          best = stat;
          return true;
        }
      }
      return false;
    };

    if (d == 2) {
      const auto& l0 = lo_off[0];
      const auto& h0 = hi_off[0];
      const auto& l1 = lo_off[1];
      const auto& h1 = hi_off[1];
      for (std::size_t r0 = 0; r0 < l0.size(); ++r0) {
        for (std::size_t r1 = 0; r1 < l1.size(); ++r1) {
          const double s = table[h0[r0] + h1[r1]] - table[l0[r0] + h1[r1]] -
                           table[h0[r0] + l1[r1]] + table[l0[r0] + l1[r1]];
          const double q = table_sq[h0[r0] + h1[r1]] - table_sq[l0[r0] + h1[r1]] -
                           table_sq[h0[r0] + l1[r1]] + table_sq[l0[r0] + l1[r1]];
          const std::size_t c = counts[h0[r0] + h1[r1]] - counts[l0[r0] + h1[r1]] -
                                counts[h0[r0] + l1[r1]] + counts[l0[r0] + l1[r1]];
          if (consider(c, s, q)) best_idx = {r0, r1};
        }
      }
    } else {
      // Odometer over the per-axis range lists, last axis fastest.
      const std::size_t corners = std::size_t{1} << d;
      std::fill(idx.begin(), idx.end(), 0);
      while (true) {
        double s = 0.0, q = 0.0;
        std::ptrdiff_t count = 0;
        for (std::size_t c = 0; c < corners; ++c) {
          std::size_t pos = 0;
          int lows = 0;
          for (std::size_t k = 0; k < d; ++k) {
            if (c >> k & 1U) {
              pos += hi_off[k][idx[k]];
            } else {
              pos += lo_off[k][idx[k]];
              ++lows;
            }
          }
          const double sign = (lows % 2 == 0) ? 1.0 : -1.0;
          s += sign * table[pos];
          q += sign * table_sq[pos];
          count += (lows % 2 == 0 ? 1 : -1) * static_cast<std::ptrdiff_t>(counts[pos]);
        }
        if (consider(static_cast<std::size_t>(count), s, q)) best_idx = idx;
        std::size_t k = d;
        while (k-- > 0) {
          if (++idx[k] < lo_off[k].size()) break;
          idx[k] = 0;
        }
        if (k == static_cast<std::size_t>(-1)) break;
      }
    }

    result.cells_skipped += skipped;
    result.cells_evaluated += cell_count_ - skipped;
    if (!best_idx.empty()) {
      result.T[j] = -best;
      std::vector<IndexRange> ranks(d);
      for (std::size_t k = 0; k < d; ++k) ranks[k] = axes_[k].ranges[best_idx[k]];
      result.argmin[j] = make_cell(ranks);
    }
  }
  result.S = *std::max_element(result.T.begin(), result.T.end());
  return result;
}

ScanResult scan_statistic(const Matrix& x, const Matrix& moments, double t_n,
                          const ScanConfig& config) {
  return Scanner(x, t_n, config)(moments);
}

ScanResult scan_statistic_grid(const Matrix& x, const Matrix& moments, double t_n,
                               std::size_t max_edges_per_dim) {
  if (x.cols() < 2) throw InvalidInput("scan_statistic_grid: needs d_X >= 2");
  return Scanner(x, t_n, ScanConfig{max_edges_per_dim})(moments);
}

}  // namespace mscan
