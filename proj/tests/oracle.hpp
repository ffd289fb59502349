#pragma once

// Test-only reference implementations, written without reusing library code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "mscan/matrix.hpp"

namespace oracle {

using Range = std::pair<std::size_t, std::size_t>;  // distinct-value indices, inclusive

struct NaiveScan {
  std::vector<double> T;
  double S = 0.0;
  std::vector<std::optional<std::vector<Range>>> argmin;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

inline std::vector<double> distinct_values(const mscan::Matrix& x, std::size_t k) {
  std::set<double> s;
  for (std::size_t i = 0; i < x.rows(); ++i) s.insert(x(i, k));
  return {s.begin(), s.end()};
}

// Member ranges of closed intervals [s, e] with e - s >= t inside [min, max].
// Endpoints just inside each gap are tried explicitly, which realizes every
// selectable set when the interval is pushed as wide as its neighbours allow.
inline std::set<Range> axis_ranges(const std::vector<double>& v, double t) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < v.size(); ++i) gap = std::min(gap, v[i] - v[i - 1]);
  const double eps = std::isfinite(gap) ? gap * 1e-6 : 1e-9;
  std::vector<double> starts{v.front()}, ends{v.back()};
  for (std::size_t i = 0; i + 1 < v.size(); ++i) starts.push_back(v[i] + eps);
  for (std::size_t i = 1; i < v.size(); ++i) ends.push_back(v[i] - eps);

  std::set<Range> out;
  for (double s : starts) {
    for (double e : ends) {
      if (e < s || e - s < t) continue;
      std::size_t a = v.size(), b = 0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] >= s && v[i] <= e) {
          a = std::min(a, i);
          b = std::max(b, i);
        }
      }
      if (a <= b) out.insert({a, b});
    }
  }
  return out;
}

// Recomputes every cell from scratch.
inline NaiveScan naive_scan(const mscan::Matrix& x, const mscan::Matrix& m, double t) {
  const std::size_t n = x.rows(), d = x.cols(), dy = m.cols();
  std::vector<std::vector<double>> values(d);
  std::vector<std::vector<Range>> ranges(d);
  for (std::size_t k = 0; k < d; ++k) {
    values[k] = distinct_values(x, k);
    const auto r = axis_ranges(values[k], t);
    ranges[k].assign(r.begin(), r.end());
  }

  NaiveScan out;
  out.T.assign(dy, 0.0);
  out.argmin.resize(dy);
  std::vector<double> best(dy, 0.0);

  std::vector<std::size_t> idx(d, 0);
  for (const auto& r : ranges) {
    if (r.empty()) return out;
  }
  while (true) {
    std::vector<Range> box(d);
    for (std::size_t k = 0; k < d; ++k) box[k] = ranges[k][idx[k]];
    for (std::size_t j = 0; j < dy; ++j) {
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        bool in = true;
        for (std::size_t k = 0; k < d; ++k) {
          in = in && x(i, k) >= values[k][box[k].first] && x(i, k) <= values[k][box[k].second];
        }
        if (!in) continue;
        sum += m(i, j);
        sum_sq += m(i, j) * m(i, j);
      }
      const double var = static_cast<double>(n) * sum_sq - sum * sum;
      if (var <= 1e-10 * static_cast<double>(n) * sum_sq) {
        ++out.skipped;
        continue;
      }
      ++out.evaluated;
      const double stat = sum / std::sqrt(var);
      if (stat < best[j]) {
        best[j] = stat;
        out.argmin[j] = box;
      }
    }
    std::size_t k = d;
    while (k-- > 0) {
      if (++idx[k] < ranges[k].size()) break;
      idx[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  for (std::size_t j = 0; j < dy; ++j) out.T[j] = -best[j];
  out.S = *std::max_element(out.T.begin(), out.T.end());
  if (out.S == 0.0) out.S = 0.0;  // normalise -0
  for (auto& v : out.T) {
    if (v == 0.0) v = 0.0;
  }
  return out;
}

// Random instance with dyadic moments (k/8), so every partial sum is exact.
struct Instance {
  mscan::Matrix x;
  mscan::Matrix m;
  double t = 0.0;
};

inline Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t d,
                                std::size_t dy, bool ties) {
  Instance in;
  in.x = mscan::Matrix(n, d);
  in.m = mscan::Matrix(n, dy);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> grid(0, 7);
  std::uniform_int_distribution<int> k(-16, 16);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) in.x(i, c) = ties ? grid(rng) / 8.0 : unit(rng);
    for (std::size_t j = 0; j < dy; ++j) in.m(i, j) = k(rng) / 8.0;
  }
  // Sometimes push the whole sample to one sign so that skips and T = 0 occur.
  const int mode = std::uniform_int_distribution<int>(0, 5)(rng);
  if (mode == 0) {
    for (auto& v : in.m.data()) v = std::abs(v);
  } else if (mode == 1) {
    for (auto& v : in.m.data()) v = v < 0 ? -0.5 : 0.5;
  }
  double range = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < d; ++c) {
    const auto v = distinct_values(in.x, c);
    range = std::min(range, v.back() - v.front());
  }
  in.t = unit(rng) * range;
  if (ties && std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
    // land exactly on a multiple of the lattice spacing
    in.t = std::floor(in.t * 8.0) / 8.0;
  }
  return in;
}

}  // namespace oracle
