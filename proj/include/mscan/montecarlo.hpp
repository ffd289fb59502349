#pragma once

// Size and power tables for the missing-data median regression designs.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mscan/designs.hpp"
#include "mscan/geometry.hpp"

namespace mscan {

std::vector<TruncationRule> default_table_rules();  // n^-1/5, n^-1/3, n^-1/2

struct McTable {
  enum class Kind { size, power };

  struct Row {
    TruncationRule rule;
    double key = 0.0;  // nominal level (size) or offset θ1 - θ̄1 (power)
    std::vector<double> rejection;  // one per sample size
  };

  Kind kind = Kind::size;
  int design = 1;
  std::vector<std::size_t> sample_sizes;
  std::vector<Row> rows;
  std::size_t replications = 0;
  std::size_t lf_replications = 0;  // power tables only
  double alpha = 0.05;              // power tables only
  std::uint64_t seed = 0;

  // Throws InvalidInput if the cell is not in the table.
  double at(const TruncationRule& rule, double key, std::size_t n) const;

  // '#'-prefixed metadata lines, then the usual grid:
  // size:  alpha,tn,n=...    power: tn,offset,n=...
  std::string to_csv() const;
};

struct SizeTableConfig {
  DesignSpec design = DesignSpec::design(1);
  std::vector<std::size_t> sample_sizes{100, 500, 1000};
  std::vector<TruncationRule> rules = default_table_rules();
  std::vector<double> alphas{0.1, 0.05};
  std::size_t replications = 2000;
  std::uint64_t seed = 1;
};

struct PowerTableConfig {
  DesignSpec design = DesignSpec::design(1);
  std::vector<std::size_t> sample_sizes{100, 500, 1000};
  std::vector<TruncationRule> rules = default_table_rules();
  std::vector<double> offsets{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  double alpha = 0.05;
  std::size_t replications = 2000;
  std::size_t lf_replications = 2000;
  std::uint64_t seed = 1;
};

// Rejection frequency of the analytic-critical-value test at θ = (θ̄1, 0),
// one entry per alpha. All alphas share the same simulated samples.
std::vector<double> size_cell(const DesignSpec& design, std::size_t n, const TruncationRule& rule,
                              const std::vector<double>& alphas, std::size_t replications,
                              std::uint64_t seed);

// Rejection frequency at θ = (θ̄1 + a, 0) against the least favorable
// critical value, one entry per offset a. Offsets share simulated samples.
std::vector<double> power_cell(const DesignSpec& design, std::size_t n, const TruncationRule& rule,
                               const std::vector<double>& offsets, double alpha,
                               std::size_t replications, std::size_t lf_replications,
                               std::uint64_t seed);

McTable size_table(const SizeTableConfig& config);
McTable power_table(const PowerTableConfig& config);

}  // namespace mscan
