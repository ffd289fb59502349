#include "mscan/montecarlo.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mscan/critval.hpp"
#include "mscan/errors.hpp"
#include "mscan/models.hpp"
#include "mscan/rng.hpp"
#include "mscan/scan.hpp"
#include "parallel.hpp"

namespace mscan {

namespace {

constexpr std::uint64_t kDataStream = 0x44415441ULL;  // "DATA"

Engine data_engine(std::uint64_t seed, const DesignSpec& design, std::size_t n,
                   const TruncationRule& rule, std::size_t rep) {
  return make_engine({seed, kDataStream, static_cast<std::uint64_t>(design.id), n,
                      rule_key(rule), rep});
}

void check_common(const std::vector<std::size_t>& sizes, std::size_t replications) {
  if (sizes.empty()) throw InvalidInput("Monte Carlo table needs at least one sample size");
  for (auto n : sizes) {
    if (n < 2) throw InvalidInput("Monte Carlo sample sizes must be at least 2");
  }
  if (replications == 0) throw InvalidInput("Monte Carlo replications must be at least 1");
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<TruncationRule> default_table_rules() {
  return {TruncationRule::power(1.0 / 5.0), TruncationRule::power(1.0 / 3.0),
          TruncationRule::power(1.0 / 2.0)};
}

double McTable::at(const TruncationRule& rule, double key, std::size_t n) const {
  std::size_t col = sample_sizes.size();
  for (std::size_t c = 0; c < sample_sizes.size(); ++c) {
    if (sample_sizes[c] == n) col = c;
  }
  for (const auto& row : rows) {
    if (row.rule == rule && std::abs(row.key - key) < 1e-12 && col < sample_sizes.size()) {
      return row.rejection[col];
    }
  }
  throw InvalidInput("McTable::at: no cell (" + rule.label() + ", " + format_number(key) +
                     ", n=" + std::to_string(n) + ")");
}

std::string McTable::to_csv() const {
  std::ostringstream os;
  os << "# table: " << (kind == Kind::size ? "size" : "power") << '\n';
  os << "# design: " << design << '\n';
  if (kind == Kind::power) {
    os << "# alpha: " << format_number(alpha) << '\n';
    os << "# lf_replications: " << lf_replications << '\n';
  }
  os << "# replications: " << replications << '\n';
  os << "# seed: " << seed << '\n';
  os << (kind == Kind::size ? "alpha,tn" : "tn,offset");
  for (auto n : sample_sizes) os << ",n=" << n;
  os << '\n';
  char buf[32];
  for (const auto& row : rows) {
    if (kind == Kind::size) {
      os << format_number(row.key) << ',' << row.rule.label();
    } else {
      os << row.rule.label() << ',' << format_number(row.key);
    }
    for (double v : row.rejection) {
      std::snprintf(buf, sizeof buf, ",%.4f", v);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

std::vector<double> size_cell(const DesignSpec& design, std::size_t n, const TruncationRule& rule,
                              const std::vector<double>& alphas, std::size_t replications,
                              std::uint64_t seed) {
  check_common({n}, replications);
  const Theta theta{{design.boundary_theta1(), 0.0}};
  std::vector<char> rejected(replications * alphas.size(), 0);
  detail::parallel_for(replications, [&](std::size_t r) {
    Engine rng = data_engine(seed, design, n, rule, r);
    const Dataset data = simulate_design(design, n, rng);
    const double t_n = truncation(rule, n, data.x);
    const double volume = build_hull(data.x).volume;
    const double s = scan_statistic(data.x, missing_data_moment(data, theta).values, t_n).S;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const auto cv = analytic_critical_value(n, 1, 1, volume, t_n, alphas[a]);
      rejected[r * alphas.size() + a] = cv.rejects(s, n) ? 1 : 0;
    }
  });

  std::vector<double> out(alphas.size(), 0.0);
  for (std::size_t r = 0; r < replications; ++r) {
    for (std::size_t a = 0; a < alphas.size(); ++a) out[a] += rejected[r * alphas.size() + a];
  }
  for (auto& v : out) v /= static_cast<double>(replications);
  return out;
}

std::vector<double> power_cell(const DesignSpec& design, std::size_t n, const TruncationRule& rule,
                               const std::vector<double>& offsets, double alpha,
                               std::size_t replications, std::size_t lf_replications,
                               std::uint64_t seed) {
  check_common({n}, replications);
  const auto cv = least_favorable_critical_value(design, n, rule, alpha, lf_replications, seed);
  const double boundary = design.boundary_theta1();

  std::vector<char> rejected(replications * offsets.size(), 0);
  detail::parallel_for(replications, [&](std::size_t r) {
    Engine rng = data_engine(seed, design, n, rule, r);
    const Dataset data = simulate_design(design, n, rng);
    const Scanner scanner(data.x, truncation(rule, n, data.x));
    for (std::size_t o = 0; o < offsets.size(); ++o) {
      const Theta theta{{boundary + offsets[o], 0.0}};
      const double s = scanner(missing_data_moment(data, theta).values).S;
      rejected[r * offsets.size() + o] = cv.rejects(s, n) ? 1 : 0;
    }
  });

  std::vector<double> out(offsets.size(), 0.0);
  for (std::size_t r = 0; r < replications; ++r) {
    for (std::size_t o = 0; o < offsets.size(); ++o) out[o] += rejected[r * offsets.size() + o];
  }
  for (auto& v : out) v /= static_cast<double>(replications);
  return out;
}

McTable size_table(const SizeTableConfig& config) {
  check_common(config.sample_sizes, config.replications);
  McTable table;
  table.kind = McTable::Kind::size;
  table.design = config.design.id;
  table.sample_sizes = config.sample_sizes;
  table.replications = config.replications;
  table.seed = config.seed;
  for (double alpha : config.alphas) {
    for (const auto& rule : config.rules) table.rows.push_back({rule, alpha, {}});
  }
  for (std::size_t ri = 0; ri < config.rules.size(); ++ri) {
    for (std::size_t c = 0; c < config.sample_sizes.size(); ++c) {
      const auto cell = size_cell(config.design, config.sample_sizes[c], config.rules[ri],
                                  config.alphas, config.replications, config.seed);
      for (std::size_t a = 0; a < config.alphas.size(); ++a) {
        auto& row = table.rows[a * config.rules.size() + ri];
        row.rejection.resize(config.sample_sizes.size());
        row.rejection[c] = cell[a];
      }
    }
  }
  return table;
}

McTable power_table(const PowerTableConfig& config) {
  check_common(config.sample_sizes, config.replications);
  McTable table;
  table.kind = McTable::Kind::power;
  table.design = config.design.id;
  table.sample_sizes = config.sample_sizes;
  table.replications = config.replications;
  table.lf_replications = config.lf_replications;
  table.alpha = config.alpha;
  table.seed = config.seed;
  for (const auto& rule : config.rules) {
    for (double offset : config.offsets) table.rows.push_back({rule, offset, {}});
  }
  for (std::size_t ri = 0; ri < config.rules.size(); ++ri) {
    for (std::size_t c = 0; c < config.sample_sizes.size(); ++c) {
      const auto cell = power_cell(config.design, config.sample_sizes[c], config.rules[ri],
                                   config.offsets, config.alpha, config.replications,
                                   config.lf_replications, config.seed);
      for (std::size_t o = 0; o < config.offsets.size(); ++o) {
        auto& row = table.rows[ri * config.offsets.size() + o];
        row.rejection.resize(config.sample_sizes.size());
        row.rejection[c] = cell[o];
      }
    }
  }
  return table;
}

}  // namespace mscan
