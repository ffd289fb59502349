#include "mscan/critval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "mscan/errors.hpp"
#include "mscan/rng.hpp"
#include "parallel.hpp"

namespace mscan {

namespace {

constexpr std::uint64_t kMultiplierStream = 0x4d554c54ULL;  // "MULT"
constexpr std::uint64_t kLeastFavorableStream = 0x4c46ULL;  // "LF"
constexpr int kMaxBisections = 200;
constexpr double kRootTolerance = 1e-12;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
}

void check_replications(std::size_t replications) {
  if (replications == 0) throw InvalidInput("number of replications must be at least 1");
}

// Lower-triangular Cholesky factor, or nothing if not positive definite.
std::optional<Matrix> cholesky(const Matrix& m) {
  const std::size_t d = m.rows();
  Matrix l(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (!(s > 0.0)) return std::nullopt;
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

}  // namespace

std::string to_string(CritvalMethod method) {
  switch (method) {
    case CritvalMethod::analytic:
      return "analytic";
    case CritvalMethod::refined:
      return "refined";
    case CritvalMethod::simulated:
      return "simulated";
    case CritvalMethod::least_favorable:
      return "least_favorable";
  }
  return {};
}

double CriticalValue::statistic_threshold(std::size_t n) const {
  return root_n_scale() ? threshold / std::sqrt(static_cast<double>(n)) : threshold;
}

bool CriticalValue::rejects(double s_n, std::size_t n) const {
  return root_n_scale() ? std::sqrt(static_cast<double>(n)) * s_n > threshold : s_n > threshold;
}

GumbelConstants gumbel_constants(std::size_t n, std::size_t d_x, double volume, double t_n) {
  if (n < 2) throw InvalidInput("gumbel_constants: need n >= 2");
  if (d_x == 0) throw InvalidInput("gumbel_constants: d_X must be positive");
  if (!(t_n > 0.0)) throw InvalidTruncation("gumbel_constants: t_n must be positive");
  GumbelConstants g;
  g.c_hat = volume / std::pow(t_n, static_cast<double>(d_x));
  if (!(g.c_hat > 1.0) || !std::isfinite(g.c_hat)) {
    throw TruncationTooCoarse("vol / t_n^d_X = " + std::to_string(g.c_hat) +
                              " must exceed 1; decrease t_n");
  }
  const double log_c = std::log(g.c_hat);
  g.a = std::sqrt(2.0 * static_cast<double>(n) * log_c);
  g.b = 2.0 * log_c + (2.0 * static_cast<double>(d_x) - 0.5) * std::log(log_c) -
        std::log(2.0 * std::sqrt(std::numbers::pi));
  return g;
}

CriticalValue analytic_critical_value(std::size_t n, std::size_t d_x, std::size_t d_y,
                                      double volume, double t_n, double alpha) {
  check_alpha(alpha);
  if (d_y == 0) throw InvalidInput("d_Y must be positive");
  const auto g = gumbel_constants(n, d_x, volume, t_n);
  const double r = std::log(static_cast<double>(d_y)) - std::log(-std::log1p(-alpha));
  return {alpha, CritvalMethod::analytic, (r + g.b) / g.a, std::nullopt};
}

double refined_tail_mass(double q, std::size_t d_x, std::size_t d_y, double volume, double t_n) {
  const double d = static_cast<double>(d_x);
  const double c_hat = volume / std::pow(t_n, d);
  // log-space to stay finite for large q
  const double log_mass = std::log(static_cast<double>(d_y) * c_hat) - 0.5 * q * q +
                          (4.0 * d - 1.0) * std::log(q) - 0.5 * std::log(std::numbers::pi) -
                          (2.0 * d + 0.5) * std::numbers::ln2;
  return std::exp(log_mass);
}

double refined_cdf(double q, std::size_t d_x, std::size_t d_y, double volume, double t_n) {
  return std::exp(-refined_tail_mass(q, d_x, d_y, volume, t_n));
}

CriticalValue refined_critical_value(std::size_t n, std::size_t d_x, std::size_t d_y,
                                     double volume, double t_n, double alpha) {
  check_alpha(alpha);
  if (n < 2) throw InvalidInput("refined critical value: need n >= 2");
  if (d_x == 0 || d_y == 0) throw InvalidInput("refined critical value: d_X, d_Y must be positive");
  if (!(t_n > 0.0) || !(volume > 0.0)) {
    throw InvalidTruncation("refined critical value: need t_n > 0 and positive volume");
  }

  const double target = -std::log1p(-alpha);
  const double level = 1.0 - alpha;
  auto tail = [&](double q) { return refined_tail_mass(q, d_x, d_y, volume, t_n); };

  const double mode = std::sqrt(4.0 * static_cast<double>(d_x) - 1.0);
  if (tail(mode) < target) {
    throw RefinedUnavailable(
        "refined critical value: tail approximation never reaches 1 - alpha; use the analytic "
        "critical value");
  }

  double lo = mode;
  double width = 1.0;
  while (tail(mode + width) > target) width *= 2.0;
  double hi = mode + width;

  double q = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxBisections; ++it) {
    q = 0.5 * (lo + hi);
    const double residual = std::exp(-tail(q)) - level;
    if (std::abs(residual) <= kRootTolerance || hi - lo <= 0.0) break;
    // beyond the mode the tail mass decreases, so the CDF increases in q
    if (residual < 0.0) {
      lo = q;
    } else {
      hi = q;
    }
  }
  return {alpha, CritvalMethod::refined, q, std::nullopt};
}

CovarianceFn identity_covariance(std::size_t d_y) {
  return [d_y](std::span<const double>) {
    Matrix m(d_y, d_y);
    for (std::size_t k = 0; k < d_y; ++k) m(k, k) = 1.0;
    return m;
  };
}

double upper_quantile(std::vector<double> draws, double alpha) {
  check_alpha(alpha);
  if (draws.empty()) throw InvalidInput("upper_quantile: no draws");
  const double b = static_cast<double>(draws.size());
  // small slack so that e.g. 2000 * 0.95 is not rounded up to 1901
  auto rank = static_cast<std::size_t>(std::ceil(b * (1.0 - alpha) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, draws.size());
  std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   draws.end());
  return draws[rank - 1];
}

std::vector<double> simulate_multiplier_statistics(const Matrix& x, std::size_t d_y, double t_n,
                                                   std::size_t replications, std::uint64_t seed,
                                                   const CovarianceFn& cov,
                                                   const ScanConfig& config) {
  check_replications(replications);
  if (d_y == 0) throw InvalidInput("d_Y must be positive");
  const std::size_t n = x.rows();

  // Cholesky factors per observation; none needed for the identity.
  std::vector<Matrix> factors;
  if (cov) {
    factors.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Matrix m = cov(x.row(i));
      if (m.rows() != d_y || m.cols() != d_y) {
        throw InvalidCovariance("covariance at row " + std::to_string(i) + " is not d_Y x d_Y");
      }
      for (std::size_t a = 0; a < d_y; ++a) {
        for (std::size_t b = 0; b < a; ++b) {
          if (std::abs(m(a, b) - m(b, a)) > 1e-12 * (std::abs(m(a, b)) + std::abs(m(b, a)))) {
            throw InvalidCovariance("covariance at row " + std::to_string(i) +
                                    " is not symmetric");
          }
        }
      }
      auto l = cholesky(m);
      if (!l) {
        throw InvalidCovariance("covariance at row " + std::to_string(i) +
                                " is not positive definite");
      }
      factors.push_back(std::move(*l));
    }
  }

  const Scanner scanner(x, t_n, config);
  std::vector<double> draws(replications);
  detail::parallel_for(replications, [&](std::size_t b) {
    Engine rng = make_engine({seed, kMultiplierStream, b});
    std::normal_distribution<double> normal;
    Matrix y(n, d_y);
    std::vector<double> z(d_y);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : z) v = normal(rng);
      if (factors.empty()) {
        for (std::size_t k = 0; k < d_y; ++k) y(i, k) = z[k];
      } else {
        const Matrix& l = factors[i];
        for (std::size_t k = 0; k < d_y; ++k) {
          double v = 0.0;
          for (std::size_t m = 0; m <= k; ++m) v += l(k, m) * z[m];
          y(i, k) = v;
        }
      }
    }
    draws[b] = scanner(y).S;
  });
  return draws;
}

CriticalValue simulated_critical_value(const Matrix& x, std::size_t d_y, double t_n, double alpha,
                                       std::size_t replications, std::uint64_t seed,
                                       const CovarianceFn& cov, const ScanConfig& config) {
  check_alpha(alpha);
  auto draws = simulate_multiplier_statistics(x, d_y, t_n, replications, seed, cov, config);
  return {alpha, CritvalMethod::simulated, upper_quantile(std::move(draws), alpha),
          SimulationInfo{replications, seed}};
}

DesignSpec least_favorable_design(const DesignSpec& design) {
  DesignSpec lf = DesignSpec::design(1);
  lf.theta1_star = design.theta1_star;
  lf.theta2_star = design.theta2_star;
  return lf;
}

std::uint64_t rule_key(const TruncationRule& rule) {
  return derive_seed({static_cast<std::uint64_t>(rule.kind), std::bit_cast<std::uint64_t>(rule.value)});
}

std::vector<double> simulate_least_favorable_statistics(const DesignSpec& design, std::size_t n,
                                                        const TruncationRule& rule,
                                                        std::size_t replications,
                                                        std::uint64_t seed) {
  check_replications(replications);
  if (n < 2) throw InvalidInput("least favorable simulation: need n >= 2");
  const DesignSpec lf = least_favorable_design(design);
  const Theta theta{{lf.boundary_theta1(), 0.0}};
  const std::uint64_t key = rule_key(rule);

  std::vector<double> draws(replications);
  detail::parallel_for(replications, [&](std::size_t b) {
    Engine rng = make_engine({seed, kLeastFavorableStream, n, key, b});
    const Dataset data = simulate_design(lf, n, rng);
    const double t_n = truncation(rule, n, data.x);
    draws[b] = scan_statistic(data.x, missing_data_moment(data, theta).values, t_n).S;
  });
  return draws;
}

CriticalValue least_favorable_critical_value(const DesignSpec& design, std::size_t n,
                                             const TruncationRule& rule, double alpha,
                                             std::size_t replications, std::uint64_t seed) {
  check_alpha(alpha);
  auto draws = simulate_least_favorable_statistics(design, n, rule, replications, seed);
  return {alpha, CritvalMethod::least_favorable, upper_quantile(std::move(draws), alpha),
          SimulationInfo{replications, seed}};
}

}  // namespace mscan
