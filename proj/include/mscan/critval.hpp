#pragma once

// Critical values for the scan test.
//
//  analytic         Gumbel limit: reject when S_n > [log d_Y - log(-log(1-α)) + b(ĉ)] / a(ĉ)
//  refined          largest root of the tail approximation, on the √n·S_n scale
//  simulated        1-α quantile of S* under Gaussian multipliers Y* ~ N(0, M(X_i))
//  least_favorable  1-α quantile of S_n simulated from the least favorable design

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mscan/designs.hpp"
#include "mscan/geometry.hpp"
#include "mscan/matrix.hpp"
#include "mscan/scan.hpp"

namespace mscan {

enum class CritvalMethod { analytic, refined, simulated, least_favorable };

std::string to_string(CritvalMethod method);

inline constexpr std::size_t kDefaultReplications = 999;

struct SimulationInfo {
  std::size_t replications = 0;
  std::uint64_t seed = 0;
};

struct CriticalValue {
  double level = 0.05;
  CritvalMethod method = CritvalMethod::analytic;
  // On the S_n scale, except for `refined` where it is on the √n·S_n scale.
  double threshold = 0.0;
  std::optional<SimulationInfo> simulation;

  bool root_n_scale() const noexcept { return method == CritvalMethod::refined; }
  // Threshold expressed on the S_n scale.
  double statistic_threshold(std::size_t n) const;
  bool rejects(double s_n, std::size_t n) const;
};

// ĉ_n = vol / t_n^{d_X}, a = (2 n log ĉ_n)^{1/2},
// b = 2 log ĉ_n + (2 d_X - 1/2) log log ĉ_n - log(2√π).
struct GumbelConstants {
  double c_hat = 0.0;
  double a = 0.0;
  double b = 0.0;
};

// Throws TruncationTooCoarse unless ĉ_n > 1.
GumbelConstants gumbel_constants(std::size_t n, std::size_t d_x, double volume, double t_n);

CriticalValue analytic_critical_value(std::size_t n, std::size_t d_x, std::size_t d_y,
                                      double volume, double t_n, double alpha);

// d_Y ĉ_n e^{-q²/2} q^{4 d_X - 1} π^{-1/2} 2^{-2 d_X - 1/2}: the exponent of the
// tail approximation P(√n S_n <= q) ≈ exp(-tail).
double refined_tail_mass(double q, std::size_t d_x, std::size_t d_y, double volume, double t_n);

// exp(-refined_tail_mass(...))
double refined_cdf(double q, std::size_t d_x, std::size_t d_y, double volume, double t_n);

// Largest q with refined_cdf(q) = 1 - α, searched from the mode sqrt(4 d_X - 1)
// upward. Throws RefinedUnavailable when the tail mass at the mode is already
// below -log(1 - α), i.e. no such q exists.
CriticalValue refined_critical_value(std::size_t n, std::size_t d_x, std::size_t d_y,
                                     double volume, double t_n, double alpha);

// Covariance of the simulated outcome at a covariate point (d_Y x d_Y).
using CovarianceFn = std::function<Matrix(std::span<const double> x)>;

CovarianceFn identity_covariance(std::size_t d_y);

// ⌈B(1-α)⌉-th smallest draw.
double upper_quantile(std::vector<double> draws, double alpha);

// B draws of S* with Y*_i ~ N(0, cov(X_i)); an empty cov means the identity.
// Replication b uses a stream derived from (seed, b). Throws InvalidCovariance
// if cov(X_i) is not symmetric positive definite.
std::vector<double> simulate_multiplier_statistics(const Matrix& x, std::size_t d_y, double t_n,
                                                   std::size_t replications, std::uint64_t seed,
                                                   const CovarianceFn& cov = {},
                                                   const ScanConfig& config = {});

CriticalValue simulated_critical_value(const Matrix& x, std::size_t d_y, double t_n, double alpha,
                                       std::size_t replications, std::uint64_t seed,
                                       const CovarianceFn& cov = {},
                                       const ScanConfig& config = {});

// The least favorable null (conditional moment identically zero) shared by
// all built-in designs: Design 1 evaluated at θ = (θ̄1, 0).
DesignSpec least_favorable_design(const DesignSpec& design);

// B draws of S_n from the least favorable design with sample size n; t_n is
// recomputed from `rule` on each simulated sample.
std::vector<double> simulate_least_favorable_statistics(const DesignSpec& design, std::size_t n,
                                                        const TruncationRule& rule,
                                                        std::size_t replications,
                                                        std::uint64_t seed);

CriticalValue least_favorable_critical_value(const DesignSpec& design, std::size_t n,
                                             const TruncationRule& rule, double alpha,
                                             std::size_t replications, std::uint64_t seed);

// Stable 64-bit key of a truncation rule, used to derive RNG streams.
std::uint64_t rule_key(const TruncationRule& rule);

}  // namespace mscan
