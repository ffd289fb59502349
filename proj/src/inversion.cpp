#include "mscan/inversion.hpp"

#include <algorithm>
#include <sstream>

#include "mscan/errors.hpp"
#include "parallel.hpp"

namespace mscan {

double GridAxis::value(std::size_t k) const {
  if (steps <= 1) return min;
  return min + (max - min) * static_cast<double>(k) / static_cast<double>(steps - 1);
}

ThetaGrid::ThetaGrid(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw InvalidGrid("theta grid needs at least one axis");
  size_ = 1;
  for (const auto& a : axes_) {
    if (a.steps == 0) throw InvalidGrid("theta grid axis has zero steps");
    if (!(a.min <= a.max)) throw InvalidGrid("theta grid axis has min > max");
    size_ *= a.steps;
  }
}

Theta ThetaGrid::point(std::size_t index) const {
  Theta theta;
  theta.values.resize(axes_.size());
  for (std::size_t k = axes_.size(); k-- > 0;) {
    theta.values[k] = axes_[k].value(index % axes_[k].steps);
    index /= axes_[k].steps;
  }
  return theta;
}

std::size_t ConfidenceRegion::accepted_count() const {
  return static_cast<std::size_t>(std::count(accepted.begin(), accepted.end(), true));
}

std::vector<Interval> project(const ThetaGrid& grid, const std::vector<bool>& accepted) {
  std::vector<Interval> out;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (!accepted[p]) continue;
    const Theta theta = grid.point(p);
    if (out.empty()) {
      for (double v : theta.values) out.push_back({v, v});
      continue;
    }
    for (std::size_t k = 0; k < theta.size(); ++k) {
      out[k].lower = std::min(out[k].lower, theta[k]);
      out[k].upper = std::max(out[k].upper, theta[k]);
    }
  }
  return out;
}

CriticalValue dataset_critical_value(const Dataset& data, ModelKind model, double t_n,
                                     const CritvalSpec& spec, double alpha, std::uint64_t seed,
                                     const TruncationRule& rule, const ScanConfig& config) {
  const std::size_t n = data.size();
  const std::size_t d_x = data.dimension();
  const std::size_t d_y = moment_count(model);
  switch (spec.method) {
    case CritvalMethod::analytic:
      return analytic_critical_value(n, d_x, d_y, build_hull(data.x).volume, t_n, alpha);
    case CritvalMethod::refined:
      return refined_critical_value(n, d_x, d_y, build_hull(data.x).volume, t_n, alpha);
    case CritvalMethod::simulated:
      return simulated_critical_value(data.x, d_y, t_n, alpha, spec.replications, seed,
                                      spec.covariance, config);
    case CritvalMethod::least_favorable:
      if (model != ModelKind::missing || d_x != 1) {
        throw InvalidInput(
            "least favorable critical values are simulated from the one-covariate missing-data "
            "design; use --model missing with a single covariate");
      }
      return least_favorable_critical_value(DesignSpec::design(1), n, rule, alpha,
                                            spec.replications, seed);
  }
  throw InvalidInput("unknown critical value method");
}

ConfidenceRegion invert_test(const Dataset& data, ModelKind model, const ThetaGrid& grid,
                             const TruncationRule& rule, const CritvalSpec& spec, double alpha,
                             std::uint64_t seed, const ScanConfig& config) {
  if (grid.size() == 0) throw InvalidGrid("theta grid is empty");
  if (grid.dimension() != data.dimension() + 1) {
    throw InvalidGrid("theta grid has " + std::to_string(grid.dimension()) +
                      " axes, model needs " + std::to_string(data.dimension() + 1));
  }
  data.validate();

  ConfidenceRegion region;
  region.level = 1.0 - alpha;
  region.grid = grid;
  region.n = data.size();
  region.t_n = truncation(rule, data.size(), data.x);
  region.critical_value =
      dataset_critical_value(data, model, region.t_n, spec, alpha, seed, rule, config);

  const Scanner scanner(data.x, region.t_n, config);
  region.statistic.assign(grid.size(), 0.0);
  std::vector<char> accepted(grid.size(), 0);
  detail::parallel_for(grid.size(), [&](std::size_t p) {
    const auto moments = evaluate_moments(model, data, grid.point(p));
    const double s = scanner(moments.values).S;
    region.statistic[p] = s;
    accepted[p] = region.critical_value.rejects(s, region.n) ? 0 : 1;
  });
  region.accepted.assign(accepted.begin(), accepted.end());
  region.projections = project(grid, region.accepted);
  return region;
}

std::string region_csv(const ConfidenceRegion& region) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < region.grid.dimension(); ++k) os << "theta" << k + 1 << ',';
  os << "statistic,threshold,accepted\n";
  const double threshold = region.critical_value.statistic_threshold(region.n);
  for (std::size_t p = 0; p < region.grid.size(); ++p) {
    for (double v : region.grid.point(p).values) os << v << ',';
    os << region.statistic[p] << ',' << threshold << ',' << (region.accepted[p] ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace mscan
