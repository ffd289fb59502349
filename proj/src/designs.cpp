#include "mscan/designs.hpp"

#include <cmath>
#include <limits>

#include "mscan/errors.hpp"

namespace mscan {

double DesignSpec::missing_probability(double x) const {
  switch (id) {
    case 1:
      return 0.1;
    case 2:
      return 0.02 + 2.0 * 0.98 * std::abs(x - 0.5);
    case 3:
      return 0.02 + 4.0 * 0.98 * (x - 0.5) * (x - 0.5);
  }
  throw InvalidInput("unknown design " + std::to_string(id));
}

double DesignSpec::min_missing_probability() const { return id == 1 ? 0.1 : 0.02; }

double DesignSpec::smoothness() const {
  switch (id) {
    case 1:
      return std::numeric_limits<double>::infinity();
    case 2:
      return 1.0;
    default:
      return 2.0;
  }
}

double DesignSpec::boundary_theta1() const {
  const double p = min_missing_probability();
  return p / (1.0 - p);
}

DesignSpec DesignSpec::design(int id) {
  if (id < 1 || id > 3) throw InvalidInput("design id must be 1, 2 or 3, got " + std::to_string(id));
  DesignSpec spec;
  spec.id = id;
  return spec;
}

Dataset simulate_design(const DesignSpec& design, std::size_t n, Engine& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  constexpr double inf = std::numeric_limits<double>::infinity();

  Dataset data;
  data.x = Matrix(n, 1);
  data.w_lo.resize(n);
  data.w_hi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = unit(rng);
    const double w = design.theta1_star + design.theta2_star * x + noise(rng);
    const bool missing = unit(rng) < design.missing_probability(x);
    data.x(i, 0) = x;
    data.w_lo[i] = missing ? -inf : w;
    data.w_hi[i] = missing ? inf : w;
  }
  return data;
}

}  // namespace mscan
