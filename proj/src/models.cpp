#include "mscan/models.hpp"

#include <cmath>

#include "mscan/errors.hpp"

namespace mscan {

namespace {

double fitted(const Dataset& data, const Theta& theta, std::size_t i) {
  double v = theta[0];
  for (std::size_t k = 0; k < data.dimension(); ++k) v += theta[k + 1] * data.x(i, k);
  return v;
}

void check_theta(const Dataset& data, const Theta& theta) {
  if (theta.size() != data.dimension() + 1) {
    throw InvalidInput("theta has " + std::to_string(theta.size()) + " entries, expected " +
                       std::to_string(data.dimension() + 1) + " (intercept plus slopes)");
  }
  for (double v : theta.values) {
    if (!std::isfinite(v)) throw InvalidInput("theta must be finite");
  }
}

}  // namespace

void Dataset::validate() const {
  const std::size_t n = x.rows();
  if (!w_lo.empty() && w_lo.size() != n) throw InvalidInput("dataset: w_lo length differs from n");
  if (!w_hi.empty() && w_hi.size() != n) throw InvalidInput("dataset: w_hi length differs from n");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw InvalidInput("dataset: covariates must be finite");
  }
  for (std::size_t i = 0; i < w_lo.size(); ++i) {
    if (std::isnan(w_lo[i])) throw InvalidInput("dataset: NaN in w_lo");
  }
  for (std::size_t i = 0; i < w_hi.size(); ++i) {
    if (std::isnan(w_hi[i])) throw InvalidInput("dataset: NaN in w_hi");
    if (!w_lo.empty() && w_lo[i] > w_hi[i]) {
      throw InvalidInput("dataset: w_lo > w_hi at row " + std::to_string(i));
    }
  }
}

Dataset make_dataset(std::span<const IntervalObservation> observations) {
  Dataset data;
  const std::size_t d = observations.empty() ? 0 : observations.front().x.size();
  data.x = Matrix(observations.size(), d);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    if (o.x.size() != d) throw InvalidInput("make_dataset: covariate dimension varies");
    for (std::size_t k = 0; k < d; ++k) data.x(i, k) = o.x[k];
    data.w_lo.push_back(o.w_lo);
    data.w_hi.push_back(o.w_hi);
  }
  data.validate();
  return data;
}

std::size_t moment_count(ModelKind model) { return model == ModelKind::interval ? 2 : 1; }

std::string to_string(ModelKind model) {
  return model == ModelKind::interval ? "interval" : "missing";
}

MomentMatrix interval_regression_moments(const Dataset& data, const Theta& theta) {
  check_theta(data, theta);
  const std::size_t n = data.size();
  if (data.w_lo.size() != n || data.w_hi.size() != n) {
    throw InvalidInput("interval model needs both w_lo and w_hi columns");
  }
  MomentMatrix out{Matrix(n, 2), theta};
  for (std::size_t i = 0; i < n; ++i) {
    const double f = fitted(data, theta, i);
    if (std::isnan(f)) throw InvalidInput("interval model: NaN fitted value");
    out.values(i, 0) = (f <= data.w_hi[i] ? 1.0 : 0.0) - 0.5;
    out.values(i, 1) = 0.5 - (f <= data.w_lo[i] ? 1.0 : 0.0);
  }
  return out;
}

MomentMatrix missing_data_moment(const Dataset& data, const Theta& theta) {
  check_theta(data, theta);
  const std::size_t n = data.size();
  if (data.w_hi.size() != n) throw InvalidInput("missing-data model needs a w_hi column");
  MomentMatrix out{Matrix(n, 1), theta};
  for (std::size_t i = 0; i < n; ++i) {
    const double f = fitted(data, theta, i);
    if (std::isnan(f)) throw InvalidInput("missing-data model: NaN fitted value");
    out.values(i, 0) = (f <= data.w_hi[i] ? 1.0 : 0.0) - 0.5;
  }
  return out;
}

MomentMatrix evaluate_moments(ModelKind model, const Dataset& data, const Theta& theta) {
  return model == ModelKind::interval ? interval_regression_moments(data, theta)
                                      : missing_data_moment(data, theta);
}

}  // namespace mscan
