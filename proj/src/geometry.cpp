#include "mscan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mscan/errors.hpp"

namespace mscan {

namespace {

using Point = std::array<double, 2>;

double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain. Collinear points on edges are dropped.
std::vector<Point> monotone_chain(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double shoelace(const std::vector<Point>& poly) {
  if (poly.size() < 3) return 0.0;
  // fan from the first vertex; avoids cancellation far from the origin
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) twice += cross(poly[0], poly[i], poly[i + 1]);
  return 0.5 * std::abs(twice);
}

std::string format_fraction(double v) {
  for (int den = 1; den <= 12; ++den) {
    double num = v * den;
    if (std::abs(num - std::round(num)) < 1e-9) {
      std::ostringstream os;
      os << static_cast<long>(std::round(num));
      if (den != 1) os << '/' << den;
      return os.str();
    }
  }
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<double> coordinate_ranges(const Matrix& points) {
  std::vector<double> ranges(points.cols(), 0.0);
  if (points.rows() == 0) return ranges;
  for (std::size_t k = 0; k < points.cols(); ++k) {
    double lo = points(0, k), hi = points(0, k);
    for (std::size_t i = 1; i < points.rows(); ++i) {
      lo = std::min(lo, points(i, k));
      hi = std::max(hi, points(i, k));
    }
    ranges[k] = hi - lo;
  }
  return ranges;
}

SupportHull build_hull(const Matrix& points) {
  const std::size_t d = points.cols();
  if (d == 0) throw InvalidInput("build_hull: points have no coordinates");
  if (d > 2) {
    throw UnsupportedDimension("build_hull: exact hull volume supports d_X <= 2, got d_X = " +
                               std::to_string(d));
  }
  if (points.rows() < 2) throw InvalidInput("build_hull: need at least 2 points");
  for (double v : points.data()) {
    if (!std::isfinite(v)) throw InvalidInput("build_hull: non-finite coordinate");
  }

  SupportHull hull;
  hull.dimension = d;
  hull.lower.assign(d, 0.0);
  hull.upper.assign(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    hull.lower[k] = hull.upper[k] = points(0, k);
    for (std::size_t i = 1; i < points.rows(); ++i) {
      hull.lower[k] = std::min(hull.lower[k], points(i, k));
      hull.upper[k] = std::max(hull.upper[k], points(i, k));
    }
  }
  bool all_same = true;
  for (std::size_t k = 0; k < d; ++k) all_same = all_same && hull.lower[k] == hull.upper[k];
  if (all_same) throw DegenerateSupport("build_hull: all points are identical");

  if (d == 1) {
    hull.volume = hull.upper[0] - hull.lower[0];
    return hull;
  }

  std::vector<Point> pts(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) pts[i] = {points(i, 0), points(i, 1)};
  hull.vertices = monotone_chain(std::move(pts));
  hull.volume = shoelace(hull.vertices);
  return hull;
}

std::string TruncationRule::label() const {
  switch (kind) {
    case Kind::fixed: {
      std::ostringstream os;
      os << value;
      return os.str();
    }
    case Kind::power:
      return "n^-" + format_fraction(value);
    case Kind::power_scaled:
      return "range*n^-" + format_fraction(value);
  }
  return {};
}

double truncation(const TruncationRule& rule, std::size_t n, const Matrix& points) {
  if (n < 2) throw InvalidInput("truncation: need n >= 2");
  if (rule.kind != TruncationRule::Kind::fixed && !(rule.value > 0.0 && rule.value < 1.0)) {
    throw InvalidTruncation("truncation: power rules need 0 < delta < 1");
  }

  const auto ranges = coordinate_ranges(points);
  double t = 0.0;
  switch (rule.kind) {
    case TruncationRule::Kind::fixed:
      t = rule.value;
      break;
    case TruncationRule::Kind::power:
      t = std::pow(static_cast<double>(n), -rule.value);
      break;
    case TruncationRule::Kind::power_scaled: {
      double log_scale = 0.0;
      for (double r : ranges) log_scale += std::log(r);
      double scale = ranges.empty() ? 1.0 : std::exp(log_scale / static_cast<double>(ranges.size()));
      if (ranges.size() == 1) scale = ranges[0];
      t = std::pow(static_cast<double>(n), -rule.value) * scale;
      break;
    }
  }

  if (!(t > 0.0) || !std::isfinite(t)) {
    throw InvalidTruncation("truncation: t_n must be positive and finite");
  }
  if (!ranges.empty() && std::all_of(ranges.begin(), ranges.end(), [t](double r) { return t > r; })) {
    throw InvalidTruncation("truncation: t_n exceeds every coordinate range");
  }
  return t;
}

}  // namespace mscan
