#include <cmath>

#include "webcent/classify.hpp"
#include "webcent/error.hpp"

namespace webcent::classify {

namespace {

Point2 normalized(Point2 v) {
  const double norm = std::hypot(v.x, v.y);
  return {v.x / norm, v.y / norm};
}

// Deterministic sign: the larger-magnitude component is positive.
Point2 canonical_sign(Point2 v) {
  const double dominant = std::abs(v.x) >= std::abs(v.y) ? v.x : v.y;
  return dominant < 0.0 ? Point2{-v.x, -v.y} : v;
}

}  // namespace

PcaResult pca2(std::span<const Point2> points) {
  if (points.size() < 2) throw InvalidArgument("pca2: need at least two points");
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("pca2: non-finite point");
  }
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double dx = p.x - mx;
    const double dy = p.y - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  sxx /= n - 1.0;
  syy /= n - 1.0;
  sxy /= n - 1.0;
  if (sxx + syy == 0.0) throw InvalidArgument("zero variance");

  // Symmetric 2x2 eigenproblem in closed form.
  const double half_trace = 0.5 * (sxx + syy);
  const double radius = std::hypot(0.5 * (sxx - syy), sxy);
  const double major = half_trace + radius;
  const double minor = half_trace - radius;

  Point2 axis;
  if (radius == 0.0) {
    axis = {1.0, 0.0};  // isotropic: any orthonormal basis works
  } else {
    // Two algebraically equivalent eigenvector forms; pick the better
    // conditioned one.
    const Point2 u{major - syy, sxy};
    const Point2 v{sxy, major - sxx};
    axis = std::hypot(u.x, u.y) >= std::hypot(v.x, v.y) ? u : v;
  }
  const Point2 first = canonical_sign(normalized(axis));
  const Point2 second = canonical_sign(Point2{-first.y, first.x});

  PcaResult result;
  result.variances = {major, std::max(minor, 0.0)};
  result.axes = {first, second};
  result.points.reserve(points.size());
  for (const auto& p : points) {
    const double dx = p.x - mx;
    const double dy = p.y - my;
    result.points.push_back({dx * first.x + dy * first.y, dx * second.x + dy * second.y});
  }
  return result;
}

std::vector<Point2> minmax_scale(std::span<const Point2> points) {
  if (points.size() < 2) throw InvalidArgument("minmax_scale: need at least two points");
  double lo_x = points[0].x, hi_x = points[0].x;
  double lo_y = points[0].y, hi_y = points[0].y;
  for (const auto& p : points) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  const auto scale = [](double v, double lo, double hi) {
    return hi > lo ? (v - lo) / (hi - lo) : 0.5;
  };
  std::vector<Point2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({scale(p.x, lo_x, hi_x), scale(p.y, lo_y, hi_y)});
  return out;
}

}  // namespace webcent::classify
