#include "treerec/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace treerec::kernels {

namespace {

inline double dist2(const Point2& p, const Point2& q) {
  double dx = p.x - q.x, dy = p.y - q.y;
  return dx * dx + dy * dy;
}

inline double nearest2(const Point2& p, std::span<const Point2> b) {
  double best = dist2(p, b[0]);
  for (std::size_t j = 1; j < b.size(); ++j) {
    double d = dist2(p, b[j]);
    if (d < best) best = d;
  }
  return best;
}

}  // namespace

double directed_hausdorff_serial(std::span<const Point2> a, std::span<const Point2> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty point set");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = nearest2(a[i], b);
    if (d > worst) worst = d;
  }
  return std::sqrt(worst);
}

double directed_hausdorff_parallel(std::span<const Point2> a, std::span<const Point2> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty point set");
  double worst = 0.0;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double d = nearest2(a[i], b);
    if (d > worst) worst = d;
  }
  return std::sqrt(worst);
}

void apply_affine_serial(const Affine2& m, std::span<const Point2> in,
                         std::span<Point2> out) {
  if (out.size() < in.size()) throw std::invalid_argument("output span too small");
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = m(in[i]);
}

void apply_affine_parallel(const Affine2& m, std::span<const Point2> in,
                           std::span<Point2> out) {
  if (out.size() < in.size()) throw std::invalid_argument("output span too small");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = m(in[i]);
}

}  // namespace treerec::kernels
