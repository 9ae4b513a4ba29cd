#include "kdt/rect.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kdt {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Rect::Rect(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  require(!lo_.empty(), "Rect: dimension must be >= 1");
  require(lo_.size() == hi_.size(), "Rect: lo/hi dimension mismatch");
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    require(std::isfinite(lo_[i]) && std::isfinite(hi_[i]), "Rect: bounds must be finite");
    require(lo_[i] <= hi_[i], "Rect: lo > hi");
  }
}

Rect Rect::unit_cube(int d) { return cube(d, 0.0, 1.0); }

Rect Rect::cube(int d, double lo, double hi) {
  require(d >= 1, "Rect: dimension must be >= 1");
  return Rect(std::vector<double>(static_cast<std::size_t>(d), lo),
              std::vector<double>(static_cast<std::size_t>(d), hi));
}

Rect Rect::clipped_below(int axis, double threshold) const {
  Rect out = *this;
  out.hi_[static_cast<std::size_t>(axis)] = threshold;
  return out;
}

Rect Rect::clipped_above(int axis, double threshold) const {
  Rect out = *this;
  out.lo_[static_cast<std::size_t>(axis)] = threshold;
  return out;
}

bool Rect::contains(std::span<const double> q) const {
  if (q.size() != lo_.size()) throw std::invalid_argument("Rect::contains: dimension mismatch");
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (q[i] < lo_[i] || q[i] > hi_[i]) return false;
  }
  return true;
}

double dist_sq_point_to_rect(std::span<const double> q, const Rect& r) {
  if (static_cast<int>(q.size()) != r.dim())
    throw std::invalid_argument("dist_point_to_rect: dimension mismatch");
  double sum = 0.0;
  for (int i = 0; i < r.dim(); ++i) {
    double gap = 0.0;
    if (q[static_cast<std::size_t>(i)] < r.lo(i)) {
      gap = r.lo(i) - q[static_cast<std::size_t>(i)];
    } else if (q[static_cast<std::size_t>(i)] > r.hi(i)) {
      gap = q[static_cast<std::size_t>(i)] - r.hi(i);
    }
    sum += gap * gap;
  }
  return sum;
}

double dist_point_to_rect(std::span<const double> q, const Rect& r) {
  return std::sqrt(dist_sq_point_to_rect(q, r));
}

bool rect_intersects_open_ball(const Rect& r, std::span<const double> center, double radius) {
  if (radius < 0.0) throw std::invalid_argument("rect_intersects_open_ball: radius must be >= 0");
  return dist_sq_point_to_rect(center, r) < radius * radius;
}

double aspect_ratio(const Rect& r) {
  double smallest = r.side(0), largest = r.side(0);
  for (int i = 1; i < r.dim(); ++i) {
    smallest = std::min(smallest, r.side(i));
    largest = std::max(largest, r.side(i));
  }
  if (smallest <= 0.0) throw std::invalid_argument("aspect_ratio: zero-width side");
  return largest / smallest;
}

double volume(const Rect& r) {
  double v = 1.0;
  for (int i = 0; i < r.dim(); ++i) v *= r.side(i);
  return v;
}

double l1_diameter(const Rect& r) {
  double sum = 0.0;
  for (int i = 0; i < r.dim(); ++i) sum += r.side(i);
  return sum;
}

double l2_diameter(const Rect& r) {
  double sum = 0.0;
  for (int i = 0; i < r.dim(); ++i) sum += r.side(i) * r.side(i);
  return std::sqrt(sum);
}

Rect inset(const Rect& r, double t) {
  require(t >= 0.0, "inset: t must be >= 0");
  std::vector<double> lo(static_cast<std::size_t>(r.dim())), hi(static_cast<std::size_t>(r.dim()));
  for (int i = 0; i < r.dim(); ++i) {
    if (t > r.side(i) / 2.0)
      throw std::invalid_argument("inset: t exceeds half of side " + std::to_string(i));
    lo[static_cast<std::size_t>(i)] = r.lo(i) + t;
    hi[static_cast<std::size_t>(i)] = r.hi(i) - t;
  }
  return Rect(std::move(lo), std::move(hi));
}

double log_unit_ball_volume(int d) {
  require(d >= 1, "unit_ball_volume: dimension must be >= 1");
  const double half_d = 0.5 * static_cast<double>(d);
  return half_d * std::log(M_PI) - std::lgamma(half_d + 1.0);
}

double unit_ball_volume(int d) { return std::exp(log_unit_ball_volume(d)); }

double diameter_bound_from_aspect(double volume, double aspect, int d) {
  require(volume > 0.0, "diameter_bound_from_aspect: volume must be > 0");
  require(aspect >= 1.0, "diameter_bound_from_aspect: aspect must be >= 1");
  require(d >= 1, "diameter_bound_from_aspect: dimension must be >= 1");
  return aspect * std::sqrt(static_cast<double>(d)) *
         std::pow(volume, 1.0 / static_cast<double>(d));
}

}  // namespace kdt
