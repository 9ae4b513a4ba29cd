// Axis-aligned rectangles (cells) and the geometry used by tree search and
// the experiment audits.
#pragma once

#include <span>
#include <vector>

namespace kdt {

/// Closed axis-aligned box: the product of [lo[i], hi[i]] over dimensions.
class Rect {
 public:
  Rect(std::vector<double> lo, std::vector<double> hi);

  static Rect unit_cube(int d);
  static Rect cube(int d, double lo, double hi);

  int dim() const { return static_cast<int>(lo_.size()); }
  std::span<const double> lo() const { return lo_; }
  std::span<const double> hi() const { return hi_; }
  double lo(int i) const { return lo_[static_cast<std::size_t>(i)]; }
  double hi(int i) const { return hi_[static_cast<std::size_t>(i)]; }
  double side(int i) const { return hi(i) - lo(i); }

  /// Clip the box to one side of an axis-aligned hyperplane.
  Rect clipped_below(int axis, double threshold) const;  // keep x[axis] <= threshold
  Rect clipped_above(int axis, double threshold) const;  // keep x[axis] >= threshold

  bool contains(std::span<const double> q) const;

  bool operator==(const Rect& other) const = default;

 private:
  std::vector<double> lo_, hi_;
};

/// Euclidean distance from q to the closed box (0 iff q is inside).
double dist_point_to_rect(std::span<const double> q, const Rect& r);
double dist_sq_point_to_rect(std::span<const double> q, const Rect& r);

/// True iff the box meets the *open* ball B_radius(center). Strict: a box
/// touching the sphere only at its boundary does not intersect.
bool rect_intersects_open_ball(const Rect& r, std::span<const double> center, double radius);

/// max side / min side. Requires all sides positive.
double aspect_ratio(const Rect& r);

double volume(const Rect& r);
double l1_diameter(const Rect& r);
double l2_diameter(const Rect& r);

/// Shrink every face inward by t. Requires 0 <= t <= min side / 2.
Rect inset(const Rect& r, double t);

/// Volume of the d-dimensional unit ball, pi^(d/2) / Gamma(d/2 + 1),
/// evaluated in log space so no intermediate overflows. Past d ~ 750 the
/// volume itself drops below the double range and rounds to 0; use
/// log_unit_ball_volume where the magnitude matters at large d.
double unit_ball_volume(int d);
double log_unit_ball_volume(int d);

/// Upper bound on the L2 diameter of any rectangle with the given volume and
/// aspect ratio: aspect * sqrt(d) * volume^(1/d).
double diameter_bound_from_aspect(double volume, double aspect, int d);

}  // namespace kdt
