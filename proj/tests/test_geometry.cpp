#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "kdt/dataset.hpp"
#include "kdt/rect.hpp"
#include "kdt/rng.hpp"

using namespace kdt;

namespace {

Rect random_rect(Rng& rng, int d, double min_side = 0.0) {
  std::vector<double> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const double a = 10.0 * rng.next_double() - 5.0;
    const double len = min_side + 3.0 * rng.next_double();
    lo[static_cast<std::size_t>(i)] = a;
    hi[static_cast<std::size_t>(i)] = a + len;
  }
  return Rect(std::move(lo), std::move(hi));
}

std::vector<double> random_point(Rng& rng, int d, double span = 12.0) {
  std::vector<double> q(static_cast<std::size_t>(d));
  for (auto& c : q) c = span * rng.next_double() - span / 2.0;
  return q;
}

}  // namespace

TEST_CASE("dist_point_to_rect basics") {
  const Rect unit = Rect::unit_cube(2);
  CHECK(dist_point_to_rect(std::vector<double>{0.5, 0.5}, unit) == 0.0);
  CHECK(dist_point_to_rect(std::vector<double>{0.0, 1.0}, unit) == 0.0);  // boundary is inside
  CHECK(dist_point_to_rect(std::vector<double>{2.0, 0.5}, unit) == 1.0);
  CHECK(dist_point_to_rect(std::vector<double>{2.0, 2.0}, unit) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(dist_point_to_rect(std::vector<double>{0.5}, unit), std::invalid_argument);
}

TEST_CASE("rect_intersects_open_ball is strict") {
  const Rect unit = Rect::unit_cube(2);
  const std::vector<double> outside{2.0, 0.5};
  const std::vector<double> inside{0.3, 0.3};
  CHECK_FALSE(rect_intersects_open_ball(unit, inside, 0.0));  // empty open ball
  CHECK(rect_intersects_open_ball(unit, inside, 1e-9));
  CHECK_FALSE(rect_intersects_open_ball(unit, outside, 1.0));  // distance exactly 1
  CHECK(rect_intersects_open_ball(unit, outside, 1.01));
  CHECK_THROWS_AS(rect_intersects_open_ball(unit, inside, -1.0), std::invalid_argument);
}

TEST_CASE("aspect ratio") {
  CHECK(aspect_ratio(Rect::unit_cube(3)) == 1.0);
  CHECK(aspect_ratio(Rect({0.0, 0.0}, {1.0, 0.25})) == 4.0);
  CHECK(aspect_ratio(Rect::cube(2, 0.0, 6.0)) == 1.0);
  CHECK_THROWS_AS(aspect_ratio(Rect({0.0, 0.0}, {1.0, 0.0})), std::invalid_argument);
}

TEST_CASE("volume and diameters") {
  const Rect cube3 = Rect::unit_cube(3);
  CHECK(volume(cube3) == 1.0);
  CHECK(l1_diameter(cube3) == 3.0);
  CHECK(l2_diameter(cube3) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));

  const Rect r({0.0, 0.0}, {0.5, 0.25});
  CHECK(volume(r) == 0.125);
  CHECK(l1_diameter(r) == 0.75);
  CHECK(l2_diameter(r) == doctest::Approx(std::sqrt(0.3125)).epsilon(1e-15));

  CHECK(volume(Rect({0.0, 1.0}, {1.0, 1.0})) == 0.0);
}

TEST_CASE("inset") {
  const Rect unit = Rect::unit_cube(2);
  CHECK(inset(unit, 0.0) == unit);
  CHECK(inset(unit, 0.1) == Rect({0.1, 0.1}, {0.9, 0.9}));

  const Rect thin({0.0, 0.0}, {1.0, 0.4});
  const Rect shrunk = inset(thin, 0.2);
  CHECK(shrunk == Rect({0.2, 0.2}, {0.8, 0.2}));
  CHECK(volume(shrunk) == 0.0);
  CHECK_THROWS_AS(inset(thin, 0.21), std::invalid_argument);
  CHECK_THROWS_AS(inset(thin, -0.1), std::invalid_argument);
}

TEST_CASE("inset volume matches the product formula") {
  Rng rng(42);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 1 + static_cast<int>(rng.next_below(5));
    const Rect r = random_rect(rng, d, 0.2);
    double min_side = r.side(0);
    for (int i = 1; i < d; ++i) min_side = std::min(min_side, r.side(i));
    const double t = 0.5 * min_side * rng.next_double();
    double expected = 1.0;
    for (int i = 0; i < d; ++i) expected *= r.side(i) - 2.0 * t;
    CHECK(volume(inset(r, t)) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("unit ball volume") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(unit_ball_volume(2) == doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(unit_ball_volume(4) == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(unit_ball_volume(0), std::invalid_argument);

  // v_d = v_{d-2} * 2 pi / d
  for (int d = 3; d <= 200; ++d) {
    const double expected = unit_ball_volume(d - 2) * 2.0 * M_PI / static_cast<double>(d);
    CHECK(unit_ball_volume(d) == doctest::Approx(expected).epsilon(1e-9));
  }
  CHECK(unit_ball_volume(20) == doctest::Approx(std::pow(M_PI, 10) / 3628800.0).epsilon(1e-12));

  // The volume leaves the double range near d ~ 750; the log stays accurate.
  CHECK(unit_ball_volume(10000) == 0.0);
  double log_v = std::log(M_PI);  // log v_2
  for (int d = 4; d <= 10000; d += 2) log_v += std::log(2.0 * M_PI) - std::log(d);
  CHECK(log_unit_ball_volume(10000) == doctest::Approx(log_v).epsilon(1e-10));
  CHECK(std::isfinite(log_unit_ball_volume(10000)));
}

TEST_CASE("diameter bound from aspect ratio") {
  // Unit cube in d = 4: bound 1 * sqrt(4) * 1 = 2, and the diameter is exactly 2.
  CHECK(diameter_bound_from_aspect(1.0, 1.0, 4) == 2.0);
  CHECK(l2_diameter(Rect::unit_cube(4)) == 2.0);
  CHECK(diameter_bound_from_aspect(0.125, 2.0, 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(diameter_bound_from_aspect(0.0, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(diameter_bound_from_aspect(1.0, 0.5, 2), std::invalid_argument);
}

TEST_CASE("diameter bound holds for random rectangles") {
  Rng rng(7);
  for (int rep = 0; rep < 10000; ++rep) {
    const int d = 1 + static_cast<int>(rng.next_below(6));
    const Rect r = random_rect(rng, d, 1e-3);
    const double bound = diameter_bound_from_aspect(volume(r), aspect_ratio(r), d);
    CHECK(l2_diameter(r) <= bound * (1.0 + 1e-12));
  }
}

TEST_CASE("distance is zero exactly on the closed box") {
  Rng rng(11);
  for (int rep = 0; rep < 2000; ++rep) {
    const int d = 1 + static_cast<int>(rng.next_below(5));
    const Rect r = random_rect(rng, d);
    const auto q = random_point(rng, d);
    const double dist = dist_point_to_rect(q, r);
    CHECK((dist == 0.0) == r.contains(q));
  }
}

TEST_CASE("point-to-box distance is 1-Lipschitz in the point") {
  Rng rng(13);
  for (int rep = 0; rep < 2000; ++rep) {
    const int d = 1 + static_cast<int>(rng.next_below(5));
    const Rect r = random_rect(rng, d);
    const auto q1 = random_point(rng, d);
    auto q2 = random_point(rng, d);
    const double shift = std::sqrt(dist_sq_points(q1, q2));
    const double delta = std::abs(dist_point_to_rect(q1, r) - dist_point_to_rect(q2, r));
    CHECK(delta <= shift * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("ball intersection is monotone in the radius") {
  Rng rng(17);
  for (int rep = 0; rep < 2000; ++rep) {
    const int d = 1 + static_cast<int>(rng.next_below(5));
    const Rect r = random_rect(rng, d);
    const auto q = random_point(rng, d);
    const double radius = 4.0 * rng.next_double();
    if (rect_intersects_open_ball(r, q, radius)) {
      CHECK(rect_intersects_open_ball(r, q, radius + rng.next_double()));
    }
  }
}

TEST_CASE("norm inequalities between diameters") {
  Rng rng(19);
  for (int rep = 0; rep < 2000; ++rep) {
    const int d = 1 + static_cast<int>(rng.next_below(6));
    const Rect r = random_rect(rng, d);
    const double l1 = l1_diameter(r);
    const double l2 = l2_diameter(r);
    CHECK(l2 <= l1 * (1.0 + 1e-12));
    CHECK(l1 <= std::sqrt(static_cast<double>(d)) * l2 * (1.0 + 1e-12));
  }
}
