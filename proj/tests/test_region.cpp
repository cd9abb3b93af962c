#include <doctest.h>

#include "skewblend/region.hpp"

using namespace skewblend;

namespace {
Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}
Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}
}  // namespace

TEST_CASE("signed distance") {
  const Region ball = Region::ball(v2(0, 0), 1.0);
  CHECK(signed_distance(ball, v2(0, 0)) == doctest::Approx(1.0));
  CHECK(signed_distance(ball, v2(2, 0)) == doctest::Approx(-1.0));

  SUBCASE("1D unions are exact via merged intervals") {
    Region r = Region::box(v1(0), v1(1));
    r.add_box(v1(0.5), v1(2));
    CHECK(signed_distance(r, v1(0.75)) == doctest::Approx(0.75));
    CHECK(signed_distance(r, v1(2.5)) == doctest::Approx(-0.5));
  }
  SUBCASE("1-Lipschitz on random pairs") {
    Region r = Region::ball(v2(0.3, -0.2), 0.7);
    r.add_box(v2(-1, -1), v2(0, 0));
    Rng rng(3);
    for (int t = 0; t < 500; ++t) {
      const Vec x = uniform_vec(rng, 2, -2, 2), y = uniform_vec(rng, 2, -2, 2);
      CHECK(std::abs(signed_distance(r, x) - signed_distance(r, y)) <= (x - y).norm() + 1e-12);
    }
  }
}

TEST_CASE("contains_with_margin") {
  const Region ball = Region::ball(v2(0, 0), 1.0);
  CHECK(contains_with_margin(ball, v2(0, 0), 0.5));
  CHECK_FALSE(contains_with_margin(ball, v2(0.9, 0), 0.2));
  SUBCASE("zero margin equals plain open membership") {
    CHECK(contains_with_margin(ball, v2(0.999, 0), 0.0));
    CHECK_FALSE(contains_with_margin(ball, v2(1.0, 0), 0.0));
  }
  SUBCASE("monotone in the margin") {
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
      const Vec x = uniform_vec(rng, 2, -1.5, 1.5);
      const double m1 = uniform(rng, 0, 1), m2 = m1 + uniform(rng, 0, 1);
      if (contains_with_margin(ball, x, m2)) CHECK(contains_with_margin(ball, x, m1));
    }
  }
}

TEST_CASE("cover_grid") {
  SUBCASE("1D interval [-1,1] at h = 0.5 has the five lattice points") {
    const Grid g = cover_grid(Region::box(v1(-1), v1(1)), 0.5);
    CHECK(g.points.size() == 5);
    CHECK(g.points.front()[0] == doctest::Approx(-1.0));
    CHECK(g.points.back()[0] == doctest::Approx(1.0));
  }
  SUBCASE("2D unit box at h = 1 has the four corner cells") {
    const Grid g = cover_grid(Region::box(v2(0, 0), v2(1, 1)), 1.0);
    CHECK(g.points.size() == 4);
  }
  SUBCASE("every region point is within the cell correction of a grid point") {
    Region r = Region::ball(v2(0.2, 0.1), 0.8);
    const Grid g = cover_grid(r, 0.13);
    Rng rng(5);
    for (int t = 0; t < 400; ++t) {
      Vec x = uniform_vec(rng, 2, -1, 1.5);
      if (signed_distance(r, x) < 0) continue;
      double best = 1e9;
      for (const auto& p : g.points) best = std::min(best, (x - p).norm());
      CHECK(best <= g.cell_correction + 1e-12);
    }
  }
  SUBCASE("point cap raises a resource error") {
    CHECK_THROWS_AS(cover_grid(Region::box(v2(0, 0), v2(1, 1)), 1e-5, 1000), resource_error);
  }
}

TEST_CASE("region gap") {
  const Region a = Region::ball(v2(0, 0), 1.0);
  const Region b = Region::ball(v2(3, 0), 1.0);
  CHECK(region_gap(a, b) == doctest::Approx(1.0));
  CHECK(region_gap(a, Region::ball(v2(1, 0), 1.0)) == doctest::Approx(0.0));
}
