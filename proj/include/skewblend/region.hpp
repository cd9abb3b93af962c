#ifndef SKEWBLEND_REGION_HPP
#define SKEWBLEND_REGION_HPP

#include <functional>
#include <string>
#include <vector>

#include "skewblend/util.hpp"

namespace skewblend {

struct Ball {
  Vec center;
  double radius = 0.0;
};

struct Box {
  Vec lo, hi;
};

// Finite union of closed balls and axis-aligned boxes in R^c with a signed
// distance evaluation.  Open/closed distinctions are always handled through
// explicit positive margins by the callers.
struct Region {
  int c = 0;
  std::vector<Ball> balls;
  std::vector<Box> boxes;

  static Region ball(const Vec& center, double radius);
  static Region box(const Vec& lo, const Vec& hi);
  // Cube centered at x with the given half width per coordinate.
  static Region cube(const Vec& center, double half);

  Region& add_ball(const Vec& center, double radius);
  Region& add_box(const Vec& lo, const Vec& hi);

  bool empty() const { return balls.empty() && boxes.empty(); }
  int parts() const { return static_cast<int>(balls.size() + boxes.size()); }
  // Axis-aligned bounding box of the union.
  Box bounding_box() const;
  std::string str() const;
};

// Signed distance to the union: positive inside (depth to the boundary),
// negative outside (distance to the union).  The inner depth is exact for
// single-part regions and for 1-dimensional unions (computed on merged
// intervals); for overlapping parts in dimension >= 2 it is the max of the
// per-part depths, a guaranteed 1-Lipschitz lower bound, which is the
// direction every rigorous check here consumes.
double signed_distance(const Region& r, const Vec& x);

bool contains_with_margin(const Region& r, const Vec& x, double margin);

// Minimum Euclidean distance between two unions (0 if they intersect).
// Used to certify disjointness of superposition domains.
double region_gap(const Region& a, const Region& b);

struct Grid {
  Region region;
  double h = 0.0;
  // Half diagonal of a grid cell: every point of the region is within this
  // distance of some grid point.
  double cell_correction = 0.0;
  std::vector<Vec> points;
};

inline constexpr long kDefaultGridCap = 10'000'000;

// Lattice of spacing h covering the closure of r: keeps every lattice point
// whose cell can intersect the region.  Throws resource_error beyond the cap.
Grid cover_grid(const Region& r, double h, long cap = kDefaultGridCap);

}  // namespace skewblend

#endif
