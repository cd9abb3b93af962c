#include "skewblend/region.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace skewblend {

Region Region::ball(const Vec& center, double radius) {
  Region r;
  r.c = static_cast<int>(center.size());
  r.add_ball(center, radius);
  return r;
}

Region Region::box(const Vec& lo, const Vec& hi) {
  Region r;
  r.c = static_cast<int>(lo.size());
  r.add_box(lo, hi);
  return r;
}

Region Region::cube(const Vec& center, double half) {
  return box(center.array() - half, center.array() + half);
}

Region& Region::add_ball(const Vec& center, double radius) {
  if (radius <= 0.0) throw input_error("region: ball radius must be positive");
  if (c == 0) c = static_cast<int>(center.size());
  if (center.size() != c) throw input_error("region: dimension mismatch");
  balls.push_back({center, radius});
  return *this;
}

Region& Region::add_box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size()) throw input_error("region: box lo/hi dimension mismatch");
  if (c == 0) c = static_cast<int>(lo.size());
  if (lo.size() != c) throw input_error("region: dimension mismatch");
  for (int i = 0; i < c; ++i)
    if (!(lo[i] < hi[i])) throw input_error("region: box needs lo < hi componentwise");
  boxes.push_back({lo, hi});
  return *this;
}

Box Region::bounding_box() const {
  if (empty()) throw input_error("region: bounding box of empty region");
  Vec lo = Vec::Constant(c, std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  for (const auto& b : balls) {
    lo = lo.cwiseMin((b.center.array() - b.radius).matrix());
    hi = hi.cwiseMax((b.center.array() + b.radius).matrix());
  }
  for (const auto& b : boxes) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  return {lo, hi};
}

std::string Region::str() const {
  std::ostringstream os;
  for (const auto& b : balls) {
    os << "ball{center=[";
    for (int i = 0; i < b.center.size(); ++i) os << (i ? "," : "") << b.center[i];
    os << "], radius=" << b.radius << "} ";
  }
  for (const auto& b : boxes) {
    os << "box{lo=[";
    for (int i = 0; i < b.lo.size(); ++i) os << (i ? "," : "") << b.lo[i];
    os << "], hi=[";
    for (int i = 0; i < b.hi.size(); ++i) os << (i ? "," : "") << b.hi[i];
    os << "]} ";
  }
  return os.str();
}

namespace {

double ball_sd(const Ball& b, const Vec& x) { return b.radius - (x - b.center).norm(); }

double box_sd(const Box& b, const Vec& x) {
  double inner = std::numeric_limits<double>::infinity();
  double out2 = 0.0;
  bool outside = false;
  for (int i = 0; i < x.size(); ++i) {
    const double lo = b.lo[i] - x[i], hi = x[i] - b.hi[i];
    if (lo > 0) { outside = true; out2 += lo * lo; }
    if (hi > 0) { outside = true; out2 += hi * hi; }
    inner = std::min(inner, std::min(-lo, -hi));
  }
  return outside ? -std::sqrt(out2) : inner;
}

// Exact 1D signed distance via merged intervals.
double sd_1d(const Region& r, double x) {
  std::vector<std::pair<double, double>> iv;
  for (const auto& b : r.balls) iv.push_back({b.center[0] - b.radius, b.center[0] + b.radius});
  for (const auto& b : r.boxes) iv.push_back({b.lo[0], b.hi[0]});
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<double, double>> merged;
  for (auto& p : iv) {
    if (!merged.empty() && p.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, p.second);
    else
      merged.push_back(p);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (auto& p : merged) best = std::max(best, std::min(x - p.first, p.second - x));
  return best;
}

double point_to_box(const Box& b, const Vec& x) {
  double d2 = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double e = std::max({b.lo[i] - x[i], x[i] - b.hi[i], 0.0});
    d2 += e * e;
  }
  return std::sqrt(d2);
}

double box_box_gap(const Box& a, const Box& b) {
  double d2 = 0.0;
  for (int i = 0; i < a.lo.size(); ++i) {
    const double g = std::max({b.lo[i] - a.hi[i], a.lo[i] - b.hi[i], 0.0});
    d2 += g * g;
  }
  return std::sqrt(d2);
}

}  // namespace

double signed_distance(const Region& r, const Vec& x) {
  if (x.size() != r.c) throw input_error("signed_distance: dimension mismatch");
  if (r.empty()) throw input_error("signed_distance: empty region");
  if (r.c == 1) return sd_1d(r, x[0]);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& b : r.balls) best = std::max(best, ball_sd(b, x));
  for (const auto& b : r.boxes) best = std::max(best, box_sd(b, x));
  return best;
}

bool contains_with_margin(const Region& r, const Vec& x, double margin) {
  return signed_distance(r, x) > margin;
}

double region_gap(const Region& a, const Region& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a.balls) {
    for (const auto& q : b.balls)
      best = std::min(best, (p.center - q.center).norm() - p.radius - q.radius);
    for (const auto& q : b.boxes) best = std::min(best, point_to_box(q, p.center) - p.radius);
  }
  for (const auto& p : a.boxes) {
    for (const auto& q : b.balls) best = std::min(best, point_to_box(p, q.center) - q.radius);
    for (const auto& q : b.boxes) best = std::min(best, box_box_gap(p, q));
  }
  return std::max(best, 0.0);
}

Grid cover_grid(const Region& r, double h, long cap) {
  if (h <= 0.0) throw input_error("cover_grid: spacing must be positive");
  const Box bb = r.bounding_box();
  const int c = r.c;
  std::vector<long> n(c);
  double total = 1.0;
  for (int i = 0; i < c; ++i) {
    n[i] = static_cast<long>(std::ceil((bb.hi[i] - bb.lo[i]) / h)) + 1;
    total *= static_cast<double>(n[i]);
    if (total > 4.0 * static_cast<double>(cap))
      throw resource_error("cover_grid: lattice of ~" + std::to_string(total) +
                           " points exceeds the cap of " + std::to_string(cap));
  }
  Grid g;
  g.region = r;
  g.h = h;
  g.cell_correction = 0.5 * h * std::sqrt(double(c));
  std::vector<long> idx(c, 0);
  Vec x(c);
  while (true) {
    for (int i = 0; i < c; ++i) x[i] = bb.lo[i] + h * static_cast<double>(idx[i]);
    if (signed_distance(r, x) >= -g.cell_correction) {
      g.points.push_back(x);
      if (static_cast<long>(g.points.size()) > cap)
        throw resource_error("cover_grid: more than " + std::to_string(cap) + " grid points");
    }
    int k = 0;
    while (k < c && ++idx[k] == n[k]) idx[k++] = 0;
    if (k == c) break;
  }
  return g;
}

}  // namespace skewblend
