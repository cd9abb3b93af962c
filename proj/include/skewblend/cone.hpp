#ifndef SKEWBLEND_CONE_HPP
#define SKEWBLEND_CONE_HPP

#include <string>
#include <vector>

#include "skewblend/grassmann.hpp"
#include "skewblend/region.hpp"
#include "skewblend/skew.hpp"

namespace skewblend {

// l-cone: image under `basis` of the standard cone {(v,w): ||w|| <= rho ||v||}
// with v in R^l (the first l coordinates of the standard split).
struct Cone {
  int l = 0;
  double rho = 0.0;
  Mat basis, basis_inv;

  static Cone standard(int c, int l, double rho);
  // Standard cone whose v-block sits on the given axes of R^c.
  static Cone axes(int c, const std::vector<int>& v_axes, double rho);

  int c() const { return static_cast<int>(basis.rows()); }
  Plane axis_plane() const;  // the plane spanned by the v-block
};

struct ConeMembership {
  bool inside = false;
  double margin = 0.0;  // rho ||v|| - ||w|| in basis coordinates
};

ConeMembership cone_contains(const Cone& C, const Vec& x, bool strict);

struct ConeCertificate {
  bool ok = false;
  std::string failure;
  double lambda = 0.0;          // target rate: expansion must reach 1/lambda
  double min_margin = 0.0;      // strict invariance margin over sampled rays
  double min_expansion = 0.0;   // min ||Dphi v|| / ||v|| over the cone
  bool analytic_blocks = false; // block-diagonal shortcut applied to all maps
  Symbol witness_symbol = 0;
  Vec witness_v;
};

struct ConeOptions {
  std::vector<Symbol> symbols;  // defaults to every symbol of the system
  int rays = 64;                // extreme rays sampled per map
  int region_samples = 8;
};

// Unstable-cone check: every sampled extreme-ray image strictly inside the
// cone and expanded by at least 1/lambda; exact block bounds are used when
// the map is block-diagonal in cone coordinates.
ConeCertificate verify_unstable_cone(const SkewSystem& sys, const Cone& C, const Region& region,
                                     double lambda, int samples, Rng& rng, const ConeOptions& opts = {});

// Stable cones are unstable cones of the inverted system.
ConeCertificate verify_stable_cone(const SkewSystem& sys, const Cone& C, const Region& region,
                                   double lambda, int samples, Rng& rng, const ConeOptions& opts = {});

struct BackwardContractionReport {
  bool ok = false;
  bool pre_ok = true;
  int escape_step = -1;
  double fitted_rate = 0.0;     // exp of the log-linear slope
  double worst_excess = 0.0;    // max over k of ||Dphi^{-k} v|| / lambda^k
};

// Checks ||Dphi^{-k}_xi(x) v|| <= lambda^k ||v|| for 1 <= k <= n along an
// orbit that stays inside `region`, and fits the empirical decay rate.
BackwardContractionReport backward_contraction_check(const SkewSystem& sys, const Cone& C,
                                                     const TruncatedSequence& xi, const Vec& x, int n,
                                                     const Vec& v, double lambda, const Region& region);

// True iff every unit vector of E lies strictly inside C.  Exact for l = 1;
// otherwise a conservative sufficient test plus a sphere discretization.
bool cone_to_grassmann(const Cone& C, const Plane& E, double* margin = nullptr);

// Margin version over a chart ball: min cone membership margin over sampled
// boundary planes of the ball (the T3 containment quantity).
double cone_ball_margin(const Cone& C, const PlaneBall& ball, int samples, Rng& rng);

}  // namespace skewblend

#endif
