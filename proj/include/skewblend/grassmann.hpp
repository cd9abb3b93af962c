#ifndef SKEWBLEND_GRASSMANN_HPP
#define SKEWBLEND_GRASSMANN_HPP

#include <string>
#include <vector>

#include "skewblend/blend.hpp"
#include "skewblend/skew.hpp"

namespace skewblend {

// An l-plane in R^c held as a c x l frame with orthonormal columns.
struct Plane {
  Mat frame;

  Plane() = default;
  explicit Plane(Mat f) : frame(std::move(f)) {}
  // Orthonormalizes the column span (QR with positive diagonal convention).
  static Plane from_span(const Mat& span);
  static Plane coordinate(int c, const std::vector<int>& axes);

  int l() const { return static_cast<int>(frame.cols()); }
  int c() const { return static_cast<int>(frame.rows()); }
};

// d_G(E, F) = ||P_F|E - i_E|| = sigma_max((I - F F^T) E).  One-sided as
// defined; for equal-dimensional planes it coincides with the sine of the
// largest principal angle.
double plane_distance(const Plane& E, const Plane& F);

// The action E -> span(T E), re-orthonormalized deterministically.
Plane apply_linear(const Mat& T, const Plane& E);

struct BilipschitzReport {
  double observed_max = 0.0;
  double bound = 0.0;  // ||T|| * ||T^{-1}||
  bool ok = false;
};

// Samples plane pairs and checks d_G(TE, TF) <= ||T|| ||T^{-1}|| d_G(E, F).
BilipschitzReport bilipschitz_check(const Mat& T, int l, int samples, Rng& rng);

// ---------------------------------------------------------------------------
// Graph chart around a center plane: planes E_W = span(U0 + U_perp W) for
// W in R^{(c-l) x l}.  The chart op-norm ball {sigma_max(W) <= w} is exactly
// the d_G ball of radius w / sqrt(1 + w^2) around the center, and
// d_G(E_W, E_W') <= ||W - W'||_F  (checked as a property test).
// ---------------------------------------------------------------------------
struct PlaneChart {
  Plane center;
  Mat complement;  // c x (c-l), orthonormal, spanning the orthogonal complement

  explicit PlaneChart(const Plane& center_plane);
  Plane from_W(const Mat& W) const;
  Mat to_W(const Plane& E) const;  // requires E transversal to the complement
};

struct PlaneBall {
  Plane center;
  double radius = 0.0;  // in d_G
};

// ---------------------------------------------------------------------------
// The induced l-th Grassmannian skew-product.
// ---------------------------------------------------------------------------

struct LiftedSystem {
  SkewSystem base;
  int l = 0;
  double lip_forward = 0.0;   // max(gamma_hat^{-1} + gamma^{-1} L, (gamma gamma_hat)^{-1})
  double lip_backward = 0.0;  // same bound for the inverse fiber maps
  double gamma_lift = 0.0;    // declared lower Lipschitz of the lifted maps
  double gamma_hat_lift = 0.0;
  std::vector<InequalityCheck> checks;  // bunching, smallness, lifted PHS

  Mat action(const std::vector<Symbol>& key) const { return base.map_for_key(key).A; }
  // The lifted fiber map on R^c x G(l, c).
  std::pair<Vec, Plane> apply(const std::vector<Symbol>& key, const Vec& x, const Plane& E) const;
  std::pair<Vec, Plane> apply_inverse(const std::vector<Symbol>& key, const Vec& x, const Plane& E) const;
};

// Product metric on R^c x G(l,c): base distance plus d_G.
double lifted_distance(const Vec& x, const Plane& E, const Vec& y, const Plane& F);

// Builds the induced l-th Grassmannian skew-product; refuses (throws
// input_error) when fiber bunching or the derivative-Lipschitz smallness
// condition L < gamma (nu^{-alpha} - gamma_hat^{-1}) fails.
LiftedSystem lift_system(const SkewSystem& sys, int l);

// True iff the constants admit a lift; the predicate behind lift_system.
bool lift_admissible(double nu, double alpha, double gamma, double gamma_hat, double LD,
                     std::string* reason = nullptr);

// Empirical maximum of the lifted Lipschitz ratio over random pairs.
double lifted_lipschitz_empirical(const LiftedSystem& lift, int samples, Rng& rng);

// ---------------------------------------------------------------------------
// Rigorous covering on a chart ball of the Grassmannian: elements are the
// images of the ball under the plane actions of the given linear maps, with
// depth kappa_j * (r - d_G(center, T_j^{-1} E)) and kappa_j the bi-Lipschitz
// lower constant (||T|| ||T^{-1}||)^{-1}.
// ---------------------------------------------------------------------------

struct PlaneCoverCertificate {
  bool ok = false;
  std::string failure;
  PlaneBall ball;
  double hW = 0.0;
  double grid_correction = 0.0;
  long grid_points = 0;
  double lebesgue_lower = 0.0;
  std::string lebesgue_method;
  double covering_margin = 0.0;
  double kappa_min = 0.0;  // min over maps of the bi-Lipschitz lower constant
  int witness = -1;
  double witness_depth = 0.0;
};

PlaneCoverCertificate verify_plane_cover(const std::vector<Mat>& actions, const PlaneBall& ball,
                                         double hW, long grid_cap = kDefaultGridCap,
                                         long pair_budget = 50'000'000);

// Chart lattice over the ball (shared by the cover check and the lifted
// refinement machinery).
std::vector<Plane> plane_grid(const PlaneBall& ball, double hW, long cap = kDefaultGridCap);

}  // namespace skewblend

#endif
