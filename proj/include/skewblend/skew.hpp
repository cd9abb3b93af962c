#ifndef SKEWBLEND_SKEW_HPP
#define SKEWBLEND_SKEW_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skewblend/region.hpp"
#include "skewblend/shift.hpp"
#include "skewblend/util.hpp"

namespace skewblend {

// Invertible affine map of R^c, possibly remembered as a composition of
// affine pieces.  The composed linear part, its inverse and its extreme
// singular values are cached; they are the tight Lipschitz bounds.
struct FiberMap {
  Mat A, Ainv;
  Vec b;
  double smin = 0.0, smax = 0.0;
  std::vector<std::pair<Mat, Vec>> pieces;  // retained for provenance only

  FiberMap() = default;
  static FiberMap affine(const Mat& A, const Vec& b);
  static FiberMap translation(const Vec& v);
  static FiberMap composed(const std::vector<FiberMap>& chain);  // chain[0] applied first

  int dim() const { return static_cast<int>(b.size()); }
  Vec apply(const Vec& x) const { return A * x + b; }
  Vec apply_inverse(const Vec& y) const { return Ainv * (y - b); }
  FiberMap inverse() const;
};

// Symbolic skew-product over the alphabet {1..d} with piecewise-affine fiber
// maps on R^c.  `window` = 1 is the one-step case (map keyed by xi_0);
// window = w keys the map by the future block (xi_0, ..., xi_{w-1}).
struct SkewSystem {
  int d = 0;
  int c = 0;
  double nu = 0.5;
  double alpha = 1.0;
  double gamma = 0.0;      // declared lower Lipschitz bound
  double gamma_hat = 0.0;  // declared: gamma_hat^{-1} is the upper bound
  double C0 = 0.0;         // declared Hoelder constant (0 for one-step)
  double LD = 0.0;         // declared Lipschitz bound of x -> Dphi(x)
  int window = 1;
  std::map<std::vector<Symbol>, FiberMap> maps;

  // Optional region-local lower/upper Lipschitz pair declared on a set D.
  std::optional<double> lambda_local;
  std::optional<double> beta_local;

  void set_map(Symbol s, FiberMap m);
  void set_map(const std::vector<Symbol>& window_key, FiberMap m);
  const FiberMap& map_for_key(const std::vector<Symbol>& key) const;
  // Fiber map at the shifted point tau^t(xi): keyed by (xi_t .. xi_{t+w-1}).
  const FiberMap& map_at(const TruncatedSequence& xi, long t) const;
  // All maps whose key starts with symbol s.
  std::vector<const FiberMap*> maps_with_head(Symbol s) const;
  std::vector<Symbol> symbols_used() const;

  bool one_step() const { return window == 1; }
  double gamma_hat_inv() const { return 1.0 / gamma_hat; }
  // Effective lower Lipschitz constant for refinement bounds on D.
  double lambda() const { return lambda_local.value_or(gamma); }

  // One-step system with every fiber map inverted and the declared constants
  // swapped accordingly; used for cu-mode checks and stable cones.
  SkewSystem inverted() const;
};

// phi^n_xi(x) = phi_{tau^{n-1} xi} o ... o phi_xi (x);   n = 0 is identity.
Vec compose_forward(const SkewSystem& sys, const TruncatedSequence& xi, long n, const Vec& x);
// phi^{-n}_xi(x) = phi^{-1}_{tau^{-n} xi} o ... o phi^{-1}_{tau^{-1} xi} (x).
Vec compose_backward(const SkewSystem& sys, const TruncatedSequence& xi, long n, const Vec& x);
// Product of Jacobians along the orbit; n may be negative.
Mat derivative_cocycle(const SkewSystem& sys, const TruncatedSequence& xi, long n, const Vec& x);

struct InequalityCheck {
  std::string name;
  double lhs = 0.0, rhs = 0.0;
  double slack() const { return rhs - lhs; }
  bool ok() const { return lhs < rhs; }
};

struct ConstantsReport {
  double gamma = 0, gamma_hat = 0, C0 = 0, nu = 0, alpha = 0, LD = 0;
  double tight_smin = 0, tight_smax = 0;
  bool declared_ok = true;        // declared bounds consistent with tight ones
  std::string offending_map;      // set when declared_ok is false
  std::vector<InequalityCheck> phs;   // the four PHS inequalities
  InequalityCheck bunching;
  bool phs_ok = false;
  bool bunched_ok = false;
  double min_phs_slack = 0.0;
};

// Checks the declared (gamma, gamma_hat) against the tight singular-value
// bounds of every fiber map and evaluates the PHS and fiber-bunching
// inequalities with slack.
ConstantsReport verify_constants(const SkewSystem& sys);

// Empirical lower bound for the Hoelder constant C0 over word pairs sharing
// the head symbol and sample points of `region`; exactly 0 for one-step.
double holder_constant_estimate(const SkewSystem& sys, const Region& region, int samples, Rng& rng);

// Validates an optionally declared region-local (lambda, beta) pair against
// the tight singular values (they must relax, not tighten, towards validity:
// lambda <= smin and beta >= smax on the maps).  Returns the effective lambda.
double effective_lambda(const SkewSystem& sys);

}  // namespace skewblend

#endif
