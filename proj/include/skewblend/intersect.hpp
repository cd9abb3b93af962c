#ifndef SKEWBLEND_INTERSECT_HPP
#define SKEWBLEND_INTERSECT_HPP

#include <map>
#include <string>
#include <vector>

#include "skewblend/blend.hpp"
#include "skewblend/shift.hpp"
#include "skewblend/skew.hpp"

namespace skewblend {

enum class DiscKind { constant, table, series };

// Graph of an (alpha, C)-Hoelder function over the local stable set of the
// base point, with values delta-close to x0 and C*nu^alpha < delta.
//
// Realizations of the graph:
//   constant: h == x0;
//   table:    h depends on the last k past symbols; the value of the longest
//             stored suffix wins, x0 when none matches;
//   series:   h(w) = x0 + amp * sum_j nu^{alpha j} * e(w_{-j}) * dir with
//             e(s) = 2(s-1)/(d-1) - 1, a genuinely infinite-depth graph with
//             C <= 2 amp nu^alpha / (1 - nu^alpha).
struct HorizontalDisc {
  TruncatedSequence base;
  DiscKind kind = DiscKind::constant;
  Vec x0;
  double C = 0.0;
  double alpha = 1.0;
  double delta = 0.0;
  std::map<std::vector<Symbol>, Vec> table;
  double series_amp = 0.0;
  Vec series_dir;
  double series_nu = 0.5;
  int series_d = 2;

  Vec eval(const std::vector<Symbol>& past_word) const;
};

// Checks the disc invariants (C nu^alpha < delta, values delta-close to x0,
// sampled Hoelder pairs within the declared constant).  Throws input_error.
void validate_disc(const HorizontalDisc& disc, double nu, Rng& rng, int samples = 200);

struct RefineStep {
  int element = -1;          // chosen cover element
  Word block;
  long m_n = 0;              // cumulative word length after this step
  double A_diam_bound = 0.0;  // bound for diam(A_{n-1}) used for the choice
  double depth_found = 0.0;   // depth of the chosen element at the set center
  double V_diam_bound = 0.0;  // C nu^{alpha m_n}
  double pullback_bound = 0.0;  // C (lambda^{-1} nu^alpha)^{m_n}
  double margin_B = 0.0;      // boundary image inside B
  double margin_D = 0.0;      // min intermediate image inside D
  bool A_diam_ok = false;     // diam(A) < L-hat
};

struct RefinementTrace {
  bool ok = false;
  std::string failure;
  int fail_step = -1;
  Vec fail_center;
  double fail_best_depth = 0.0;

  std::vector<RefineStep> steps;
  std::vector<int> chosen;         // element index sequence, first chosen first
  TruncatedSequence point_xi;      // past = refined word, future = disc base future
  Vec point_x;
  double error_radius = 0.0;
};

// Nested refinement: starting from the disc, repeatedly selects the least
// cover element whose depth at the current set's center exceeds the set's
// diameter bound, prepends its block, and tightens the value set; produces a
// point of Lambda^u meeting the disc, with per-step diameter and membership
// bounds recorded.
RefinementTrace refine_intersection(const CoveringCertificate& cert, const HorizontalDisc& disc, int N);

struct TransverseBoundReport {
  double bound = 0.0;
  int agreement = 0;       // exponent: d_Sigma <= nu^agreement over the cylinder
  double empirical_max = 0.0;
  bool pre_ok = true;
  int escape_step = -1;    // first backward step leaving closure(D), when any
};

// The Hoelder transverse bound for backward iterates over a bi-lateral
// cylinder: C0 * nu^{-alpha n} * sum_{j<n} (lambda^{-1} nu^alpha)^j * nu^{alpha*agreement},
// checked against the empirical spread of sampled cylinder completions.
TransverseBoundReport holder_transverse_bound(const SkewSystem& sys, const TruncatedSequence& word,
                                              const Vec& x, int n, const Region& D, int samples, Rng& rng);

struct LambdaUReport {
  bool ok = false;
  double margin = 0.0;       // best min-margin over admissible boundary chains
  long furthest_boundary = 0;
  std::vector<long> boundaries;  // the chain realizing the reported margin
};

// Checks that backward images of P at some chain of boundaries with gaps in
// `blocks` lie in B up to `depth`.
LambdaUReport verify_lambda_u(const SkewSystem& sys, const TruncatedSequence& xi, const Vec& x,
                              const Region& B, long depth, const std::vector<int>& blocks);

}  // namespace skewblend

#endif
