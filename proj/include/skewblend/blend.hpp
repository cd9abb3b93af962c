#ifndef SKEWBLEND_BLEND_HPP
#define SKEWBLEND_BLEND_HPP

#include <functional>
#include <string>
#include <vector>

#include "skewblend/region.hpp"
#include "skewblend/skew.hpp"

namespace skewblend {

// ---------------------------------------------------------------------------
// Generic rigorous covering check over a finite point cloud standing in for a
// compact set K:
//   - every point of K is within `correction` of some cloud point,
//   - depth(i, .) is 1-Lipschitz and depth_i(x) > 0 implies x in element i.
// The engine certifies closure(K) subset of the union of elements and returns
// a lower bound for the Lebesgue number of the cover.
// ---------------------------------------------------------------------------

struct CoverProblem {
  long npoints = 0;
  int nelements = 0;
  std::function<double(long, long)> dist;
  std::function<double(int, long)> depth;
  double correction = 0.0;
  double diameter_cap = 0.0;  // reported L-hat when one element covers all of K
};

struct CoverOutcome {
  bool covered = false;
  long witness = -1;
  double witness_best_depth = 0.0;
  int witness_best_element = -1;
  double min_max_depth = 0.0;
  double covering_margin = 0.0;  // min_max_depth - correction
  double lebesgue_lower = 0.0;
  std::string lebesgue_method;
};

// pair_budget caps the O(|complement|^2) anchored Lebesgue bound; past it the
// engine falls back to the cheaper (more conservative) ball bound.
CoverOutcome check_cover(const CoverProblem& p, long pair_budget = 50'000'000);

// ---------------------------------------------------------------------------
// Covering-property certificate on the fiber space.
// ---------------------------------------------------------------------------

enum class CoverMode { cs, cu };

struct ElementReport {
  Word block;
  double gamma_block = 0.0;    // tight lower Lipschitz of the composed map
  double image_in_D_margin = 0.0;  // min over intermediate steps
};

struct CoveringCertificate {
  bool ok = false;
  std::string failure;

  CoverMode mode = CoverMode::cs;
  std::vector<Word> blocks;
  Region B, D;
  double h = 0.0;
  double grid_correction = 0.0;
  long grid_points = 0;

  double lebesgue_lower = 0.0;
  std::string lebesgue_method;
  double covering_margin = 0.0;
  double bd_margin = 0.0;
  std::vector<ElementReport> elements;

  double lambda = 0.0;    // effective lower Lipschitz on D used in the bounds
  double C_hold = 0.0;    // C0 * (1 - lambda^{-1} nu^alpha)^{-1}
  InequalityCheck C_lt_L;
  double delta_max = 0.0;

  Vec witness_x;
  double witness_depth = 0.0;

  SkewSystem system;  // snapshot for replay (original orientation, not inverted)
  ConstantsReport constants;

  // Smallest of all strictly positive quantities the certificate rests on.
  double slack() const;
};

struct CoveringOptions {
  std::vector<Word> blocks;  // defaults to the single-symbol words of S
  long grid_cap = kDefaultGridCap;
  long pair_budget = 50'000'000;
};

// Verifies the covering property of B by the images (cs) or preimages (cu)
// of the fiber maps of the symbols in S, on a grid of spacing h, and emits
// the certificate with the Lebesgue lower bound, the Hoelder constant check
// and delta_max.
CoveringCertificate verify_covering(const SkewSystem& sys, const std::vector<Symbol>& S,
                                    const Region& B, const Region& D, double h,
                                    CoverMode mode = CoverMode::cs,
                                    const CoveringOptions& opts = {});

// Cover elements compiled to composed affine maps.  For window > 1 an
// element carries one variant per completion of the window beyond its block;
// the depth is the min over variants, which is exact for the declared finite
// window assignment.
struct ElementVariants {
  Word block;
  std::vector<FiberMap> variants;
  double gamma_block = 0.0;  // min over variants of the tight lower Lipschitz
};

struct CompiledElements {
  CoverMode mode = CoverMode::cs;
  std::vector<ElementVariants> elems;
};

CompiledElements compile_elements(const SkewSystem& sys, CoverMode mode,
                                  const std::vector<Word>& blocks);

// Lower bound for the inner depth of x inside the (pre)image union element:
// min over variants of gamma_v * signed_distance(B, variant^{-1}(x)).
double compiled_depth(const CompiledElements& ce, const Region& B, int element, const Vec& x);

// Depth of x inside the image of B under the element's map(s); what both the
// grid check and the nested refinement consume.
double element_depth(const SkewSystem& sys, const CoveringCertificate& cert, int element, const Vec& x);

// ---------------------------------------------------------------------------
// Translation families around a hyperbolic affine fixed point.
// ---------------------------------------------------------------------------

struct TranslationFamily {
  std::vector<FiberMap> maps;  // maps[0] is phi itself
  Region B, D;
  int k = 0;
  double delta = 0.0;
  std::vector<Vec> offsets;
  SkewSystem system;              // one-step system over the family
  CoveringCertificate self_check;  // the covering certificate of the family
};

struct TranslationOptions {
  CoverMode mode = CoverMode::cs;
  double grid_points_per_axis = 24.0;
  long map_cap = 4096;
};

// Builds translations T_i of an affine map phi with hyperbolic fixed point
// x_star so that B = ball(x_star, delta) is covered by the images T_i(phi(B))
// inside D subset of ball(x_star, 2*eps); verified by verify_covering before
// returning.  Requires the linear part to be diagonal (up to 1e-12).
TranslationFamily build_translation_family(const FiberMap& phi, const Vec& x_star, double eps,
                                           const TranslationOptions& opts = {});

// ---------------------------------------------------------------------------
// Structural hyperbolicity through per-block contraction on a product box.
// ---------------------------------------------------------------------------

struct ConleyMoserEntry {
  Symbol symbol = 0;
  double cs_contraction = 0.0;  // spectral norm of the cs block
  double cu_contraction = 0.0;  // spectral norm of the inverse cu block
  double cs_margin = 0.0;       // containment margin of the cs image
  double cu_margin = 0.0;
  bool ok = false;
  std::string note;
};

struct ConleyMoserCertificate {
  bool ok = false;
  std::string failure;
  int cs_index = 0;
  std::vector<ConleyMoserEntry> entries;
  double min_contraction_slack = 0.0;
  double min_margin = 0.0;
};

// Certifies, exactly for affine maps, that the cs sub-block of every map
// contracts closure(D_cs) into D_cs and the cu sub-block of every inverse
// contracts closure(D_cu) into D_cu.  D_cs and D_cu are single boxes in the
// split coordinates.  With require_block (the default) maps must be block
// triangular or diagonal with respect to the split; relaxing it keeps the
// same exact sub-block criterion for dense affine maps.
ConleyMoserCertificate verify_conley_moser(const SkewSystem& sys, const std::vector<Symbol>& S,
                                           const Region& D_cs, const Region& D_cu,
                                           bool require_block = true);

struct BlenderSpec {
  CoveringCertificate cover;
  ConleyMoserCertificate structure;
  int cs_index = 0;
  bool valid() const { return cover.ok && structure.ok; }
};

}  // namespace skewblend

#endif
