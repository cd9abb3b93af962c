#ifndef SKEWBLEND_CYCLES_HPP
#define SKEWBLEND_CYCLES_HPP

#include <optional>
#include <string>
#include <vector>

#include "skewblend/blend.hpp"
#include "skewblend/cone.hpp"
#include "skewblend/grassmann.hpp"
#include "skewblend/intersect.hpp"

namespace skewblend {

// ---------------------------------------------------------------------------
// Transitions in the IFS semigroup
// ---------------------------------------------------------------------------

struct TransitionWitness {
  bool found = false;
  Word word;            // composition word, first symbol applied first
  FiberMap T;           // the composed map
  Vec x;                // source point
  Vec image;            // T(x)
  double margin = 0.0;  // depth of the image inside the target
  double near_miss = std::numeric_limits<double>::infinity();  // best distance on failure
  Vec near_miss_point;
};

// Deterministic seed list for a region source: centroid first, then one
// offset of a quarter width along each axis, negative before positive.
std::vector<Vec> transition_seeds(const Region& source);

// Breadth-first search over composition words in (length, lexicographic)
// order; returns the first witness whose image lies strictly inside the
// target with positive margin.
TransitionWitness find_transition(const SkewSystem& sys, const std::vector<Vec>& sources,
                                  const Region& target, int max_depth, double required_margin = 0.0);
TransitionWitness find_transition(const SkewSystem& sys, const Region& source,
                                  const Region& target, int max_depth, double required_margin = 0.0);

struct LiftedTransitionWitness {
  bool found = false;
  Word word;
  Vec x, image_x;
  Mat E_frame, image_E_frame;
  double margin = 0.0;
  double near_miss = std::numeric_limits<double>::infinity();
};

// Transition of the induced Grassmannian IFS into a product target
// B x (chart ball).
LiftedTransitionWitness find_transition_lifted(const SkewSystem& sys, const Vec& x0, const Plane& E0,
                                               const Region& targetB, const PlaneBall& targetG,
                                               int max_depth, double required_margin = 0.0);

// ---------------------------------------------------------------------------
// Robust-cycle certificates
// ---------------------------------------------------------------------------

struct CycleCertificate {
  bool ok = false;
  std::string failure;
  BlenderSpec cs, cu;
  TransitionWitness t12, t21;  // B1 -> B2 and B2 -> B1
  int co_index = 0;
  double region_gap_value = 0.0;
  double global_slack = 0.0;
};

CycleCertificate verify_cycle(const BlenderSpec& cs, const BlenderSpec& cu,
                              const TransitionWitness& t12, const TransitionWitness& t21);

// ---------------------------------------------------------------------------
// Tangent directions
// ---------------------------------------------------------------------------

struct TangentVectorResult {
  Vec v;
  bool passes = false;
  double worst_ratio = 0.0;  // max over n of ||Dphi^n v|| / (C lambda^{|n|})
  double rate_forward = 0.0;
  double rate_backward = 0.0;
  std::vector<double> norms;  // ||Dphi^n v|| for n = -N..N
};

struct TangentDirectionReport {
  int N = 0;
  double lambda = 0.0, Cbound = 0.0;
  bool horizon_too_small = false;
  std::vector<TangentVectorResult> vectors;
  int d_T = 0;  // rank of the passing set
};

TangentDirectionReport detect_tangent_directions(const SkewSystem& sys, const TruncatedSequence& xi,
                                                 const Vec& x, const std::vector<Vec>& candidates,
                                                 int N, double lambda, double Cbound);

struct CodimensionResult {
  int l = 0;
  int c_T = 0;
};

// c_T = c - [(c - i1) + i2 - l] = l - (i2 - i1); throws input_error when l is
// outside max(0, i2-i1) < l <= min(c-i1, i2).
CodimensionResult tangency_codimension(int c, int i1, int i2, int l);

// ---------------------------------------------------------------------------
// One-step tangency scenarios
// ---------------------------------------------------------------------------

enum class ScenarioVariant { cycle, homoclinic, identity_arc };

struct ScenarioOptions {
  ScenarioVariant variant = ScenarioVariant::cycle;
  int base_grid_per_axis = 19;
  int plane_grid_per_axis = 21;
  int refine_depth = 24;
  int horizon = 20;
  unsigned long long seed = 0;
};

struct ScenarioGeometry {
  int c = 0, i1 = 0, i2 = 0, l = 0;
  double eps = 0.0;
  ScenarioVariant variant = ScenarioVariant::cycle;
  Vec p, q;
  Region B1, D1, B2, D2;
  Region D1_cs, D1_cu, D2_cs, D2_cu;
  std::vector<Symbol> S1, S2;
  int fam1_base = 0, fam1_twists = 0, fam2_base = 0, fam2_twists = 0;
  Symbol pure1 = 0, pure2 = 0, conn12 = 0, conn21 = 0;
  Cone cone_uu, cone_ss;
  PlaneBall G1, G2;
  double base_h1 = 0.0, base_h2 = 0.0, plane_h1 = 0.0, plane_h2 = 0.0;
  double lambda_u = 0.0, lambda_s = 0.0;
  double design_rate_forward = 0.0;   // contraction seen forward at the tangency
  double design_rate_backward = 0.0;  // contraction seen backward
  int refine_depth = 24, horizon = 20;
};

struct StageResult {
  std::string name;
  bool ok = false;
  double slack = 0.0;
  std::string detail;
};

struct LiftedCoverSummary {
  bool ok = false;
  double min_base_margin = 0.0;   // worst per-twist base covering margin
  double min_base_lebesgue = 0.0;
  double plane_margin = 0.0;
  double plane_lebesgue = 0.0;
  double lebesgue_lower = 0.0;  // min of the factors
  double delta_max = 0.0;
  std::string failure;
};

struct LiftedRefineTrace {
  bool ok = false;
  std::string failure;
  std::vector<Symbol> word;  // refined past word, most recent symbol first
  Vec point_x;
  Mat point_E_frame;
  double min_depth = 0.0;
  double min_margin_B = 0.0;
};

struct TangencyCertificate {
  bool ok = false;
  std::string failing_stage;
  ScenarioGeometry geom;
  SkewSystem system;

  ConstantsReport constants;
  std::vector<InequalityCheck> lift_checks;
  double lifted_bound_forward = 0.0, lifted_bound_backward = 0.0;
  CoveringCertificate cover1, cover2;  // whole-family base cs/cu covers
  ConleyMoserCertificate conley1, conley2;
  ConeCertificate cone_u, cone_s;
  LiftedCoverSummary lifted1, lifted2;
  double t3_margin1 = 0.0, t3_margin2 = 0.0;
  LiftedTransitionWitness t_hat;
  TransitionWitness t12, t21;
  LiftedRefineTrace refinement;
  LambdaUReport base_lambda_u;
  TangentDirectionReport tangent;
  int d_T = 0, c_T = 0;
  double rate_forward = 0.0, rate_backward = 0.0;

  std::vector<StageResult> stages;
  double global_slack = 0.0;
};

// Builds a one-step system on R^c realizing a robust bundle tangency of
// dimension l between blenders of cs-indices i1 and i2 and verifies every
// stage, returning the composite certificate (partial when a stage fails).
TangencyCertificate build_tangency_scenario(int c, int i1, int i2, int l, double eps,
                                            const ScenarioOptions& opts = {});

// Re-runs every stage of the certificate against a (possibly perturbed)
// system.  Used by the certificate replay and the robustness probe.
TangencyCertificate replay_tangency(const ScenarioGeometry& geom, const SkewSystem& system,
                                    const ScenarioOptions& opts = {});

struct ProbeTrialResult {
  int trial = 0;
  bool ok = false;
  std::string failing_stage;
  double slack = 0.0;
};

struct ProbeReport {
  double eta = 0.0;
  int trials = 0;
  int passed = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  std::vector<ProbeTrialResult> results;
};

// Applies i.i.d. random affine perturbations (translation plus linear part of
// operator norm <= eta) to every fiber map and replays the full stack.
ProbeReport robustness_probe(const TangencyCertificate& cert, double eta, int trials,
                             unsigned long long seed);
ProbeReport robustness_probe_cycle(const CycleCertificate& cert, double eta, int trials,
                                   unsigned long long seed);

}  // namespace skewblend

#endif
