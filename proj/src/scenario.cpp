#include <algorithm>
#include <cmath>
#include <sstream>

#include "skewblend/cycles.hpp"

// One-step tangency scenarios: a hyperbolic affine saddle near p covered by a
// translation family with orthogonal Grassmannian twists, a mirrored family
// near q driven through the inverse, and two rotation connectors that realize
// the transitions of the base and of the lifted IFS.

namespace skewblend {

namespace {

struct Ladder {
  double s1, mid1, u1;   // rates near p: dims [0,i1), [i1,c-l), [c-l,c)
  double ss2, s2, u2;    // rates near q: dims [0,l), [l,i2), [i2,c)
};

Ladder scenario_ladder(double expo) {
  const auto pw = [expo](double r) { return std::pow(r, expo); };
  return {pw(0.88), pw(1.10), pw(1.25), pw(0.78), pw(0.90), pw(1.15)};
}

Mat givens(int c, int a, int b, double theta) {
  Mat G = Mat::Identity(c, c);
  G(a, a) = std::cos(theta);
  G(b, b) = std::cos(theta);
  G(a, b) = -std::sin(theta);
  G(b, a) = std::sin(theta);
  return G;
}

// Twist patterns over the chart entries: the zero pattern first, then the
// remaining sign patterns in lexicographic order.
std::vector<std::vector<int>> twist_patterns(int dim) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<size_t>(dim), -1);
  std::vector<std::vector<int>> all;
  while (true) {
    all.push_back(cur);
    int k = 0;
    while (k < dim && cur[static_cast<size_t>(k)] == 1) cur[static_cast<size_t>(k++)] = -1;
    if (k == dim) break;
    ++cur[static_cast<size_t>(k)];
  }
  const std::vector<int> zero(static_cast<size_t>(dim), 0);
  out.push_back(zero);
  for (const auto& p : all)
    if (p != zero) out.push_back(p);
  return out;
}

// Twist for one pattern: a product of Givens rotations, one per nonzero chart
// entry (complement axis, plane axis).
Mat twist_matrix(int c, const std::vector<int>& comp_axes, const std::vector<int>& plane_axes,
                 const std::vector<int>& pattern, double theta) {
  Mat T = Mat::Identity(c, c);
  int e = 0;
  for (size_t bj = 0; bj < plane_axes.size(); ++bj)
    for (size_t ai = 0; ai < comp_axes.size(); ++ai) {
      const int sgn = pattern[static_cast<size_t>(e++)];
      if (sgn != 0)
        T = givens(c, comp_axes[ai], plane_axes[bj], double(sgn) * theta) * T;
    }
  return T;
}

std::vector<std::vector<double>> offset_lattice(const std::vector<int>& dims,
                                                 const std::vector<double>& mags, int c) {
  std::vector<std::vector<double>> out;
  const long n = 1L << dims.size();
  for (long mask = 0; mask < n; ++mask) {
    std::vector<double> v(static_cast<size_t>(c), 0.0);
    for (size_t t = 0; t < dims.size(); ++t)
      v[static_cast<size_t>(dims[t])] = (mask >> t & 1) ? mags[t] : -mags[t];
    out.push_back(v);
  }
  return out;
}

Region subbox(const Vec& center, double half, int from, int to) {
  return Region::cube(center.segment(from, to - from), half);
}

double stage_min(const std::vector<double>& xs) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::min(m, x);
  return m;
}

// Fast depth of x inside phi(B) for a cube B: sigma_min * sd(B, phi^{-1} x).
double cube_depth(const FiberMap& m, const Vec& center, double half, const Vec& x) {
  const Vec y = m.apply_inverse(x);
  double sd = std::numeric_limits<double>::infinity();
  for (int i = 0; i < y.size(); ++i)
    sd = std::min(sd, half - std::abs(y[i] - center[i]));
  return m.smin * sd;
}

// sigma_max via the Gram matrix; closed form for one or two columns.
double sigma_max_small(const Mat& W) {
  if (W.cols() == 1) return W.col(0).norm();
  if (W.cols() == 2) {
    const double a = W.col(0).squaredNorm(), b = W.col(1).squaredNorm();
    const double cdot = W.col(0).dot(W.col(1));
    const double tr = a + b, det = a * b - cdot * cdot;
    return std::sqrt(0.5 * (tr + std::sqrt(std::max(tr * tr - 4.0 * det, 0.0))));
  }
  Eigen::JacobiSVD<Mat> svd(W);
  return svd.singularValues().maxCoeff();
}

// d_G(coordinate chart center, plane 'span') using the graph form: exact
// sigma_max of W = M_comp * M_plane^{-1} turned into a sine.
double chart_distance(const Mat& span, const std::vector<int>& plane_axes,
                      const std::vector<int>& comp_axes) {
  const int l = static_cast<int>(plane_axes.size());
  Mat top(l, l), bot(static_cast<int>(comp_axes.size()), l);
  for (int j = 0; j < l; ++j) {
    for (int i = 0; i < l; ++i) top(i, j) = span(plane_axes[static_cast<size_t>(i)], j);
    for (size_t i = 0; i < comp_axes.size(); ++i) bot(static_cast<int>(i), j) = span(comp_axes[i], j);
  }
  double det;
  Mat top_inv(l, l);
  if (l == 1) {
    det = top(0, 0);
    if (std::abs(det) < 1e-13) return 1.0;  // beyond the chart: maximal distance
    top_inv(0, 0) = 1.0 / det;
  } else if (l == 2) {
    det = top(0, 0) * top(1, 1) - top(0, 1) * top(1, 0);
    if (std::abs(det) < 1e-13) return 1.0;
    top_inv << top(1, 1), -top(0, 1), -top(1, 0), top(0, 0);
    top_inv /= det;
  } else {
    Eigen::FullPivLU<Mat> lu(top);
    if (!lu.isInvertible()) return 1.0;
    top_inv = lu.inverse();
  }
  const double t = sigma_max_small(bot * top_inv);
  return t / std::sqrt(1.0 + t * t);
}

}  // namespace

// ---------------------------------------------------------------------------
// Geometry + system construction
// ---------------------------------------------------------------------------

namespace {

struct Built {
  ScenarioGeometry geom;
  SkewSystem sys;
};

Built build_geometry(int c, int i1, int i2, int l, double eps, const ScenarioOptions& opts) {
  if (eps <= 0.0)
    throw input_error("scenario: eps must be positive (the eps = 0 endpoint has identity maps and fails PHS)");
  tangency_codimension(c, i1, i2, l);  // validates the index range
  if (opts.variant == ScenarioVariant::homoclinic && i1 != i2)
    throw input_error("scenario: the homoclinic variant needs i1 == i2");

  const double expo = (opts.variant == ScenarioVariant::identity_arc) ? std::min(eps, 1.0) : 1.0;
  const Ladder R = scenario_ladder(expo);

  ScenarioGeometry g;
  g.c = c;
  g.i1 = i1;
  g.i2 = i2;
  g.l = l;
  g.eps = eps;
  g.variant = opts.variant;
  g.refine_depth = std::max(opts.refine_depth, opts.horizon + 4);
  g.horizon = opts.horizon;

  g.p = Vec::Zero(c);
  g.p[0] = -1.25 * eps;
  g.q = Vec::Zero(c);
  g.q[0] = (opts.variant == ScenarioVariant::homoclinic) ? -1.25 * eps : 1.25 * eps;

  const double delta = 0.20 * eps, Dhalf = 1.2 * eps;
  g.B1 = Region::cube(g.p, delta);
  g.D1 = Region::cube(g.p, Dhalf);
  g.B2 = Region::cube(g.q, delta);
  g.D2 = Region::cube(g.q, Dhalf);
  g.D1_cs = subbox(g.p, Dhalf, 0, i1);
  g.D1_cu = subbox(g.p, Dhalf, i1, c);
  g.D2_cs = subbox(g.q, Dhalf, 0, i2);
  g.D2_cu = subbox(g.q, Dhalf, i2, c);

  Mat A1 = Mat::Identity(c, c), A2 = Mat::Identity(c, c);
  for (int i = 0; i < c; ++i) {
    A1(i, i) = i < i1 ? R.s1 : (i < c - l ? R.mid1 : R.u1);
    A2(i, i) = i < l ? R.ss2 : (i < i2 ? R.s2 : R.u2);
  }

  // Chart axes: side 1 works around E^uu (the last l axes), side 2 around the
  // stable plane (the first l axes).
  std::vector<int> uu_axes, ss_axes, comp1, comp2;
  for (int i = c - l; i < c; ++i) uu_axes.push_back(i);
  for (int i = 0; i < l; ++i) ss_axes.push_back(i);
  for (int i = 0; i < c - l; ++i) comp1.push_back(i);
  for (int i = l; i < c; ++i) comp2.push_back(i);

  const double wmax = 0.025;
  const double rG = wmax / std::sqrt(1.0 + wmax * wmax);
  g.G1 = {Plane::coordinate(c, uu_axes), rG};
  g.G2 = {Plane::coordinate(c, ss_axes), rG};
  g.cone_uu = Cone::axes(c, uu_axes, 0.25);
  g.cone_ss = Cone::axes(c, ss_axes, 0.25);
  g.lambda_u = 0.85;
  g.lambda_s = 0.85;

  const double theta = std::atan(0.65 * wmax);
  const int dimW = l * (c - l);
  const auto patterns = twist_patterns(dimW);

  // Translation lattices: full offsets along the contracted axes, smaller
  // ones along the mildly expanding middle axes (containment limits them).
  std::vector<int> odims1, odims2;
  std::vector<double> mags1, mags2;
  for (int i = 0; i < c - l; ++i) {
    odims1.push_back(i);
    mags1.push_back((i < i1 ? 0.35 : 0.30) * delta);
  }
  for (int i = l; i < c; ++i) {
    odims2.push_back(i);
    mags2.push_back((i < i2 ? 0.30 : 0.35) * delta);
  }
  const auto off1 = offset_lattice(odims1, mags1, c);
  const auto off2 = offset_lattice(odims2, mags2, c);

  g.fam1_twists = static_cast<int>(patterns.size());
  g.fam1_base = static_cast<int>(off1.size());
  g.fam2_twists = static_cast<int>(patterns.size());
  g.fam2_base = static_cast<int>(off2.size());

  SkewSystem sys;
  sys.c = c;
  sys.nu = 0.5;
  sys.alpha = 1.0;
  Symbol next = 1;
  std::vector<FiberMap> maps;
  const auto push = [&](const FiberMap& m) {
    maps.push_back(m);
    return next++;
  };

  // Family near p: phi(x) = T_j A1 (x - p) + p + v_i.
  g.pure1 = push(FiberMap::affine(A1, g.p - A1 * g.p));
  g.S1.push_back(g.pure1);
  for (const auto& pat : patterns) {
    const Mat T = twist_matrix(c, comp1, uu_axes, pat, theta) * A1;
    for (const auto& v : off1) {
      Vec b = g.p - T * g.p;
      for (int i = 0; i < c; ++i) b[i] += v[static_cast<size_t>(i)];
      g.S1.push_back(push(FiberMap::affine(T, b)));
    }
  }
  // Family near q, driven through the inverse: psi^{-1}(y) = (T_j A2)^{-1}(y - q) + q + u_i.
  g.pure2 = push(FiberMap::affine(A2, g.q - A2 * g.q));
  g.S2.push_back(g.pure2);
  for (const auto& pat : patterns) {
    // The twist composes on the side that acts last in the inverse, so the
    // chart offsets of the preimage elements keep their full size.
    const Mat T = A2 * twist_matrix(c, comp2, ss_axes, pat, theta);
    for (const auto& u : off2) {
      Vec shift = Vec::Zero(c);
      for (int i = 0; i < c; ++i) shift[i] = u[static_cast<size_t>(i)];
      // psi(x) = T (x - q - u) + q
      g.S2.push_back(push(FiberMap::affine(T, g.q - T * (g.q + shift))));
    }
  }

  // Connectors: an orthogonal permutation sending E^uu at p onto the stable
  // plane at q, the p middle block into the expanding block at q, and the
  // stable block at p onto what remains.
  Mat P = Mat::Zero(c, c);
  {
    std::vector<int> targets;  // image axis of source axis k
    targets.resize(static_cast<size_t>(c), -1);
    int mid_count = c - i1 - l;
    for (int j = 0; j < l; ++j) targets[static_cast<size_t>(c - l + j)] = j;  // uu -> stable plane
    for (int j = 0; j < mid_count; ++j) targets[static_cast<size_t>(i1 + j)] = i2 + j;  // mid -> expanding
    std::vector<int> remaining;
    for (int a = 0; a < c; ++a) {
      bool taken = false;
      for (int k = 0; k < c; ++k) taken = taken || targets[static_cast<size_t>(k)] == a;
      if (!taken) remaining.push_back(a);
    }
    size_t r = 0;
    for (int k = 0; k < i1; ++k) targets[static_cast<size_t>(k)] = remaining[r++];
    for (int k = 0; k < c; ++k) P(targets[static_cast<size_t>(k)], k) = 1.0;
  }
  g.conn12 = push(FiberMap::affine(P, g.q - P * g.p));
  g.conn21 = push(FiberMap::affine(P.transpose(), g.p - P.transpose() * g.q));

  sys.d = next - 1;
  double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
  for (const auto& m : maps) {
    smin = std::min(smin, m.smin);
    smax = std::max(smax, m.smax);
  }
  sys.gamma = 0.995 * smin;
  sys.gamma_hat = 1.0 / (1.005 * smax);
  for (int i = 0; i < sys.d; ++i) sys.set_map(i + 1, maps[static_cast<size_t>(i)]);

  g.base_h1 = 2.0 * delta / double(opts.base_grid_per_axis - 1);
  g.base_h2 = g.base_h1;
  g.plane_h1 = 2.0 * wmax / double(std::max(opts.plane_grid_per_axis, 2 * dimW + 3) - 1);
  g.plane_h2 = g.plane_h1;

  g.design_rate_forward = R.ss2;
  g.design_rate_backward = 1.0 / R.u1;

  Built b;
  b.geom = g;
  b.sys = sys;
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stage machinery (shared by build, replay and probe)
// ---------------------------------------------------------------------------

namespace {

// Grid points of a cube region (fast path; mirrors cover_grid semantics).
std::vector<Vec> cube_grid(const Vec& center, double half, double h) {
  Region r = Region::cube(center, half);
  Grid grid = cover_grid(r, h);
  return grid.points;
}

struct FamilyCoverResult {
  bool ok = true;
  double min_margin = std::numeric_limits<double>::infinity();   // covering margin over all twists
  double min_lebesgue = std::numeric_limits<double>::infinity();  // margin-fallback bound
  double image_margin = std::numeric_limits<double>::infinity();  // images stay in D
  std::string failure;
};

// Per-twist covering check of B by the images of the 2^k offset maps sharing
// one twist (cs side), or their preimages (cu side).  Runs in the max metric:
// the cell correction is h/2 independently of the dimension, the pullback
// transfer constant is the row-sum norm of the inverse linear part, and the
// box signed distance is 1-Lipschitz for it.  A bound in the max metric is
// also a Euclidean lower bound, since Euclidean balls sit inside max balls.
FamilyCoverResult family_cover(const SkewSystem& sys, const ScenarioGeometry& g, bool side1) {
  FamilyCoverResult res;
  const Vec& center = side1 ? g.p : g.q;
  const Region& D = side1 ? g.D1 : g.D2;
  const double half = 0.20 * g.eps;
  const double h = side1 ? g.base_h1 : g.base_h2;
  const int twists = side1 ? g.fam1_twists : g.fam2_twists;
  const int base = side1 ? g.fam1_base : g.fam2_base;
  const std::vector<Symbol>& S = side1 ? g.S1 : g.S2;

  const std::vector<Vec> pts = cube_grid(center, half, h);
  const double corr = 0.5 * h;

  // On the cu side everything runs through the inverse maps.
  std::vector<FiberMap> fams;
  std::vector<double> inv_lip;  // row-sum norm of the inverse linear part
  fams.reserve(static_cast<size_t>(twists) * static_cast<size_t>(base));
  for (int j = 0; j < twists; ++j)
    for (int i = 0; i < base; ++i) {
      const Symbol s = S[static_cast<size_t>(1 + j * base + i)];
      const FiberMap& m = sys.map_for_key({s});
      fams.push_back(side1 ? m : m.inverse());
      double linf = 0.0;
      for (int r = 0; r < g.c; ++r) linf = std::max(linf, fams.back().Ainv.row(r).cwiseAbs().sum());
      inv_lip.push_back(linf);
    }

  for (int j = 0; j < twists && res.ok; ++j) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& x : pts) {
      double best = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < base; ++i) {
        const FiberMap& m = fams[static_cast<size_t>(j * base + i)];
        const Vec y = m.apply_inverse(x);
        double sd = std::numeric_limits<double>::infinity();
        for (int d = 0; d < g.c; ++d) sd = std::min(sd, half - std::abs(y[d] - center[d]));
        best = std::max(best, sd / inv_lip[static_cast<size_t>(j * base + i)]);
        if (best >= worst) break;  // cannot lower the running minimum
      }
      worst = std::min(worst, best);
      if (worst <= corr) break;
    }
    const double margin = worst - corr;
    res.min_margin = std::min(res.min_margin, margin);
    res.min_lebesgue = std::min(res.min_lebesgue, std::max(margin, 0.0));
    if (margin <= 0.0) {
      res.ok = false;
      res.failure = "twist group " + std::to_string(j) + " does not cover B (margin " +
                    std::to_string(margin) + ")";
    }
  }

  // Images of B stay in D (forward images on the cs side, preimages cu side);
  // checked on the corners plus the center, exact for cubes under affine maps
  // up to the convexity of the signed distance along the cube.
  const Box bb = Region::cube(center, half).bounding_box();
  std::vector<Vec> probes{center};
  for (long mask = 0; mask < (1L << g.c); ++mask) {
    Vec x(g.c);
    for (int i = 0; i < g.c; ++i) x[i] = (mask >> i & 1) ? bb.hi[i] : bb.lo[i];
    probes.push_back(x);
  }
  for (const FiberMap& use : fams) {
    for (const auto& x : probes) {
      const double sd = signed_distance(D, use.apply(x));
      res.image_margin = std::min(res.image_margin, sd);
    }
    if (res.image_margin <= 0.0 && res.ok) {
      res.ok = false;
      res.failure = "family image leaves D (margin " + std::to_string(res.image_margin) + ")";
      break;
    }
  }
  return res;
}

struct PlaneCoverResult {
  bool ok = true;
  double min_margin = std::numeric_limits<double>::infinity();
  double lebesgue = 0.0;
  double kappa_min = std::numeric_limits<double>::infinity();
  std::string failure;
};

// Covering of the chart ball by the plane actions of the twisted linear
// parts; one action per twist pattern.  Depth kappa * (r - pullback distance)
// with kappa the bi-Lipschitz lower constant of the action.
PlaneCoverResult plane_family_cover(const SkewSystem& sys, const ScenarioGeometry& g, bool side1) {
  PlaneCoverResult res;
  const PlaneBall& ball = side1 ? g.G1 : g.G2;
  const double hW = side1 ? g.plane_h1 : g.plane_h2;
  const int twists = side1 ? g.fam1_twists : g.fam2_twists;
  const int base = side1 ? g.fam1_base : g.fam2_base;
  const std::vector<Symbol>& S = side1 ? g.S1 : g.S2;

  std::vector<int> plane_axes, comp_axes;
  for (int j = 0; j < ball.center.l(); ++j) {
    int axis = -1;
    for (int i = 0; i < g.c; ++i)
      if (std::abs(ball.center.frame(i, j) - 1.0) < 1e-12) axis = i;
    plane_axes.push_back(axis);
  }
  for (int i = 0; i < g.c; ++i)
    if (std::find(plane_axes.begin(), plane_axes.end(), i) == plane_axes.end()) comp_axes.push_back(i);

  // One representative per twist: the plane action ignores the offsets.
  std::vector<Mat> actions;
  for (int j = 0; j < twists; ++j) {
    const Symbol s = S[static_cast<size_t>(1 + j * base)];
    const FiberMap& m = sys.map_for_key({s});
    actions.push_back(side1 ? m.A : m.Ainv);
  }
  std::vector<Mat> action_inv;
  std::vector<double> kappa;
  for (const auto& T : actions) {
    Eigen::JacobiSVD<Mat> svd(T);
    const double k = svd.singularValues().minCoeff() / svd.singularValues().maxCoeff();
    kappa.push_back(k);
    res.kappa_min = std::min(res.kappa_min, k);
    action_inv.push_back(T.inverse());
  }

  const std::vector<Plane> pts = plane_grid(ball, hW);
  const int dimW = static_cast<int>(plane_axes.size()) * static_cast<int>(comp_axes.size());
  const double corr = 0.5 * hW * std::sqrt(double(dimW));
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& E : pts) {
    double best = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < actions.size(); ++j) {
      const Mat span = action_inv[j] * E.frame;
      const double d = chart_distance(span, plane_axes, comp_axes);
      best = std::max(best, kappa[j] * (ball.radius - d));
      if (best > corr) break;  // covered; margins tracked through `worst`
    }
    worst = std::min(worst, best);
  }
  res.min_margin = worst - corr;
  res.lebesgue = std::max(res.min_margin, 0.0);
  if (res.min_margin <= 0.0) {
    res.ok = false;
    res.failure = "plane cover margin " + std::to_string(res.min_margin);
  }
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lifted refinement (constant discs)
// ---------------------------------------------------------------------------

namespace {

LiftedRefineTrace refine_lifted_const(const SkewSystem& sys, const ScenarioGeometry& g,
                                      const Vec& x0, const Plane& E0, int N) {
  LiftedRefineTrace tr;
  Vec x = x0;
  Plane E = E0;
  tr.min_depth = std::numeric_limits<double>::infinity();
  tr.min_margin_B = std::numeric_limits<double>::infinity();
  std::vector<int> plane_axes, comp_axes;
  for (int i = g.c - g.l; i < g.c; ++i) plane_axes.push_back(i);
  for (int i = 0; i < g.c - g.l; ++i) comp_axes.push_back(i);

  for (int n = 0; n < N; ++n) {
    int chosen = -1;
    double chosen_depth = 0.0;
    for (Symbol s : g.S1) {
      const FiberMap& m = sys.map_for_key({s});
      const double db = cube_depth(m, g.p, 0.25 * g.eps, x);
      if (db <= 0.0) continue;
      const Mat span = m.Ainv * E.frame;
      const double dg = chart_distance(span, plane_axes, comp_axes);
      Eigen::JacobiSVD<Mat> svd(m.A);
      const double kap = svd.singularValues().minCoeff() / svd.singularValues().maxCoeff();
      const double dp = kap * (g.G1.radius - dg);
      if (dp <= 0.0) continue;
      chosen = s;
      chosen_depth = std::min(db, dp);
      break;
    }
    if (chosen < 0) {
      tr.failure = "lifted refinement stuck at step " + std::to_string(n + 1);
      return tr;
    }
    const FiberMap& m = sys.map_for_key({chosen});
    x = m.apply_inverse(x);
    E = apply_linear(m.Ainv, E);
    tr.word.insert(tr.word.begin(), chosen);
    tr.min_depth = std::min(tr.min_depth, chosen_depth);
    tr.min_margin_B = std::min(tr.min_margin_B, signed_distance(g.B1, x));
  }
  tr.ok = true;
  tr.point_x = x0;
  tr.point_E_frame = E0.frame;
  return tr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Full replay
// ---------------------------------------------------------------------------

TangencyCertificate replay_tangency(const ScenarioGeometry& geom, const SkewSystem& system,
                                    const ScenarioOptions& opts) {
  TangencyCertificate cert;
  cert.geom = geom;
  cert.system = system;
  Rng rng(opts.seed + 0x7a9e11);
  std::vector<StageResult>& stages = cert.stages;
  const auto fail = [&](const std::string& name, const std::string& why) {
    cert.failing_stage = name;
    stages.push_back({name, false, 0.0, why});
  };
  const auto pass = [&](const std::string& name, double slack, const std::string& detail = "") {
    stages.push_back({name, true, slack, detail});
  };

  // 1. constants
  cert.constants = verify_constants(system);
  if (!cert.constants.declared_ok || !cert.constants.phs_ok) {
    fail("constants", cert.constants.declared_ok ? "PHS inequalities fail" : cert.constants.offending_map);
    return cert;
  }
  const double decl_slack = std::min(cert.constants.tight_smin - system.gamma,
                                     system.gamma_hat_inv() - cert.constants.tight_smax);
  pass("constants", std::min({cert.constants.min_phs_slack, cert.constants.bunching.slack(), decl_slack}));

  // 2. lift
  try {
    LiftedSystem lift = lift_system(system, geom.l);
    cert.lift_checks = lift.checks;
    cert.lifted_bound_forward = lift.lip_forward;
    cert.lifted_bound_backward = lift.lip_backward;
    double s = std::numeric_limits<double>::infinity();
    for (const auto& q : lift.checks) s = std::min(s, q.slack());
    pass("lift", s);
  } catch (const input_error& e) {
    fail("lift", e.what());
    return cert;
  }

  // 3/4. base covers per twist group, plus the certified zero-twist cover.
  for (bool side1 : {true, false}) {
    const std::string name = side1 ? "cover-cs" : "cover-cu";
    const FamilyCoverResult fc = family_cover(system, geom, side1);
    auto& summary = side1 ? cert.lifted1 : cert.lifted2;
    summary.min_base_margin = fc.min_margin;
    summary.min_base_lebesgue = fc.min_lebesgue;
    if (!fc.ok) {
      fail(name, fc.failure);
      return cert;
    }
    // The zero-twist group as a replayable covering certificate.
    std::vector<Symbol> sub;
    const auto& S = side1 ? geom.S1 : geom.S2;
    const int base = side1 ? geom.fam1_base : geom.fam2_base;
    for (int i = 0; i < base; ++i) sub.push_back(S[static_cast<size_t>(1 + i)]);
    auto& cover = side1 ? cert.cover1 : cert.cover2;
    cover = verify_covering(system, sub, side1 ? geom.B1 : geom.B2, side1 ? geom.D1 : geom.D2,
                            side1 ? geom.base_h1 : geom.base_h2,
                            side1 ? CoverMode::cs : CoverMode::cu);
    if (!cover.ok) {
      fail(name, "zero-twist cover: " + cover.failure);
      return cert;
    }
    pass(name, std::min({fc.min_margin, fc.image_margin, cover.slack()}));
  }

  // 5/6. structural hyperbolicity
  cert.conley1 = verify_conley_moser(system, geom.S1, geom.D1_cs, geom.D1_cu, false);
  if (!cert.conley1.ok) {
    fail("conley-cs", cert.conley1.failure);
    return cert;
  }
  pass("conley-cs", std::min(cert.conley1.min_contraction_slack, cert.conley1.min_margin));
  cert.conley2 = verify_conley_moser(system, geom.S2, geom.D2_cs, geom.D2_cu, false);
  if (!cert.conley2.ok) {
    fail("conley-cu", cert.conley2.failure);
    return cert;
  }
  pass("conley-cu", std::min(cert.conley2.min_contraction_slack, cert.conley2.min_margin));

  // 7/8. cones
  ConeOptions co1;
  co1.symbols = geom.S1;
  cert.cone_u = verify_unstable_cone(system, geom.cone_uu, geom.D1, geom.lambda_u, 64, rng, co1);
  if (!cert.cone_u.ok) {
    fail("cone-unstable", cert.cone_u.failure);
    return cert;
  }
  pass("cone-unstable", std::min(cert.cone_u.min_margin, cert.cone_u.min_expansion - 1.0 / geom.lambda_u));
  ConeOptions co2;
  co2.symbols = geom.S2;
  cert.cone_s = verify_stable_cone(system, geom.cone_ss, geom.D2, geom.lambda_s, 64, rng, co2);
  if (!cert.cone_s.ok) {
    fail("cone-stable", cert.cone_s.failure);
    return cert;
  }
  pass("cone-stable", std::min(cert.cone_s.min_margin, cert.cone_s.min_expansion - 1.0 / geom.lambda_s));

  // 9/10. lifted covers: plane factor per side.
  for (bool side1 : {true, false}) {
    const std::string name = side1 ? "plane-cover-cs" : "plane-cover-cu";
    const PlaneCoverResult pc = plane_family_cover(system, geom, side1);
    auto& summary = side1 ? cert.lifted1 : cert.lifted2;
    summary.plane_margin = pc.min_margin;
    summary.plane_lebesgue = pc.lebesgue;
    summary.lebesgue_lower = std::min(summary.min_base_lebesgue, pc.lebesgue);
    const double gamma_lift = std::min(system.gamma, pc.kappa_min);
    summary.delta_max = 0.5 * gamma_lift * summary.lebesgue_lower;
    summary.ok = pc.ok;
    summary.failure = pc.failure;
    if (!pc.ok) {
      fail(name, pc.failure);
      return cert;
    }
    pass(name, pc.min_margin);
  }

  // 11. cone containment of the chart balls (T3).
  cert.t3_margin1 = cone_ball_margin(geom.cone_uu, geom.G1, 200, rng);
  cert.t3_margin2 = cone_ball_margin(geom.cone_ss, geom.G2, 200, rng);
  if (cert.t3_margin1 <= 0.0 || cert.t3_margin2 <= 0.0) {
    fail("t3-containment", "chart ball escapes its cone");
    return cert;
  }
  pass("t3-containment", std::min(cert.t3_margin1, cert.t3_margin2));

  // 12. lifted transition (T4).
  cert.t_hat = find_transition_lifted(system, geom.p, geom.G1.center, geom.B2, geom.G2, 2);
  if (!cert.t_hat.found) {
    fail("lifted-transition", "no lifted transition found to depth 2");
    return cert;
  }
  pass("lifted-transition", cert.t_hat.margin);

  // 13. base transitions both ways (the robust-cycle ingredient).
  cert.t12 = find_transition(system, geom.B1, geom.B2, 2);
  cert.t21 = find_transition(system, geom.B2, geom.B1, 2);
  if (!cert.t12.found || !cert.t21.found) {
    fail("base-transitions", "missing base transition");
    return cert;
  }
  pass("base-transitions", std::min(cert.t12.margin, cert.t21.margin));

  // 14. lifted refinement at the carried disc and the base projection.
  const Vec y_hat = system.map_for_key({geom.conn12}).apply_inverse(geom.q);
  cert.refinement = refine_lifted_const(system, geom, y_hat, geom.G1.center, geom.refine_depth);
  if (!cert.refinement.ok) {
    fail("refinement", cert.refinement.failure);
    return cert;
  }
  TruncatedSequence xi;
  xi.past = cert.refinement.word;
  xi.future.push_back(geom.conn12);
  for (int n = 0; n < geom.horizon + 2; ++n) xi.future.push_back(geom.pure2);
  xi.depth = std::max<int>(64, geom.refine_depth + geom.horizon + 2);
  cert.base_lambda_u = verify_lambda_u(system, xi, cert.refinement.point_x, geom.B1,
                                       geom.refine_depth, {1});
  if (!cert.base_lambda_u.ok) {
    fail("refinement", "base projection is not a Lambda^u point");
    return cert;
  }
  pass("refinement", std::min({cert.refinement.min_depth, cert.refinement.min_margin_B,
                               cert.base_lambda_u.margin}));

  // 15. tangent directions at the produced point.
  std::vector<Vec> candidates;
  for (int j = geom.c - geom.l; j < geom.c; ++j) candidates.push_back(Vec::Unit(geom.c, j));
  for (int j = 0; j < geom.i1; ++j) candidates.push_back(Vec::Unit(geom.c, j));
  {
    Vec mixed = Vec::Unit(geom.c, 0) + Vec::Unit(geom.c, geom.c - 1);
    candidates.push_back(mixed / mixed.norm());
  }
  const double Cb = 2.0 / std::min(geom.design_rate_forward, geom.design_rate_backward);
  const double lam = std::max(geom.design_rate_forward, geom.design_rate_backward) * 1.05;
  cert.tangent = detect_tangent_directions(system, xi, cert.refinement.point_x, candidates,
                                           geom.horizon, std::min(lam, 0.999), Cb);
  cert.d_T = cert.tangent.d_T;
  cert.c_T = tangency_codimension(geom.c, geom.i1, geom.i2, geom.l).c_T;
  double rate_err = 0.0;
  int counted = 0;
  for (int j = 0; j < geom.l; ++j) {
    const auto& tv = cert.tangent.vectors[static_cast<size_t>(j)];
    if (!tv.passes) continue;
    rate_err = std::max(rate_err, std::abs(tv.rate_forward / geom.design_rate_forward - 1.0));
    rate_err = std::max(rate_err, std::abs(tv.rate_backward / geom.design_rate_backward - 1.0));
    cert.rate_forward = tv.rate_forward;
    cert.rate_backward = tv.rate_backward;
    ++counted;
  }
  if (cert.d_T != geom.l || counted != geom.l) {
    fail("tangent-directions", "d_T = " + std::to_string(cert.d_T) + ", expected " + std::to_string(geom.l));
    return cert;
  }
  pass("tangent-directions", 0.10 - rate_err);

  cert.global_slack = std::numeric_limits<double>::infinity();
  for (const auto& s : stages) cert.global_slack = std::min(cert.global_slack, s.slack);
  cert.ok = true;
  return cert;
}

TangencyCertificate build_tangency_scenario(int c, int i1, int i2, int l, double eps,
                                            const ScenarioOptions& opts) {
  Built b = build_geometry(c, i1, i2, l, eps, opts);
  return replay_tangency(b.geom, b.sys, opts);
}

// ---------------------------------------------------------------------------
// Robustness probes
// ---------------------------------------------------------------------------

namespace {

SkewSystem perturb_system(const SkewSystem& sys, double eta, Rng& rng) {
  SkewSystem out = sys;
  out.maps.clear();
  for (const auto& [key, m] : sys.maps) {
    Mat G(sys.c, sys.c);
    for (int i = 0; i < sys.c; ++i)
      for (int j = 0; j < sys.c; ++j) G(i, j) = std::normal_distribution<double>()(rng);
    Eigen::JacobiSVD<Mat> svd(G);
    const double scale = uniform(rng, 0.0, eta) / std::max(svd.singularValues().maxCoeff(), 1e-300);
    const Mat dA = scale * G;
    const Vec db = uniform(rng, 0.0, eta) * unit_vec(rng, sys.c);
    out.maps[key] = FiberMap::affine(m.A + dA, m.b + db);
  }
  return out;
}

}  // namespace

ProbeReport robustness_probe(const TangencyCertificate& cert, double eta, int trials,
                             unsigned long long seed) {
  if (eta < 0.0) throw input_error("robustness_probe: eta must be >= 0");
  ProbeReport rep;
  rep.eta = eta;
  rep.trials = trials;
  Rng rng(seed * 0x9e3779b97f4a7c15ULL + 0x51ca);
  ScenarioOptions opts;
  opts.seed = seed;
  for (int t = 0; t < trials; ++t) {
    const SkewSystem per = eta == 0.0 ? cert.system : perturb_system(cert.system, eta, rng);
    const TangencyCertificate r = replay_tangency(cert.geom, per, opts);
    ProbeTrialResult tr;
    tr.trial = t;
    tr.ok = r.ok;
    tr.failing_stage = r.failing_stage;
    tr.slack = r.ok ? r.global_slack : 0.0;
    if (r.ok) {
      ++rep.passed;
      rep.min_slack = std::min(rep.min_slack, r.global_slack);
    }
    rep.results.push_back(tr);
  }
  return rep;
}

ProbeReport robustness_probe_cycle(const CycleCertificate& cert, double eta, int trials,
                                   unsigned long long seed) {
  if (eta < 0.0) throw input_error("robustness_probe: eta must be >= 0");
  ProbeReport rep;
  rep.eta = eta;
  rep.trials = trials;
  Rng rng(seed * 0x9e3779b97f4a7c15ULL + 0xc1c1eULL);
  for (int t = 0; t < trials; ++t) {
    BlenderSpec cs = cert.cs, cu = cert.cu;
    const SkewSystem per = eta == 0.0 ? cert.cs.cover.system : perturb_system(cert.cs.cover.system, eta, rng);
    cs.cover.system = per;
    cu.cover.system = per;
    ProbeTrialResult tr;
    tr.trial = t;
    try {
      const CycleCertificate r = verify_cycle(cs, cu, cert.t12, cert.t21);
      tr.ok = r.ok;
      tr.failing_stage = r.ok ? "" : r.failure;
      tr.slack = r.ok ? r.global_slack : 0.0;
    } catch (const std::exception& e) {
      tr.ok = false;
      tr.failing_stage = e.what();
    }
    if (tr.ok) {
      ++rep.passed;
      rep.min_slack = std::min(rep.min_slack, tr.slack);
    }
    rep.results.push_back(tr);
  }
  return rep;
}

}  // namespace skewblend
