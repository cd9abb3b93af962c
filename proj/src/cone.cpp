#include "skewblend/cone.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace skewblend {

Cone Cone::standard(int c, int l, double rho) {
  if (l < 1 || l >= c) throw input_error("cone: need 0 < l < c");
  if (rho <= 0.0) throw input_error("cone: aperture must be positive");
  Cone C;
  C.l = l;
  C.rho = rho;
  C.basis = Mat::Identity(c, c);
  C.basis_inv = C.basis;
  return C;
}

Cone Cone::axes(int c, const std::vector<int>& v_axes, double rho) {
  Cone C = standard(c, static_cast<int>(v_axes.size()), rho);
  std::vector<bool> used(static_cast<size_t>(c), false);
  Mat P = Mat::Zero(c, c);
  int col = 0;
  for (int a : v_axes) {
    if (a < 0 || a >= c || used[static_cast<size_t>(a)]) throw input_error("cone: bad axis list");
    P(a, col++) = 1.0;
    used[static_cast<size_t>(a)] = true;
  }
  for (int a = 0; a < c; ++a)
    if (!used[static_cast<size_t>(a)]) P(a, col++) = 1.0;
  C.basis = P;
  C.basis_inv = P.transpose();
  return C;
}

Plane Cone::axis_plane() const { return Plane::from_span(basis.leftCols(l)); }

ConeMembership cone_contains(const Cone& C, const Vec& x, bool strict) {
  if (x.size() != C.c()) throw input_error("cone_contains: dimension mismatch");
  const Vec y = C.basis_inv * x;
  const double nv = y.head(C.l).norm(), nw = y.tail(C.c() - C.l).norm();
  ConeMembership m;
  m.margin = C.rho * nv - nw;
  m.inside = strict ? (m.margin > 0.0 && nv > 0.0) : (m.margin >= 0.0);
  return m;
}

namespace {

// Extreme rays ||w|| = rho ||v||, unit length, sampled in cone coordinates.
std::vector<Vec> extreme_rays(const Cone& C, int count, Rng& rng) {
  const int c = C.c(), l = C.l;
  std::vector<Vec> rays;
  if (l == 1 && c - l == 1) {
    // Exact in the planar case.
    for (double sv : {1.0, -1.0})
      for (double sw : {1.0, -1.0}) {
        Vec y(2);
        y << sv, sw * C.rho;
        rays.push_back(C.basis * (y / y.norm()));
      }
    return rays;
  }
  for (int t = 0; t < count; ++t) {
    Vec v = unit_vec(rng, l);
    Vec w = unit_vec(rng, c - l) * C.rho;
    Vec y(c);
    y << v, w;
    rays.push_back(C.basis * (y / y.norm()));
  }
  // Axis rays of the v-block, the deepest directions.
  for (int j = 0; j < l; ++j) {
    Vec y = Vec::Zero(c);
    y[j] = 1.0;
    rays.push_back(C.basis * y);
  }
  return rays;
}

ConeCertificate cone_check(const SkewSystem& sys, const Cone& C, const Region& region, double lambda,
                           int samples, Rng& rng, const ConeOptions& opts) {
  ConeCertificate cert;
  cert.lambda = lambda;
  if (lambda <= 0.0 || lambda >= 1.0) throw input_error("cone check: lambda must lie in (0,1)");
  if (region.c != sys.c) throw input_error("cone check: region dimension mismatch");
  std::vector<Symbol> S = opts.symbols.empty() ? sys.symbols_used() : opts.symbols;

  cert.min_margin = std::numeric_limits<double>::infinity();
  cert.min_expansion = std::numeric_limits<double>::infinity();
  cert.analytic_blocks = true;
  const auto rays = extreme_rays(C, std::max(opts.rays, samples), rng);
  for (Symbol s : S) {
    for (const FiberMap* mp : sys.maps_with_head(s)) {
      for (const auto& v : rays) {
        const Vec img = mp->A * v;
        const ConeMembership m = cone_contains(C, img, true);
        const double growth = img.norm() / v.norm();
        if (m.margin < cert.min_margin) {
          cert.min_margin = m.margin;
          cert.witness_symbol = s;
          cert.witness_v = v;
        }
        cert.min_expansion = std::min(cert.min_expansion, growth);
        if (!m.inside || growth < 1.0 / lambda) {
          cert.failure = !m.inside
                             ? "image ray not strictly inside the cone (margin " + std::to_string(m.margin) + ")"
                             : "expansion " + std::to_string(growth) + " below 1/lambda";
          cert.witness_symbol = s;
          cert.witness_v = v;
          return cert;
        }
      }
      const Mat M = C.basis_inv * mp->A * C.basis;  // derivative in cone coordinates
      const int l = C.l, k = C.c() - l;
      const double off = M.bottomLeftCorner(k, l).norm() + M.topRightCorner(l, k).norm();
      if (off < 1e-12 * std::max(1.0, M.norm())) {
        Eigen::JacobiSVD<Mat> su(M.topLeftCorner(l, l));
        Eigen::JacobiSVD<Mat> sl(M.bottomRightCorner(k, k));
        const double smin_u = su.singularValues().minCoeff();
        const double smax_l = sl.singularValues().maxCoeff();
        // Exact bounds for block-diagonal derivatives sharpen the sampled ones.
        cert.min_expansion = std::min(cert.min_expansion, smin_u / std::sqrt(1.0 + C.rho * C.rho));
        if (smax_l >= smin_u) {
          cert.ok = false;
          cert.failure = "block bound: lower block (sigma " + std::to_string(smax_l) +
                         ") is not dominated by the upper block (sigma " + std::to_string(smin_u) + ")";
          cert.witness_symbol = s;
          return cert;
        }
      } else {
        cert.analytic_blocks = false;
      }
    }
  }
  (void)opts.region_samples;  // affine derivatives are position independent
  cert.ok = cert.min_margin > 0.0 && cert.min_expansion >= 1.0 / lambda;
  if (!cert.ok && cert.failure.empty()) cert.failure = "strict invariance margin is not positive";
  return cert;
}

}  // namespace

ConeCertificate verify_unstable_cone(const SkewSystem& sys, const Cone& C, const Region& region,
                                     double lambda, int samples, Rng& rng, const ConeOptions& opts) {
  return cone_check(sys, C, region, lambda, samples, rng, opts);
}

ConeCertificate verify_stable_cone(const SkewSystem& sys, const Cone& C, const Region& region,
                                   double lambda, int samples, Rng& rng, const ConeOptions& opts) {
  return cone_check(sys.inverted(), C, region, lambda, samples, rng, opts);
}

BackwardContractionReport backward_contraction_check(const SkewSystem& sys, const Cone& C,
                                                     const TruncatedSequence& xi, const Vec& x, int n,
                                                     const Vec& v, double lambda, const Region& region) {
  BackwardContractionReport rep;
  if (n < 1) throw input_error("backward_contraction_check: n must be >= 1");
  if (!cone_contains(C, v, false).inside)
    throw input_error("backward_contraction_check: v is not in the cone");
  Vec y = x;
  Mat J = Mat::Identity(sys.c, sys.c);
  std::vector<double> norms;
  for (int k = 1; k <= n; ++k) {
    if (signed_distance(region, y) < -1e-12) {
      rep.pre_ok = false;
      rep.escape_step = k - 1;
      return rep;
    }
    const FiberMap& m = sys.map_at(xi, -k);
    J = m.Ainv * J;
    y = m.apply_inverse(y);
    norms.push_back((J * v).norm() / v.norm());
  }
  rep.ok = true;
  rep.worst_excess = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double excess = norms[static_cast<size_t>(k - 1)] / std::pow(lambda, double(k));
    rep.worst_excess = std::max(rep.worst_excess, excess);
    if (norms[static_cast<size_t>(k - 1)] > std::pow(lambda, double(k)) * (1.0 + 1e-12)) rep.ok = false;
  }
  // Log-linear fit of the decay rate, skipping the transient when possible.
  const int k0 = n >= 8 ? 5 : 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int k = k0; k <= n; ++k) {
    const double lx = double(k), ly = std::log(std::max(norms[static_cast<size_t>(k - 1)], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  rep.fitted_rate = cnt >= 2 ? std::exp((double(cnt) * sxy - sx * sy) / (double(cnt) * sxx - sx * sx)) : 0.0;
  return rep;
}

bool cone_to_grassmann(const Cone& C, const Plane& E, double* margin) {
  if (E.c() != C.c() || E.l() != C.l) throw input_error("cone_to_grassmann: dimension mismatch");
  const Mat Y = C.basis_inv * E.frame;  // c x l in cone coordinates
  const Mat X = Y.topRows(C.l);
  const Mat W = Y.bottomRows(C.c() - C.l);
  Eigen::JacobiSVD<Mat> sx(X);
  Eigen::JacobiSVD<Mat> sw(W.rows() > 0 ? W : Mat::Zero(1, C.l));
  const double m_suff = C.rho * sx.singularValues().minCoeff() - sw.singularValues().maxCoeff();
  if (margin) *margin = m_suff;
  if (C.l == 1) {
    // Exact: the unit vectors of a line are +/- the frame column.
    const ConeMembership m = cone_contains(C, E.frame.col(0), true);
    if (margin) *margin = m.margin;
    return m.inside;
  }
  return m_suff > 0.0;
}

double cone_ball_margin(const Cone& C, const PlaneBall& ball, int samples, Rng& rng) {
  const PlaneChart chart(ball.center);
  const int rows = chart.complement.cols(), cols = ball.center.l();
  const double wmax = ball.radius / std::sqrt(1.0 - ball.radius * ball.radius);
  double worst = std::numeric_limits<double>::infinity();
  double m0;
  if (!cone_to_grassmann(C, ball.center, &m0)) return -1.0;
  worst = std::min(worst, m0);
  for (int t = 0; t < samples; ++t) {
    Mat W(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) W(i, j) = std::normal_distribution<double>()(rng);
    Eigen::JacobiSVD<Mat> svd(W);
    W *= wmax / svd.singularValues().maxCoeff();  // boundary plane of the chart ball
    double m = 0.0;
    if (!cone_to_grassmann(C, chart.from_W(W), &m)) return -1.0;
    worst = std::min(worst, m);
  }
  return worst;
}

}  // namespace skewblend
