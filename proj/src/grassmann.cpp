#include "skewblend/grassmann.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace skewblend {

Plane Plane::from_span(const Mat& span) {
  if (span.cols() < 1 || span.rows() <= span.cols())
    throw input_error("plane: need a c x l span with 0 < l < c");
  Eigen::HouseholderQR<Mat> qr(span);
  Mat Q = qr.householderQ() * Mat::Identity(span.rows(), span.cols());
  Mat R = qr.matrixQR().topLeftCorner(span.cols(), span.cols()).triangularView<Eigen::Upper>();
  for (int j = 0; j < span.cols(); ++j) {
    if (std::abs(R(j, j)) < 1e-12) throw input_error("plane: span is rank deficient");
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  }
  return Plane(Q);
}

Plane Plane::coordinate(int c, const std::vector<int>& axes) {
  Mat f = Mat::Zero(c, static_cast<int>(axes.size()));
  for (size_t j = 0; j < axes.size(); ++j) {
    if (axes[j] < 0 || axes[j] >= c) throw input_error("plane: axis out of range");
    f(axes[j], static_cast<int>(j)) = 1.0;
  }
  return Plane(f);
}

double plane_distance(const Plane& E, const Plane& F) {
  if (E.c() != F.c() || E.l() != F.l()) throw input_error("plane_distance: dimension mismatch");
  const Mat M = E.frame - F.frame * (F.frame.transpose() * E.frame);
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues().maxCoeff();
}

Plane apply_linear(const Mat& T, const Plane& E) {
  if (T.rows() != T.cols() || T.rows() != E.c()) throw input_error("apply_linear: dimension mismatch");
  return Plane::from_span(T * E.frame);
}

BilipschitzReport bilipschitz_check(const Mat& T, int l, int samples, Rng& rng) {
  BilipschitzReport rep;
  const int c = static_cast<int>(T.rows());
  Eigen::JacobiSVD<Mat> svd(T);
  const double smax = svd.singularValues().maxCoeff();
  const double smin = svd.singularValues().minCoeff();
  if (smin < 1e-14) throw input_error("bilipschitz_check: singular matrix");
  rep.bound = smax / smin;
  for (int t = 0; t < samples; ++t) {
    Mat a(c, l), b(c, l);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < l; ++j) {
        a(i, j) = std::normal_distribution<double>()(rng);
        b(i, j) = std::normal_distribution<double>()(rng);
      }
    Plane E = Plane::from_span(a), F = Plane::from_span(b);
    const double d = plane_distance(E, F);
    if (d < 1e-9) continue;
    const double dt = plane_distance(apply_linear(T, E), apply_linear(T, F));
    rep.observed_max = std::max(rep.observed_max, dt / d);
  }
  rep.ok = rep.observed_max <= rep.bound + 1e-9;
  return rep;
}

PlaneChart::PlaneChart(const Plane& center_plane) : center(center_plane) {
  const int c = center.c(), l = center.l();
  // Orthonormal complement from the full QR of the frame.
  Eigen::HouseholderQR<Mat> qr(center.frame);
  Mat Q = qr.householderQ();
  complement = Q.rightCols(c - l);
}

Plane PlaneChart::from_W(const Mat& W) const {
  if (W.rows() != complement.cols() || W.cols() != center.l())
    throw input_error("plane chart: W must be (c-l) x l");
  return Plane::from_span(center.frame + complement * W);
}

Mat PlaneChart::to_W(const Plane& E) const {
  const Mat top = center.frame.transpose() * E.frame;      // l x l
  const Mat bot = complement.transpose() * E.frame;        // (c-l) x l
  Eigen::FullPivLU<Mat> lu(top);
  if (!lu.isInvertible()) throw input_error("plane chart: plane is not transversal to the chart");
  return bot * lu.inverse();
}

std::pair<Vec, Plane> LiftedSystem::apply(const std::vector<Symbol>& key, const Vec& x, const Plane& E) const {
  const FiberMap& m = base.map_for_key(key);
  return {m.apply(x), apply_linear(m.A, E)};
}

std::pair<Vec, Plane> LiftedSystem::apply_inverse(const std::vector<Symbol>& key, const Vec& x, const Plane& E) const {
  const FiberMap& m = base.map_for_key(key);
  return {m.apply_inverse(x), apply_linear(m.Ainv, E)};
}

double lifted_distance(const Vec& x, const Plane& E, const Vec& y, const Plane& F) {
  return (x - y).norm() + plane_distance(E, F);
}

bool lift_admissible(double nu, double alpha, double gamma, double gamma_hat, double LD, std::string* reason) {
  const double nua = std::pow(nu, alpha);
  if (!(nua < gamma * gamma_hat)) {
    if (reason)
      *reason = "fiber bunching fails: nu^alpha = " + std::to_string(nua) +
                " >= gamma*gamma_hat = " + std::to_string(gamma * gamma_hat);
    return false;
  }
  const double cap = gamma * (1.0 / nua - 1.0 / gamma_hat);
  if (!(LD < cap)) {
    if (reason)
      *reason = "derivative Lipschitz bound too large: L = " + std::to_string(LD) +
                " >= gamma (nu^{-alpha} - gamma_hat^{-1}) = " + std::to_string(cap);
    return false;
  }
  return true;
}

LiftedSystem lift_system(const SkewSystem& sys, int l) {
  if (l < 1 || l >= sys.c) throw input_error("lift_system: need 0 < l < c");
  std::string reason;
  if (!lift_admissible(sys.nu, sys.alpha, sys.gamma, sys.gamma_hat, sys.LD, &reason))
    throw input_error("lift refused: " + reason);

  LiftedSystem lift;
  lift.base = sys;
  lift.l = l;
  const double nua = std::pow(sys.nu, sys.alpha);
  const double ghinv = 1.0 / sys.gamma_hat;
  const double ginv = 1.0 / sys.gamma;
  const double prod_inv = 1.0 / (sys.gamma * sys.gamma_hat);
  lift.lip_forward = std::max(ghinv + ginv * sys.LD, prod_inv);
  // The inverse fiber maps have constants (gamma', gamma_hat') = (gamma_hat, gamma).
  lift.lip_backward = std::max(ginv + (1.0 / sys.gamma_hat) * sys.LD, prod_inv);
  lift.gamma_hat_lift = 1.0 / lift.lip_forward;
  lift.gamma_lift = 1.0 / lift.lip_backward;

  lift.checks.push_back({"nu^alpha < gamma*gamma_hat", nua, sys.gamma * sys.gamma_hat});
  lift.checks.push_back({"L_D < gamma (nu^{-alpha} - gamma_hat^{-1})", sys.LD, sys.gamma * (1.0 / nua - ghinv)});
  lift.checks.push_back({"lifted Lipschitz < nu^{-alpha}", lift.lip_forward, 1.0 / nua});
  lift.checks.push_back({"inverse lifted Lipschitz < nu^{-alpha}", lift.lip_backward, 1.0 / nua});
  lift.checks.push_back({"nu^alpha < lifted gamma", nua, lift.gamma_lift});
  for (const auto& q : lift.checks)
    if (!q.ok()) throw input_error("lift refused: " + q.name + " fails (" + std::to_string(q.lhs) +
                                   " vs " + std::to_string(q.rhs) + ")");
  return lift;
}

double lifted_lipschitz_empirical(const LiftedSystem& lift, int samples, Rng& rng) {
  const int c = lift.base.c;
  std::vector<std::vector<Symbol>> keys;
  for (const auto& [key, m] : lift.base.maps) keys.push_back(key);
  double worst = 0.0;
  for (int t = 0; t < samples; ++t) {
    const auto& key = keys[std::uniform_int_distribution<size_t>(0, keys.size() - 1)(rng)];
    const Vec x = uniform_vec(rng, c, -1.0, 1.0);
    const Vec y = uniform_vec(rng, c, -1.0, 1.0);
    Mat a(c, lift.l), b(c, lift.l);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < lift.l; ++j) {
        a(i, j) = std::normal_distribution<double>()(rng);
        b(i, j) = std::normal_distribution<double>()(rng);
      }
    const Plane E = Plane::from_span(a), F = Plane::from_span(b);
    const double d0 = lifted_distance(x, E, y, F);
    if (d0 < 1e-9) continue;
    auto [x1, E1] = lift.apply(key, x, E);
    auto [y1, F1] = lift.apply(key, y, F);
    worst = std::max(worst, lifted_distance(x1, E1, y1, F1) / d0);
    auto [x2, E2] = lift.apply_inverse(key, x, E);
    auto [y2, F2] = lift.apply_inverse(key, y, F);
    worst = std::max(worst, lifted_distance(x2, E2, y2, F2) / d0);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Chart-ball covering
// ---------------------------------------------------------------------------

std::vector<Plane> plane_grid(const PlaneBall& ball, double hW, long cap) {
  if (ball.radius <= 0.0 || ball.radius >= 1.0)
    throw input_error("plane_grid: ball radius must lie in (0,1)");
  if (hW <= 0.0) throw input_error("plane_grid: spacing must be positive");
  const PlaneChart chart(ball.center);
  const int rows = chart.complement.cols(), cols = ball.center.l();
  const double wmax = ball.radius / std::sqrt(1.0 - ball.radius * ball.radius);
  const long per_axis = static_cast<long>(std::ceil(2.0 * wmax / hW)) + 1;
  const int dim = rows * cols;
  double total = 1.0;
  for (int i = 0; i < dim; ++i) {
    total *= static_cast<double>(per_axis);
    if (total > 4.0 * static_cast<double>(cap))
      throw resource_error("plane_grid: chart lattice exceeds the cap");
  }
  // Keep lattice planes whose cell can intersect the ball: the chart map is
  // 1-Lipschitz from ||.||_F to d_G, so the cell correction transfers.
  const double corr = 0.5 * hW * std::sqrt(double(dim));
  std::vector<Plane> out;
  std::vector<long> idx(static_cast<size_t>(dim), 0);
  Mat W(rows, cols);
  while (true) {
    for (int i = 0; i < dim; ++i)
      W(i % rows, i / rows) = -wmax + hW * static_cast<double>(idx[static_cast<size_t>(i)]);
    const Plane E = chart.from_W(W);
    if (plane_distance(ball.center, E) <= ball.radius + corr) {
      out.push_back(E);
      if (static_cast<long>(out.size()) > cap) throw resource_error("plane_grid: too many chart points");
    }
    int k = 0;
    while (k < dim && ++idx[static_cast<size_t>(k)] == per_axis) idx[static_cast<size_t>(k++)] = 0;
    if (k == dim) break;
  }
  return out;
}

PlaneCoverCertificate verify_plane_cover(const std::vector<Mat>& actions, const PlaneBall& ball,
                                         double hW, long grid_cap, long pair_budget) {
  PlaneCoverCertificate cert;
  cert.ball = ball;
  cert.hW = hW;
  if (actions.empty()) throw input_error("verify_plane_cover: no actions");

  const std::vector<Plane> pts = plane_grid(ball, hW, grid_cap);
  cert.grid_points = static_cast<long>(pts.size());
  const int dim = (ball.center.c() - ball.center.l()) * ball.center.l();
  cert.grid_correction = 0.5 * hW * std::sqrt(double(dim));

  std::vector<Mat> inverses;
  std::vector<double> kappa;
  cert.kappa_min = std::numeric_limits<double>::infinity();
  for (const auto& T : actions) {
    Eigen::JacobiSVD<Mat> svd(T);
    const double smin = svd.singularValues().minCoeff(), smax = svd.singularValues().maxCoeff();
    if (smin < 1e-14) throw input_error("verify_plane_cover: singular action");
    kappa.push_back(smin / smax);
    cert.kappa_min = std::min(cert.kappa_min, smin / smax);
    inverses.push_back(T.inverse());
  }

  CoverProblem p;
  p.npoints = static_cast<long>(pts.size());
  p.nelements = static_cast<int>(actions.size());
  p.correction = cert.grid_correction;
  p.diameter_cap = 2.0 * ball.radius;
  p.dist = [&](long a, long b) { return plane_distance(pts[static_cast<size_t>(a)], pts[static_cast<size_t>(b)]); };
  p.depth = [&](int i, long a) {
    const Plane pulled = apply_linear(inverses[static_cast<size_t>(i)], pts[static_cast<size_t>(a)]);
    return kappa[static_cast<size_t>(i)] * (ball.radius - plane_distance(ball.center, pulled));
  };
  const CoverOutcome oc = check_cover(p, pair_budget);
  cert.covering_margin = oc.covering_margin;
  cert.lebesgue_lower = oc.lebesgue_lower;
  cert.lebesgue_method = oc.lebesgue_method;
  if (!oc.covered) {
    cert.witness = static_cast<int>(oc.witness);
    cert.witness_depth = oc.witness_best_depth;
    cert.failure = "uncovered chart plane (best depth " + std::to_string(oc.witness_best_depth) + ")";
    return cert;
  }
  cert.ok = true;
  return cert;
}

}  // namespace skewblend
