#include "skewblend/skew.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace skewblend {

namespace {

std::string key_str(const std::vector<Symbol>& key) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < key.size(); ++i) os << (i ? "," : "") << key[i];
  os << ")";
  return os.str();
}

}  // namespace

FiberMap FiberMap::affine(const Mat& A, const Vec& b) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw input_error("fiber map: matrix/offset dimension mismatch");
  FiberMap m;
  m.A = A;
  m.b = b;
  Eigen::JacobiSVD<Mat> svd(A);
  m.smin = svd.singularValues().minCoeff();
  m.smax = svd.singularValues().maxCoeff();
  if (m.smin < 1e-14 * std::max(1.0, m.smax))
    throw input_error("fiber map: matrix is numerically singular");
  m.Ainv = A.inverse();
  m.pieces = {{A, b}};
  return m;
}

FiberMap FiberMap::translation(const Vec& v) {
  return affine(Mat::Identity(v.size(), v.size()), v);
}

FiberMap FiberMap::composed(const std::vector<FiberMap>& chain) {
  if (chain.empty()) throw input_error("fiber map: empty composition");
  Mat A = chain.front().A;
  Vec b = chain.front().b;
  for (size_t i = 1; i < chain.size(); ++i) {
    A = chain[i].A * A;
    b = chain[i].A * b + chain[i].b;
  }
  FiberMap m = affine(A, b);
  m.pieces.clear();
  for (const auto& p : chain) m.pieces.push_back({p.A, p.b});
  return m;
}

FiberMap FiberMap::inverse() const { return affine(Ainv, -Ainv * b); }

void SkewSystem::set_map(Symbol s, FiberMap m) { set_map(std::vector<Symbol>{s}, std::move(m)); }

void SkewSystem::set_map(const std::vector<Symbol>& window_key, FiberMap m) {
  if (static_cast<int>(window_key.size()) != window)
    throw input_error("skew system: key length does not match window");
  if (c == 0) c = m.dim();
  if (m.dim() != c) throw input_error("skew system: fiber map dimension mismatch");
  for (Symbol s : window_key)
    if (s < 1 || s > d) throw input_error("skew system: symbol out of range in key " + key_str(window_key));
  maps[window_key] = std::move(m);
}

const FiberMap& SkewSystem::map_for_key(const std::vector<Symbol>& key) const {
  auto it = maps.find(key);
  if (it == maps.end()) throw input_error("skew system: no fiber map for key " + key_str(key));
  return it->second;
}

const FiberMap& SkewSystem::map_at(const TruncatedSequence& xi, long t) const {
  std::vector<Symbol> key(static_cast<size_t>(window));
  for (int j = 0; j < window; ++j) key[static_cast<size_t>(j)] = xi.at(t + j);
  return map_for_key(key);
}

std::vector<const FiberMap*> SkewSystem::maps_with_head(Symbol s) const {
  std::vector<const FiberMap*> out;
  for (const auto& [key, m] : maps)
    if (key.front() == s) out.push_back(&m);
  return out;
}

std::vector<Symbol> SkewSystem::symbols_used() const {
  std::set<Symbol> seen;
  for (const auto& [key, m] : maps) seen.insert(key.front());
  return {seen.begin(), seen.end()};
}

SkewSystem SkewSystem::inverted() const {
  if (window != 1) throw input_error("skew system: inversion is only defined for one-step systems");
  SkewSystem inv = *this;
  inv.gamma = gamma_hat;
  inv.gamma_hat = gamma;
  inv.maps.clear();
  for (const auto& [key, m] : maps) inv.maps[key] = m.inverse();
  if (lambda_local && beta_local) {
    inv.lambda_local = 1.0 / *beta_local;
    inv.beta_local = 1.0 / *lambda_local;
  }
  return inv;
}

Vec compose_forward(const SkewSystem& sys, const TruncatedSequence& xi, long n, const Vec& x) {
  if (n < 0) throw input_error("compose_forward: n must be >= 0");
  if (n > 0 && !xi.has(n - 1 + sys.window - 1))
    throw input_error("compose_forward: sequence stores too few future coordinates");
  Vec y = x;
  for (long t = 0; t < n; ++t) y = sys.map_at(xi, t).apply(y);
  return y;
}

Vec compose_backward(const SkewSystem& sys, const TruncatedSequence& xi, long n, const Vec& x) {
  if (n < 0) throw input_error("compose_backward: n must be >= 0");
  if (n > 0 && !xi.has(-n))
    throw input_error("compose_backward: sequence stores too few past coordinates");
  Vec y = x;
  for (long t = 1; t <= n; ++t) y = sys.map_at(xi, -t).apply_inverse(y);
  return y;
}

Mat derivative_cocycle(const SkewSystem& sys, const TruncatedSequence& xi, long n, const Vec& x) {
  Mat J = Mat::Identity(sys.c, sys.c);
  if (n >= 0) {
    Vec y = x;
    for (long t = 0; t < n; ++t) {
      const FiberMap& m = sys.map_at(xi, t);
      J = m.A * J;
      y = m.apply(y);
    }
  } else {
    Vec y = x;
    for (long t = 1; t <= -n; ++t) {
      const FiberMap& m = sys.map_at(xi, -t);
      J = m.Ainv * J;
      y = m.apply_inverse(y);
    }
  }
  return J;
}

ConstantsReport verify_constants(const SkewSystem& sys) {
  ConstantsReport r;
  r.gamma = sys.gamma;
  r.gamma_hat = sys.gamma_hat;
  r.C0 = sys.C0;
  r.nu = sys.nu;
  r.alpha = sys.alpha;
  r.LD = sys.LD;
  if (sys.maps.empty()) throw input_error("verify_constants: system has no fiber maps");
  if (sys.gamma <= 0 || sys.gamma_hat <= 0) throw input_error("verify_constants: declared constants must be positive");

  r.tight_smin = std::numeric_limits<double>::infinity();
  r.tight_smax = 0.0;
  for (const auto& [key, m] : sys.maps) {
    if (sys.gamma > m.smin && r.declared_ok) {
      r.declared_ok = false;
      r.offending_map = "map " + key_str(key) + ": declared gamma " + std::to_string(sys.gamma) +
                        " exceeds tight lower bound " + std::to_string(m.smin);
    }
    if (sys.gamma_hat_inv() < m.smax && r.declared_ok) {
      r.declared_ok = false;
      r.offending_map = "map " + key_str(key) + ": declared gamma_hat^{-1} " +
                        std::to_string(sys.gamma_hat_inv()) + " is below tight upper bound " +
                        std::to_string(m.smax);
    }
    r.tight_smin = std::min(r.tight_smin, m.smin);
    r.tight_smax = std::max(r.tight_smax, m.smax);
  }
  const double nua = std::pow(sys.nu, sys.alpha);
  r.phs = {
      {"nu^alpha < gamma", nua, sys.gamma},
      {"gamma < 1", sys.gamma, 1.0},
      {"1 < gamma_hat^{-1}", 1.0, sys.gamma_hat_inv()},
      {"gamma_hat^{-1} < nu^{-alpha}", sys.gamma_hat_inv(), 1.0 / nua},
  };
  r.phs_ok = true;
  r.min_phs_slack = std::numeric_limits<double>::infinity();
  for (const auto& q : r.phs) {
    r.phs_ok = r.phs_ok && q.ok();
    r.min_phs_slack = std::min(r.min_phs_slack, q.slack());
  }
  r.bunching = {"nu^alpha < gamma*gamma_hat", nua, sys.gamma * sys.gamma_hat};
  r.bunched_ok = r.bunching.ok();
  return r;
}

double holder_constant_estimate(const SkewSystem& sys, const Region& region, int samples, Rng& rng) {
  if (samples < 1) throw input_error("holder_constant_estimate: samples must be >= 1");
  if (sys.one_step()) return 0.0;

  // All window-key pairs sharing the head symbol; first disagreement depth
  // inside the window gives d_Sigma exactly.
  std::vector<std::vector<Symbol>> keys;
  for (const auto& [key, m] : sys.maps) keys.push_back(key);
  const Box bb = region.bounding_box();
  double best = 0.0;
  for (size_t a = 0; a < keys.size(); ++a) {
    for (size_t b = a + 1; b < keys.size(); ++b) {
      if (keys[a][0] != keys[b][0]) continue;
      int l = 0;
      while (l < sys.window && keys[a][static_cast<size_t>(l)] == keys[b][static_cast<size_t>(l)]) ++l;
      if (l == sys.window) continue;
      const double dsig = std::pow(sys.nu, double(l));
      const FiberMap& ma = sys.map_for_key(keys[a]);
      const FiberMap& mb = sys.map_for_key(keys[b]);
      for (int s = 0; s < samples; ++s) {
        Vec x(sys.c);
        for (int i = 0; i < sys.c; ++i) x[i] = uniform(rng, bb.lo[i], bb.hi[i]);
        const double fwd = (ma.apply(x) - mb.apply(x)).norm();
        const double bwd = (ma.apply_inverse(x) - mb.apply_inverse(x)).norm();
        best = std::max(best, std::max(fwd, bwd) / std::pow(dsig, sys.alpha));
      }
    }
  }
  return best;
}

double effective_lambda(const SkewSystem& sys) {
  if (!sys.lambda_local) return sys.gamma;
  const double lam = *sys.lambda_local;
  double smin = std::numeric_limits<double>::infinity();
  for (const auto& [key, m] : sys.maps) smin = std::min(smin, m.smin);
  if (lam > smin)
    throw input_error("declared local lambda " + std::to_string(lam) +
                      " exceeds the tight lower Lipschitz bound " + std::to_string(smin));
  return lam;
}

}  // namespace skewblend
