#include "skewblend/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace skewblend {

std::vector<Vec> transition_seeds(const Region& source) {
  const Box bb = source.bounding_box();
  const Vec mid = 0.5 * (bb.lo + bb.hi);
  std::vector<Vec> seeds;
  if (signed_distance(source, mid) > 0.0) seeds.push_back(mid);
  for (int i = 0; i < source.c; ++i) {
    for (double s : {-0.25, 0.25}) {
      Vec x = mid;
      x[i] += s * (bb.hi[i] - bb.lo[i]);
      if (signed_distance(source, x) > 0.0) seeds.push_back(x);
    }
  }
  if (seeds.empty()) throw input_error("transition_seeds: no interior seed found");
  return seeds;
}

TransitionWitness find_transition(const SkewSystem& sys, const std::vector<Vec>& sources,
                                  const Region& target, int max_depth, double required_margin) {
  if (max_depth < 1) throw input_error("find_transition: max_depth must be >= 1");
  if (sources.empty()) throw input_error("find_transition: no source points");
  if (!sys.one_step()) throw input_error("find_transition: one-step system required");

  TransitionWitness w;
  // Words of each length in lexicographic order via an odometer with a stack
  // of prefix compositions: comp[k] is the composition of the first k symbols.
  for (int len = 1; len <= max_depth; ++len) {
    std::vector<Symbol> word(static_cast<size_t>(len), 1);
    std::vector<Mat> compA(static_cast<size_t>(len) + 1);
    std::vector<Vec> compb(static_cast<size_t>(len) + 1);
    compA[0] = Mat::Identity(sys.c, sys.c);
    compb[0] = Vec::Zero(sys.c);
    int dirty = 0;  // prefixes up to `dirty` are valid
    while (true) {
      for (int k = dirty; k < len; ++k) {
        const FiberMap& m = sys.map_for_key({word[static_cast<size_t>(k)]});
        compA[static_cast<size_t>(k) + 1] = m.A * compA[static_cast<size_t>(k)];
        compb[static_cast<size_t>(k) + 1] = m.A * compb[static_cast<size_t>(k)] + m.b;
      }
      dirty = len;
      for (const auto& x : sources) {
        const Vec y = compA[static_cast<size_t>(len)] * x + compb[static_cast<size_t>(len)];
        const double sd = signed_distance(target, y);
        if (sd > required_margin) {
          w.found = true;
          w.word = Word(word);
          std::vector<FiberMap> chain;
          for (Symbol ws : word) chain.push_back(sys.map_for_key({ws}));
          w.T = FiberMap::composed(chain);
          w.x = x;
          w.image = y;
          w.margin = sd;
          return w;
        }
        const double miss = std::max(-sd, 0.0);
        if (miss < w.near_miss) {
          w.near_miss = miss;
          w.near_miss_point = y;
        }
      }
      int k = len - 1;
      while (k >= 0 && word[static_cast<size_t>(k)] == sys.d) word[static_cast<size_t>(k--)] = 1;
      if (k < 0) break;
      ++word[static_cast<size_t>(k)];
      dirty = k;
    }
  }
  return w;
}

TransitionWitness find_transition(const SkewSystem& sys, const Region& source,
                                  const Region& target, int max_depth, double required_margin) {
  return find_transition(sys, transition_seeds(source), target, max_depth, required_margin);
}

LiftedTransitionWitness find_transition_lifted(const SkewSystem& sys, const Vec& x0, const Plane& E0,
                                               const Region& targetB, const PlaneBall& targetG,
                                               int max_depth, double required_margin) {
  if (max_depth < 1) throw input_error("find_transition_lifted: max_depth must be >= 1");
  if (!sys.one_step()) throw input_error("find_transition_lifted: one-step system required");
  LiftedTransitionWitness w;
  for (int len = 1; len <= max_depth; ++len) {
    std::vector<Symbol> word(static_cast<size_t>(len), 1);
    std::vector<Vec> xs(static_cast<size_t>(len) + 1);
    std::vector<Plane> Es(static_cast<size_t>(len) + 1);
    xs[0] = x0;
    Es[0] = E0;
    int dirty = 0;
    while (true) {
      for (int k = dirty; k < len; ++k) {
        const FiberMap& m = sys.map_for_key({word[static_cast<size_t>(k)]});
        xs[static_cast<size_t>(k) + 1] = m.apply(xs[static_cast<size_t>(k)]);
        Es[static_cast<size_t>(k) + 1] = apply_linear(m.A, Es[static_cast<size_t>(k)]);
      }
      dirty = len;
      const double mb = signed_distance(targetB, xs[static_cast<size_t>(len)]);
      const double mg = targetG.radius - plane_distance(targetG.center, Es[static_cast<size_t>(len)]);
      const double margin = std::min(mb, mg);
      if (margin > required_margin) {
        w.found = true;
        w.word = Word(word);
        w.x = x0;
        w.E_frame = E0.frame;
        w.image_x = xs[static_cast<size_t>(len)];
        w.image_E_frame = Es[static_cast<size_t>(len)].frame;
        w.margin = margin;
        return w;
      }
      w.near_miss = std::min(w.near_miss, std::max(-margin, 0.0));
      int k = len - 1;
      while (k >= 0 && word[static_cast<size_t>(k)] == sys.d) word[static_cast<size_t>(k--)] = 1;
      if (k < 0) break;
      ++word[static_cast<size_t>(k)];
      dirty = k;
    }
  }
  return w;
}

CycleCertificate verify_cycle(const BlenderSpec& cs, const BlenderSpec& cu,
                              const TransitionWitness& t12, const TransitionWitness& t21) {
  CycleCertificate cert;
  cert.cs = cs;
  cert.cu = cu;
  cert.t12 = t12;
  cert.t21 = t21;
  if (cs.cover.mode != CoverMode::cs || cu.cover.mode != CoverMode::cu)
    throw input_error("verify_cycle: expected a cs spec and a cu spec");
  if (!t12.found || !t21.found) {
    cert.failure = "missing transition witness";
    return cert;
  }

  cert.region_gap_value = region_gap(cs.cover.D, cu.cover.D);
  if (cert.region_gap_value <= 0.0) {
    throw input_error("verify_cycle: superposition domains D1 and D2 are not disjoint");
  }

  // Replay both covering certificates from their system snapshots.
  std::vector<Symbol> S1, S2;
  for (const auto& b : cs.cover.blocks) S1.push_back(b.symbols[0]);
  for (const auto& b : cu.cover.blocks) S2.push_back(b.symbols[0]);
  CoveringOptions o1, o2;
  o1.blocks = cs.cover.blocks;
  o2.blocks = cu.cover.blocks;
  const CoveringCertificate r1 =
      verify_covering(cs.cover.system, S1, cs.cover.B, cs.cover.D, cs.cover.h, CoverMode::cs, o1);
  const CoveringCertificate r2 =
      verify_covering(cu.cover.system, S2, cu.cover.B, cu.cover.D, cu.cover.h, CoverMode::cu, o2);
  if (!r1.ok || !r2.ok) {
    cert.failure = std::string("stale blender certificate: ") + (!r1.ok ? r1.failure : r2.failure);
    return cert;
  }
  if (!cs.structure.ok || !cu.structure.ok) {
    cert.failure = "structural hyperbolicity certificate is not valid";
    return cert;
  }

  // Witness replay: t12 carries a point of B1 into B2, t21 a point of B2 into B1.
  const auto replay = [&](const TransitionWitness& t, const Region& src, const Region& dst,
                          const SkewSystem& sys) -> double {
    if (t.word.empty()) return -1.0;
    Vec y = t.x;
    for (Symbol s : t.word.symbols) y = sys.map_for_key({s}).apply(y);
    if ((y - t.image).norm() > 1e-9) return -1.0;
    return std::min(signed_distance(src, t.x), signed_distance(dst, y));
  };
  const double m12 = replay(t12, cs.cover.B, cu.cover.B, cs.cover.system);
  const double m21 = replay(t21, cu.cover.B, cs.cover.B, cs.cover.system);
  if (m12 <= 0.0 || m21 <= 0.0) {
    cert.failure = "transition witness replay failed (margins " + std::to_string(m12) + ", " +
                   std::to_string(m21) + ")";
    return cert;
  }

  cert.co_index = std::abs(cs.cs_index - cu.cs_index);
  cert.global_slack = std::min({r1.slack(), r2.slack(), m12, m21, cert.region_gap_value,
                                cs.structure.min_contraction_slack, cs.structure.min_margin,
                                cu.structure.min_contraction_slack, cu.structure.min_margin});
  cert.ok = true;
  return cert;
}

TangentDirectionReport detect_tangent_directions(const SkewSystem& sys, const TruncatedSequence& xi,
                                                 const Vec& x, const std::vector<Vec>& candidates,
                                                 int N, double lambda, double Cbound) {
  if (lambda <= 0.0 || lambda >= 1.0) throw input_error("detect_tangent_directions: lambda in (0,1)");
  if (Cbound <= 0.0) throw input_error("detect_tangent_directions: C must be positive");
  TangentDirectionReport rep;
  rep.N = N;
  rep.lambda = lambda;
  rep.Cbound = Cbound;
  rep.horizon_too_small = N < 5;

  // Cocycle matrices for n = -N..N along the orbit.
  std::vector<Mat> J(static_cast<size_t>(2 * N + 1));
  J[static_cast<size_t>(N)] = Mat::Identity(sys.c, sys.c);
  {
    Mat acc = Mat::Identity(sys.c, sys.c);
    for (int n = 1; n <= N; ++n) {
      acc = sys.map_at(xi, n - 1).A * acc;
      J[static_cast<size_t>(N + n)] = acc;
    }
    acc = Mat::Identity(sys.c, sys.c);
    for (int n = 1; n <= N; ++n) {
      acc = sys.map_at(xi, -n).Ainv * acc;
      J[static_cast<size_t>(N - n)] = acc;
    }
  }
  (void)x;  // affine cocycles are position independent; kept for the interface

  Mat passing(sys.c, 0);
  for (const Vec& v : candidates) {
    if (v.norm() < 1e-15) throw input_error("detect_tangent_directions: zero candidate vector");
    TangentVectorResult r;
    r.v = v;
    r.passes = true;
    r.norms.resize(static_cast<size_t>(2 * N + 1));
    for (int n = -N; n <= N; ++n) {
      const double nm = (J[static_cast<size_t>(N + n)] * v).norm();
      r.norms[static_cast<size_t>(N + n)] = nm;
      const double cap = Cbound * std::pow(lambda, std::abs(double(n)));
      r.worst_ratio = std::max(r.worst_ratio, nm / cap);
      if (nm > cap * (1.0 + 1e-12)) r.passes = false;
    }
    // Decay-rate fits over 5 <= |n| <= N, each direction separately.
    const auto fit = [&](int sgn) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int cnt = 0;
      for (int n = std::min(5, N); n <= N; ++n) {
        const double nm = r.norms[static_cast<size_t>(N + sgn * n)];
        if (nm <= 0.0) continue;
        const double lx = double(n), ly = std::log(nm);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
      }
      return cnt >= 2 ? std::exp((double(cnt) * sxy - sx * sy) / (double(cnt) * sxx - sx * sx)) : 0.0;
    };
    r.rate_forward = fit(+1);
    r.rate_backward = fit(-1);
    if (r.passes) {
      passing.conservativeResize(sys.c, passing.cols() + 1);
      passing.col(passing.cols() - 1) = v / v.norm();
    }
    rep.vectors.push_back(std::move(r));
  }
  if (passing.cols() > 0) {
    Eigen::JacobiSVD<Mat> svd(passing);
    const double tol = 1e-9 * svd.singularValues().maxCoeff();
    rep.d_T = static_cast<int>((svd.singularValues().array() > tol).count());
  }
  return rep;
}

CodimensionResult tangency_codimension(int c, int i1, int i2, int l) {
  if (i1 < 1 || i1 >= c || i2 < 1 || i2 >= c)
    throw input_error("tangency_codimension: indices must satisfy 0 < i < c");
  const int lo = std::max(0, i2 - i1);
  const int hi = std::min(c - i1, i2);
  if (!(lo < l && l <= hi))
    throw input_error("tangency_codimension: l = " + std::to_string(l) +
                      " violates max{0, i2-i1} < l <= min{c-i1, i2} = (" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");
  CodimensionResult r;
  r.l = l;
  r.c_T = c - ((c - i1) + i2 - l);
  return r;
}

}  // namespace skewblend
