#include "skewblend/blend.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace skewblend {

// ---------------------------------------------------------------------------
// Covering engine
// ---------------------------------------------------------------------------

namespace {

// Lower bound for the Lebesgue number through complement tuples: any set that
// sticks out of every element contains one point per complement, so its
// diameter is at least min over tuples of the max pairwise distance.
// Anchoring the tuple at one complement point t gives
//   L >= max_m min_{t in C_m} max_i dist(t, C_i),
// and the cheaper ball variant anchors at an arbitrary cloud point.
double anchored_bound(const CoverProblem& p, const std::vector<std::vector<long>>& comp) {
  double best_m = 0.0;
  for (size_t m = 0; m < comp.size(); ++m) {
    if (comp[m].empty()) continue;
    double minmax = std::numeric_limits<double>::infinity();
    for (long t : comp[m]) {
      double worst = 0.0;
      bool pruned = false;
      for (size_t i = 0; i < comp.size(); ++i) {
        if (i == m) continue;
        double di = std::numeric_limits<double>::infinity();
        for (long u : comp[i]) {
          di = std::min(di, p.dist(t, u));
          if (di <= worst) break;  // cannot raise the max any more
        }
        worst = std::max(worst, di);
        if (worst >= minmax) { pruned = true; break; }
      }
      if (!pruned) minmax = std::min(minmax, worst);
      if (minmax <= 0.0) break;
    }
    best_m = std::max(best_m, minmax);
  }
  return best_m;
}

double ball_bound(const CoverProblem& p, const std::vector<std::vector<long>>& comp) {
  double result = std::numeric_limits<double>::infinity();
  for (long a = 0; a < p.npoints; ++a) {
    double worst = 0.0;
    bool pruned = false;
    for (const auto& ci : comp) {
      double di = std::numeric_limits<double>::infinity();
      for (long u : ci) {
        di = std::min(di, p.dist(a, u));
        if (di <= worst) break;
      }
      worst = std::max(worst, di);
      if (worst >= result) { pruned = true; break; }
    }
    if (!pruned) result = std::min(result, worst);
  }
  return result;
}

}  // namespace

CoverOutcome check_cover(const CoverProblem& p, long pair_budget) {
  CoverOutcome out;
  if (p.npoints == 0) throw input_error("check_cover: empty point cloud");

  std::vector<std::vector<long>> comp(static_cast<size_t>(p.nelements));
  out.min_max_depth = std::numeric_limits<double>::infinity();
  out.covered = true;
  for (long a = 0; a < p.npoints; ++a) {
    double best = -std::numeric_limits<double>::infinity();
    int best_el = -1;
    for (int i = 0; i < p.nelements; ++i) {
      const double dep = p.depth(i, a);
      if (dep > best) { best = dep; best_el = i; }
      if (dep <= p.correction) comp[static_cast<size_t>(i)].push_back(a);
    }
    if (best < out.min_max_depth) {
      out.min_max_depth = best;
      if (best <= p.correction) {
        out.covered = false;
        out.witness = a;
        out.witness_best_depth = best;
        out.witness_best_element = best_el;
      }
    }
  }
  out.covering_margin = out.min_max_depth - p.correction;

  // An element with empty complement enclosure covers the whole set.
  for (int i = 0; i < p.nelements; ++i) {
    if (comp[static_cast<size_t>(i)].empty()) {
      out.lebesgue_lower = p.diameter_cap;
      out.lebesgue_method = "single-element";
      return out;
    }
  }

  double total = 0.0;
  for (const auto& ci : comp) total += static_cast<double>(ci.size());
  double raw;
  if (total * total <= static_cast<double>(pair_budget)) {
    raw = anchored_bound(p, comp) - 2.0 * p.correction;
    out.lebesgue_method = "anchored";
  } else if (static_cast<double>(p.npoints) * total <= static_cast<double>(pair_budget)) {
    raw = ball_bound(p, comp) - 2.0 * p.correction;
    out.lebesgue_method = "ball";
  } else {
    // Classical fallback, free of charge: any set of diameter below the
    // worst best-depth sits inside the deepest element.
    raw = out.covering_margin;
    out.lebesgue_method = "margin";
  }
  out.lebesgue_lower = std::min(std::max(raw, 0.0), p.diameter_cap);
  return out;
}

// ---------------------------------------------------------------------------
// Cover elements
// ---------------------------------------------------------------------------

CompiledElements compile_elements(const SkewSystem& sys, CoverMode mode,
                                  const std::vector<Word>& blocks) {
  const SkewSystem oriented = (mode == CoverMode::cu) ? sys.inverted() : sys;
  CompiledElements ce;
  ce.mode = mode;
  for (const Word& block : blocks) {
    if (block.empty()) throw input_error("cover element: empty block word");
    ElementVariants ev;
    ev.block = block;
    const int n = block.length();
    const int free_tail = oriented.window - 1;
    long variants = 1;
    for (int j = 0; j < free_tail; ++j) {
      variants *= oriented.d;
      if (variants > 256) throw input_error("cover element: window too deep to enumerate variants");
    }
    std::vector<Symbol> tail(static_cast<size_t>(free_tail), 1);
    for (long v = 0; v < variants; ++v) {
      long rest = v;
      for (int j = 0; j < free_tail; ++j) {
        tail[static_cast<size_t>(j)] = static_cast<Symbol>(rest % oriented.d) + 1;
        rest /= oriented.d;
      }
      std::vector<Symbol> word(block.symbols);
      word.insert(word.end(), tail.begin(), tail.end());
      std::vector<FiberMap> chain;
      for (int t = 0; t < n; ++t) {
        std::vector<Symbol> key(word.begin() + t, word.begin() + t + oriented.window);
        chain.push_back(oriented.map_for_key(key));
      }
      ev.variants.push_back(FiberMap::composed(chain));
    }
    ev.gamma_block = std::numeric_limits<double>::infinity();
    for (const auto& m : ev.variants) ev.gamma_block = std::min(ev.gamma_block, m.smin);
    ce.elems.push_back(std::move(ev));
  }
  return ce;
}

double compiled_depth(const CompiledElements& ce, const Region& B, int element, const Vec& x) {
  const auto& ev = ce.elems[static_cast<size_t>(element)];
  double dep = std::numeric_limits<double>::infinity();
  for (const auto& m : ev.variants)
    dep = std::min(dep, m.smin * signed_distance(B, m.apply_inverse(x)));
  return dep;
}

double element_depth(const SkewSystem& sys, const CoveringCertificate& cert, int element, const Vec& x) {
  CompiledElements ce = compile_elements(sys, cert.mode, cert.blocks);
  return compiled_depth(ce, cert.B, element, x);
}

// ---------------------------------------------------------------------------
// verify_covering
// ---------------------------------------------------------------------------

double CoveringCertificate::slack() const {
  double s = std::numeric_limits<double>::infinity();
  s = std::min(s, covering_margin);
  s = std::min(s, bd_margin);
  for (const auto& e : elements) s = std::min(s, e.image_in_D_margin);
  s = std::min(s, C_lt_L.slack());
  s = std::min(s, constants.min_phs_slack);
  return s;
}

CoveringCertificate verify_covering(const SkewSystem& sys, const std::vector<Symbol>& S,
                                    const Region& B, const Region& D, double h,
                                    CoverMode mode, const CoveringOptions& opts) {
  CoveringCertificate cert;
  cert.mode = mode;
  cert.B = B;
  cert.D = D;
  cert.h = h;
  cert.system = sys;
  if (S.empty()) throw input_error("verify_covering: empty symbol set");
  if (B.c != sys.c || D.c != sys.c) throw input_error("verify_covering: region dimension mismatch");

  const SkewSystem oriented = (mode == CoverMode::cu) ? sys.inverted() : sys;
  cert.constants = verify_constants(oriented);
  if (!cert.constants.declared_ok) {
    cert.failure = "constants: " + cert.constants.offending_map;
    return cert;
  }
  if (!cert.constants.phs_ok) {
    cert.failure = "constants: PHS inequalities fail (min slack " +
                   std::to_string(cert.constants.min_phs_slack) + ")";
    return cert;
  }

  cert.blocks = opts.blocks;
  if (cert.blocks.empty())
    for (Symbol s : S) cert.blocks.push_back(Word({s}));
  std::sort(cert.blocks.begin(), cert.blocks.end(), [](const Word& a, const Word& b) {
    if (a.length() != b.length()) return a.length() < b.length();
    return a.symbols < b.symbols;
  });

  const CompiledElements ce = compile_elements(sys, mode, cert.blocks);
  const Grid grid = cover_grid(B, h, opts.grid_cap);
  cert.grid_correction = grid.cell_correction;
  cert.grid_points = static_cast<long>(grid.points.size());

  cert.lambda = effective_lambda(oriented);
  const double nua = std::pow(oriented.nu, oriented.alpha);
  if (nua >= cert.lambda)
    throw input_error("verify_covering: effective lambda must exceed nu^alpha");

  // B inside D with margin.
  cert.bd_margin = std::numeric_limits<double>::infinity();
  for (const auto& x : grid.points)
    cert.bd_margin = std::min(cert.bd_margin, signed_distance(D, x));
  cert.bd_margin -= grid.cell_correction;
  if (cert.bd_margin <= 0.0) {
    cert.failure = "closure(B) is not inside D (margin " + std::to_string(cert.bd_margin) + ")";
    return cert;
  }

  // Forward images of B along every block prefix stay inside D.
  for (const auto& ev : ce.elems) {
    ElementReport er;
    er.block = ev.block;
    er.gamma_block = ev.gamma_block;
    er.image_in_D_margin = std::numeric_limits<double>::infinity();
    for (const auto& variant : ev.variants) {
      for (size_t j = 0; j < variant.pieces.size(); ++j) {
        Mat A = Mat::Identity(sys.c, sys.c);
        Vec b = Vec::Zero(sys.c);
        for (size_t t = 0; t <= j; ++t) {
          A = variant.pieces[t].first * A;
          b = variant.pieces[t].first * b + variant.pieces[t].second;
        }
        Eigen::JacobiSVD<Mat> svd(A);
        const double lip = svd.singularValues().maxCoeff();
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& x : grid.points)
          margin = std::min(margin, signed_distance(D, A * x + b));
        er.image_in_D_margin = std::min(er.image_in_D_margin, margin - lip * grid.cell_correction);
      }
    }
    cert.elements.push_back(er);
    if (er.image_in_D_margin <= 0.0) {
      cert.failure = "image of B under block " + er.block.str() + " leaves D (margin " +
                     std::to_string(er.image_in_D_margin) + ")";
      return cert;
    }
  }

  const Box bb = B.bounding_box();
  CoverProblem p;
  p.npoints = static_cast<long>(grid.points.size());
  p.nelements = static_cast<int>(ce.elems.size());
  p.correction = grid.cell_correction;
  p.diameter_cap = (bb.hi - bb.lo).norm();
  p.dist = [&](long a, long b2) { return (grid.points[static_cast<size_t>(a)] - grid.points[static_cast<size_t>(b2)]).norm(); };
  p.depth = [&](int i, long a) { return compiled_depth(ce, B, i, grid.points[static_cast<size_t>(a)]); };

  const CoverOutcome oc = check_cover(p, opts.pair_budget);
  cert.covering_margin = oc.covering_margin;
  cert.lebesgue_lower = oc.lebesgue_lower;
  cert.lebesgue_method = oc.lebesgue_method;
  if (!oc.covered) {
    cert.witness_x = grid.points[static_cast<size_t>(oc.witness)];
    cert.witness_depth = oc.witness_best_depth;
    std::ostringstream os;
    os << "uncovered grid point at [";
    for (int i = 0; i < cert.witness_x.size(); ++i) os << (i ? "," : "") << cert.witness_x[i];
    os << "] with best depth " << oc.witness_best_depth << " (needs > " << p.correction << ")";
    cert.failure = os.str();
    return cert;
  }

  cert.C_hold = oriented.C0 / (1.0 - nua / cert.lambda);
  cert.C_lt_L = {"C < L_hat", cert.C_hold, cert.lebesgue_lower};
  cert.delta_max = 0.5 * cert.lambda * cert.lebesgue_lower;
  if (!cert.C_lt_L.ok()) {
    cert.failure = "Hoelder spread constant C = " + std::to_string(cert.C_hold) +
                   " is not below the Lebesgue lower bound " + std::to_string(cert.lebesgue_lower);
    return cert;
  }
  cert.ok = true;
  return cert;
}

// ---------------------------------------------------------------------------
// Translation families
// ---------------------------------------------------------------------------

TranslationFamily build_translation_family(const FiberMap& phi, const Vec& x_star, double eps,
                                           const TranslationOptions& opts) {
  const int c = phi.dim();
  if (eps <= 0.0) throw construction_error("translation family: eps must be positive");
  if ((phi.apply(x_star) - x_star).norm() > 1e-9 * std::max(1.0, x_star.norm()))
    throw construction_error("translation family: x_star is not a fixed point of phi");
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j)
      if (i != j && std::abs(phi.A(i, j)) > 1e-12)
        throw construction_error("translation family: linear part must be diagonal");

  const FiberMap base = (opts.mode == CoverMode::cu) ? phi.inverse() : phi;
  std::vector<double> rate(static_cast<size_t>(c));
  bool any_contracting = false;
  for (int i = 0; i < c; ++i) {
    rate[static_cast<size_t>(i)] = std::abs(base.A(i, i));
    if (rate[static_cast<size_t>(i)] < 1.0) any_contracting = true;
    if (std::abs(rate[static_cast<size_t>(i)] - 1.0) < 1e-9)
      throw construction_error("translation family: eigenvalue of modulus one on axis " + std::to_string(i));
  }
  if (!any_contracting)
    throw construction_error("translation family: no contracting direction for the requested mode");

  // B = ball(x_star, delta), D = ball(x_star, 1.9 eps); images must stay in D.
  const double delta = 0.5 * eps;
  Region B = Region::ball(x_star, delta);
  Region D = Region::ball(x_star, 1.9 * eps);

  // One translation lattice per contracting axis; expanding axes cover B on
  // their own.  Spacing 1.2*rho*delta with outermost reach 1.1*delta matches
  // the three-map cover {-0.6, 0, 0.6}*delta at rho = 1/2.
  std::vector<std::vector<double>> axis_offsets(static_cast<size_t>(c));
  long count = 1;
  for (int i = 0; i < c; ++i) {
    auto& off = axis_offsets[static_cast<size_t>(i)];
    const double rho = rate[static_cast<size_t>(i)];
    if (rho > 1.0) {
      off = {0.0};
    } else {
      const double step = 1.2 * rho * delta;
      const double reach = (1.1 - rho) * delta;  // outermost center, so center+rho*delta >= 1.1*delta
      const long half = std::max<long>(0, static_cast<long>(std::ceil(reach / step - 1e-12)));
      for (long t = -half; t <= half; ++t) off.push_back(static_cast<double>(t) * step);
    }
    count *= static_cast<long>(off.size());
    if (count > opts.map_cap)
      throw resource_error("translation family: offset lattice exceeds the cap of " +
                           std::to_string(opts.map_cap) + " maps");
  }

  TranslationFamily fam;
  fam.delta = delta;
  fam.B = B;
  fam.D = D;
  std::vector<long> idx(static_cast<size_t>(c), 0);
  while (true) {
    Vec v(c);
    for (int i = 0; i < c; ++i) v[i] = axis_offsets[static_cast<size_t>(i)][static_cast<size_t>(idx[static_cast<size_t>(i)])];
    if (v.norm() < 1e-15)
      ;  // the zero offset is phi itself, inserted first below
    else
      fam.offsets.push_back(v);
    int k = 0;
    while (k < c && ++idx[static_cast<size_t>(k)] == static_cast<long>(axis_offsets[static_cast<size_t>(k)].size())) idx[static_cast<size_t>(k++)] = 0;
    if (k == c) break;
  }
  std::sort(fam.offsets.begin(), fam.offsets.end(),
            [](const Vec& a, const Vec& b) { return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()); });
  fam.offsets.insert(fam.offsets.begin(), Vec::Zero(c));

  for (const auto& v : fam.offsets) {
    // T_v composed with phi, expressed in the original (not inverted) orientation.
    if (opts.mode == CoverMode::cu) {
      // The cu covering uses preimages: offset the inverse map instead.
      FiberMap shifted_inv = FiberMap::composed({phi.inverse(), FiberMap::translation(v)});
      fam.maps.push_back(shifted_inv.inverse());
    } else {
      fam.maps.push_back(FiberMap::composed({phi, FiberMap::translation(v)}));
    }
  }
  fam.k = static_cast<int>(fam.maps.size());

  SkewSystem sys;
  sys.d = fam.k;
  sys.c = c;
  sys.alpha = 1.0;
  double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
  for (const auto& m : fam.maps) {
    smin = std::min(smin, m.smin);
    smax = std::max(smax, m.smax);
  }
  sys.gamma = 0.995 * smin;
  sys.gamma_hat = 1.0 / std::max(1.005 * smax, 1.02);
  // PHS needs nu^alpha < gamma and gamma_hat^{-1} < nu^{-alpha}.
  sys.nu = std::min(0.5, 0.9 * std::min(sys.gamma, sys.gamma_hat));
  for (int i = 0; i < fam.k; ++i) sys.set_map(i + 1, fam.maps[static_cast<size_t>(i)]);
  fam.system = sys;

  std::vector<Symbol> S(static_cast<size_t>(fam.k));
  for (int i = 0; i < fam.k; ++i) S[static_cast<size_t>(i)] = i + 1;
  const double h = 2.0 * delta / opts.grid_points_per_axis;
  fam.self_check = verify_covering(sys, S, B, D, h, opts.mode);
  if (!fam.self_check.ok)
    throw construction_error("translation family: self check failed: " + fam.self_check.failure);
  return fam;
}

// ---------------------------------------------------------------------------
// Conley-Moser block certificate
// ---------------------------------------------------------------------------

namespace {

// Exact image interval of sum_j A_rj * [lo_j, hi_j] + b_r.
std::pair<double, double> row_interval(const Mat& A, const Vec& b, int row, const Box& box) {
  double lo = b[row], hi = b[row];
  for (int j = 0; j < A.cols(); ++j) {
    const double a = A(row, j);
    if (a >= 0) {
      lo += a * box.lo[j];
      hi += a * box.hi[j];
    } else {
      lo += a * box.hi[j];
      hi += a * box.lo[j];
    }
  }
  return {lo, hi};
}

}  // namespace

ConleyMoserCertificate verify_conley_moser(const SkewSystem& sys, const std::vector<Symbol>& S,
                                           const Region& D_cs, const Region& D_cu,
                                           bool require_block) {
  ConleyMoserCertificate cert;
  if (!sys.one_step()) throw input_error("verify_conley_moser: one-step system required");
  if (D_cs.boxes.size() != 1 || !D_cs.balls.empty() || D_cu.boxes.size() != 1 || !D_cu.balls.empty())
    throw input_error("verify_conley_moser: D_cs and D_cu must each be a single box");
  const int i1 = D_cs.c, i2 = D_cu.c;
  if (i1 + i2 != sys.c) throw input_error("verify_conley_moser: split dimensions do not add up to c");
  cert.cs_index = i1;
  const Box bcs = D_cs.boxes[0], bcu = D_cu.boxes[0];
  Box full;
  full.lo = Vec(sys.c);
  full.hi = Vec(sys.c);
  full.lo << bcs.lo, bcu.lo;
  full.hi << bcs.hi, bcu.hi;

  cert.ok = true;
  cert.min_contraction_slack = std::numeric_limits<double>::infinity();
  cert.min_margin = std::numeric_limits<double>::infinity();
  for (Symbol s : S) {
    const FiberMap& m = sys.map_for_key({s});
    ConleyMoserEntry e;
    e.symbol = s;
    const Mat& A = m.A;
    const double off_us = A.bottomLeftCorner(i2, i1).norm();
    const double off_su = A.topRightCorner(i1, i2).norm();
    const double scale = std::max(1.0, A.norm());
    if (require_block && off_us > 1e-12 * scale && off_su > 1e-12 * scale) {
      cert.ok = false;
      e.note = "unsupported structure: both off-diagonal blocks are nonzero";
      cert.entries.push_back(e);
      cert.failure = "map " + std::to_string(s) + ": " + e.note;
      return cert;
    }

    Eigen::JacobiSVD<Mat> svd_cs(A.topLeftCorner(i1, i1));
    e.cs_contraction = svd_cs.singularValues().maxCoeff();
    Eigen::JacobiSVD<Mat> svd_cu(m.Ainv.bottomRightCorner(i2, i2));
    e.cu_contraction = svd_cu.singularValues().maxCoeff();

    // cs rows of the forward image over the full box.
    e.cs_margin = std::numeric_limits<double>::infinity();
    for (int r = 0; r < i1; ++r) {
      auto [lo, hi] = row_interval(A, m.b, r, full);
      e.cs_margin = std::min(e.cs_margin, std::min(bcs.hi[r] - hi, lo - bcs.lo[r]));
    }
    // cu rows of the inverse image over the full box.
    const Vec binv = -m.Ainv * m.b;
    e.cu_margin = std::numeric_limits<double>::infinity();
    for (int r = 0; r < i2; ++r) {
      auto [lo, hi] = row_interval(m.Ainv, binv, i1 + r, full);
      e.cu_margin = std::min(e.cu_margin, std::min(bcu.hi[r] - hi, lo - bcu.lo[r]));
    }

    e.ok = e.cs_contraction < 1.0 && e.cu_contraction < 1.0 && e.cs_margin > 0.0 && e.cu_margin > 0.0;
    if (!e.ok && cert.failure.empty()) {
      std::ostringstream os;
      os << "map " << s << ": ";
      if (e.cs_contraction >= 1.0) os << "cs block does not contract (sigma " << e.cs_contraction << ")";
      else if (e.cu_contraction >= 1.0) os << "inverse cu block does not contract (sigma " << e.cu_contraction << ")";
      else os << "containment fails (cs margin " << e.cs_margin << ", cu margin " << e.cu_margin << ")";
      cert.failure = os.str();
    }
    cert.ok = cert.ok && e.ok;
    cert.min_contraction_slack = std::min({cert.min_contraction_slack, 1.0 - e.cs_contraction, 1.0 - e.cu_contraction});
    cert.min_margin = std::min({cert.min_margin, e.cs_margin, e.cu_margin});
    cert.entries.push_back(e);
  }
  return cert;
}

}  // namespace skewblend
