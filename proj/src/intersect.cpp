#include "skewblend/intersect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace skewblend {

Vec HorizontalDisc::eval(const std::vector<Symbol>& past_word) const {
  switch (kind) {
    case DiscKind::constant:
      return x0;
    case DiscKind::table: {
      // The longest stored suffix of the past word decides the value.
      for (size_t len = past_word.size(); len >= 1; --len) {
        std::vector<Symbol> suffix(past_word.end() - static_cast<long>(len), past_word.end());
        auto it = table.find(suffix);
        if (it != table.end()) return it->second;
      }
      return x0;
    }
    case DiscKind::series: {
      Vec v = x0;
      const size_t len = past_word.size();
      for (size_t j = 1; j <= len; ++j) {
        const Symbol s = past_word[len - j];
        const double e = series_d > 1 ? 2.0 * double(s - 1) / double(series_d - 1) - 1.0 : 0.0;
        v += series_amp * std::pow(series_nu, alpha * double(j)) * e * series_dir;
      }
      return v;
    }
  }
  throw input_error("disc: unknown kind");
}

namespace {

std::vector<Symbol> random_past(Rng& rng, int d, int len) {
  std::vector<Symbol> w(static_cast<size_t>(len));
  for (auto& s : w) s = static_cast<Symbol>(std::uniform_int_distribution<int>(1, d)(rng));
  return w;
}

}  // namespace

void validate_disc(const HorizontalDisc& disc, double nu, Rng& rng, int samples) {
  if (disc.delta <= 0.0) throw input_error("disc: delta must be positive");
  if (disc.C < 0.0) throw input_error("disc: Hoelder constant must be nonnegative");
  if (disc.C * std::pow(nu, disc.alpha) >= disc.delta)
    throw input_error("disc: condition C nu^alpha < delta fails");
  int d = disc.series_d;
  for (const auto& [w, v] : disc.table)
    for (Symbol s : w) d = std::max(d, s);
  for (Symbol s : disc.base.future) d = std::max(d, s);
  d = std::max(d, 2);
  for (int t = 0; t < samples; ++t) {
    const auto w = random_past(rng, d, std::uniform_int_distribution<int>(0, 12)(rng));
    const Vec v = disc.eval(w);
    if ((v - disc.x0).norm() >= disc.delta)
      throw input_error("disc: sampled value escapes the delta ball around x0");
    // Hoelder pair: perturb one coordinate of the past at depth j.
    if (!w.empty()) {
      auto w2 = w;
      const size_t pos = std::uniform_int_distribution<size_t>(0, w.size() - 1)(rng);
      w2[pos] = static_cast<Symbol>(1 + (w2[pos] % d));
      const long j = static_cast<long>(w.size() - pos);  // disagreement at index -j
      const double dist = std::pow(nu, double(j));
      const Vec v2 = disc.eval(w2);
      if ((v - v2).norm() > disc.C * std::pow(dist, disc.alpha) + 1e-12)
        throw input_error("disc: sampled pair violates the declared Hoelder constant");
    }
  }
}

RefinementTrace refine_intersection(const CoveringCertificate& cert, const HorizontalDisc& disc, int N) {
  if (!cert.ok) throw input_error("refine_intersection: covering certificate is not valid");
  if (cert.mode != CoverMode::cs)
    throw input_error("refine_intersection: refine the cs certificate of the inverted system instead");
  if (N < 1) throw input_error("refine_intersection: N must be >= 1");
  const SkewSystem& sys = cert.system;
  Rng rng(0x5eedd15c);
  validate_disc(disc, sys.nu, rng);
  if (disc.delta >= cert.delta_max)
    throw input_error("refine_intersection: disc delta " + std::to_string(disc.delta) +
                      " is not below delta_max " + std::to_string(cert.delta_max));
  if (signed_distance(cert.B, disc.x0) <= disc.delta)
    throw input_error("refine_intersection: disc is not inside B with margin delta");
  if (disc.base.future_length() < 1)
    throw input_error("refine_intersection: disc base must store future coordinates");
  {
    bool head_ok = false;
    for (const auto& blk : cert.blocks) {
      if (blk.length() > disc.base.future_length()) continue;
      bool match = true;
      for (int j = 0; j < blk.length(); ++j)
        if (disc.base.at(j) != blk.symbols[static_cast<size_t>(j)]) match = false;
      head_ok = head_ok || match;
    }
    if (!head_ok)
      throw input_error("refine_intersection: disc base future does not start inside the certified cylinders");
  }

  const CompiledElements ce = compile_elements(sys, cert.mode, cert.blocks);
  const double lambda = cert.lambda;
  const double nua = std::pow(sys.nu, sys.alpha);
  const double q = nua / lambda;  // lambda^{-1} nu^alpha < 1 under PHS

  RefinementTrace tr;
  std::vector<Symbol> word;  // the refined past word, most recent block in front
  long m_n = 0;

  for (int n = 0; n < N; ++n) {
    // Bound for diam(A_n): Hoelder spread of the backward maps plus the
    // pulled-back value-set diameter.  Before any refinement the value set is
    // the whole graph: pairs of the local stable set differ first at index
    // -1 or deeper, so both 2 delta and C nu^alpha bound its diameter.
    const double V_diam = (n == 0) ? std::min(2.0 * disc.delta, disc.C * nua)
                                   : disc.C * std::pow(sys.nu, sys.alpha * double(m_n));
    double spread = 0.0;
    {
      double term = 1.0;
      for (long j = 0; j < m_n; ++j) {
        spread += term;
        term *= q;
      }
      spread *= sys.C0;
    }
    const double A_diam = spread + std::pow(lambda, -double(m_n)) * V_diam;

    TruncatedSequence rep(word, disc.base.future, std::max<int>(disc.base.depth, static_cast<int>(m_n)));
    const Vec v_center = disc.eval(word);
    const Vec a_center = compose_backward(sys, rep, m_n, v_center);

    RefineStep st;
    st.A_diam_bound = A_diam;
    st.A_diam_ok = A_diam < cert.lebesgue_lower;
    if (!st.A_diam_ok) {
      tr.failure = "diam(A_n) bound " + std::to_string(A_diam) + " reached L_hat at step " + std::to_string(n + 1);
      tr.fail_step = n + 1;
      tr.fail_center = a_center;
      tr.steps.push_back(st);
      return tr;
    }

    int chosen = -1;
    double best_depth = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(ce.elems.size()); ++i) {
      const double dep = compiled_depth(ce, cert.B, i, a_center);
      best_depth = std::max(best_depth, dep);
      if (dep > A_diam) { chosen = i; st.depth_found = dep; break; }
    }
    if (chosen < 0) {
      tr.failure = "no cover element admits the set at step " + std::to_string(n + 1) +
                   " (best depth " + std::to_string(best_depth) + ", needs > " + std::to_string(A_diam) + ")";
      tr.fail_step = n + 1;
      tr.fail_center = a_center;
      tr.fail_best_depth = best_depth;
      tr.steps.push_back(st);
      return tr;
    }

    const Word& blk = ce.elems[static_cast<size_t>(chosen)].block;
    word.insert(word.begin(), blk.symbols.begin(), blk.symbols.end());
    m_n += blk.length();
    st.element = chosen;
    st.block = blk;
    st.m_n = m_n;
    st.V_diam_bound = disc.C * std::pow(sys.nu, sys.alpha * double(m_n));
    st.pullback_bound = disc.C * std::pow(q, double(m_n));

    // Replay the representative's backward orbit for the trace margins.
    // Boundaries sit at the cumulative block lengths in chosen order; the
    // first chosen block is traversed first going backwards.
    TruncatedSequence rep2(word, disc.base.future, std::max<int>(disc.base.depth, static_cast<int>(m_n)));
    const Vec v2 = disc.eval(word);
    std::vector<long> boundaries;
    long acc = 0;
    for (const auto& s0 : tr.steps) {
      acc += s0.block.length();
      boundaries.push_back(acc);
    }
    boundaries.push_back(acc + blk.length());
    st.margin_B = std::numeric_limits<double>::infinity();
    st.margin_D = std::numeric_limits<double>::infinity();
    Vec y = v2;
    for (long j = 1; j <= m_n; ++j) {
      y = sys.map_at(rep2, -j).apply_inverse(y);
      st.margin_D = std::min(st.margin_D, signed_distance(cert.D, y));
      if (std::find(boundaries.begin(), boundaries.end(), j) != boundaries.end())
        st.margin_B = std::min(st.margin_B, signed_distance(cert.B, y));
    }

    tr.steps.push_back(st);
    tr.chosen.push_back(chosen);
  }

  tr.ok = true;
  tr.point_xi = TruncatedSequence(word, disc.base.future, std::max<int>(disc.base.depth, static_cast<int>(m_n)));
  tr.point_x = disc.eval(word);
  tr.error_radius = disc.C * std::pow(sys.nu, sys.alpha * double(m_n));
  return tr;
}

TransverseBoundReport holder_transverse_bound(const SkewSystem& sys, const TruncatedSequence& word,
                                              const Vec& x, int n, const Region& D, int samples, Rng& rng) {
  if (n < 1) throw input_error("holder_transverse_bound: n must be >= 1");
  if (word.past_length() < n)
    throw input_error("holder_transverse_bound: the cylinder word stores fewer than n past coordinates");
  TransverseBoundReport rep;
  rep.agreement = std::min(word.future_length(), word.past_length() + 1);

  const double nua = std::pow(sys.nu, sys.alpha);
  const double lambda = effective_lambda(sys);
  double sum = 0.0, term = 1.0;
  for (int j = 0; j < n; ++j) {
    sum += term;
    term *= nua / lambda;
  }
  rep.bound = sys.C0 * std::pow(sys.nu, -sys.alpha * double(n)) * sum *
              std::pow(std::pow(sys.nu, double(rep.agreement)), sys.alpha);

  // Sampled completions of the cylinder; also enforces the precondition that
  // the sampled backward orbits stay in closure(D).
  const int pad = sys.window;
  std::vector<std::vector<Vec>> orbits;
  for (int t = 0; t < samples; ++t) {
    TruncatedSequence xi = word;
    while (xi.past_length() < n + pad)
      xi.past.insert(xi.past.begin(), std::uniform_int_distribution<int>(1, sys.d)(rng));
    while (xi.future_length() < pad)
      xi.future.push_back(std::uniform_int_distribution<int>(1, sys.d)(rng));
    xi.depth = std::max(xi.depth, n + pad);
    std::vector<Vec> orbit;
    Vec y = x;
    for (int j = 1; j <= n; ++j) {
      y = sys.map_at(xi, -j).apply_inverse(y);
      if (signed_distance(D, y) < -1e-12) {
        rep.pre_ok = false;
        rep.escape_step = j;
        return rep;
      }
      orbit.push_back(y);
    }
    orbits.push_back(std::move(orbit));
  }
  for (size_t a = 0; a < orbits.size(); ++a)
    for (size_t b = a + 1; b < orbits.size(); ++b)
      for (int j = 0; j < n; ++j)
        rep.empirical_max = std::max(rep.empirical_max,
                                     (orbits[a][static_cast<size_t>(j)] - orbits[b][static_cast<size_t>(j)]).norm());
  return rep;
}

LambdaUReport verify_lambda_u(const SkewSystem& sys, const TruncatedSequence& xi, const Vec& x,
                              const Region& B, long depth, const std::vector<int>& blocks) {
  if (blocks.empty()) throw input_error("verify_lambda_u: empty block-length set");
  for (int g : blocks)
    if (g < 1) throw input_error("verify_lambda_u: block lengths must be positive");
  LambdaUReport rep;
  std::vector<double> q(static_cast<size_t>(depth) + 1, 0.0);
  Vec y = x;
  long reach = depth;
  for (long m = 1; m <= depth; ++m) {
    if (!xi.has(-m) || !xi.has(-m + sys.window - 1)) { reach = m - 1; break; }
    y = sys.map_at(xi, -m).apply_inverse(y);
    q[static_cast<size_t>(m)] = signed_distance(B, y);
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(static_cast<size_t>(reach) + 1, -inf);
  std::vector<long> prev(static_cast<size_t>(reach) + 1, -1);
  dp[0] = inf;
  for (long m = 1; m <= reach; ++m) {
    if (q[static_cast<size_t>(m)] <= 0.0) continue;
    for (int g : blocks) {
      if (m - g < 0 || dp[static_cast<size_t>(m - g)] <= 0.0) continue;
      const double val = std::min(dp[static_cast<size_t>(m - g)], q[static_cast<size_t>(m)]);
      if (val > dp[static_cast<size_t>(m)]) {
        dp[static_cast<size_t>(m)] = val;
        prev[static_cast<size_t>(m)] = m - g;
      }
    }
  }
  const int maxgap = *std::max_element(blocks.begin(), blocks.end());
  long best_m = -1;
  for (long m = std::max<long>(1, reach - maxgap + 1); m <= reach; ++m)
    if (dp[static_cast<size_t>(m)] > 0.0 && (best_m < 0 || dp[static_cast<size_t>(m)] > dp[static_cast<size_t>(best_m)]))
      best_m = m;
  if (best_m >= 0 && reach == depth) {
    rep.ok = true;
    rep.margin = dp[static_cast<size_t>(best_m)];
    for (long m = best_m; m > 0; m = prev[static_cast<size_t>(m)]) rep.boundaries.push_back(m);
    std::reverse(rep.boundaries.begin(), rep.boundaries.end());
    rep.furthest_boundary = best_m;
  } else {
    for (long m = 1; m <= reach; ++m)
      if (dp[static_cast<size_t>(m)] > 0.0) rep.furthest_boundary = m;
  }
  return rep;
}

}  // namespace skewblend
