// Acceptance suite: every criterion prints one pass/fail line with the
// measured quantities.  Exit code = number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <vector>

#include "oracles.hpp"
#include "skewblend/certificate.hpp"
#include "skewblend/config.hpp"

using namespace skewblend;
using Clock = std::chrono::steady_clock;

namespace {

Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}

SkewSystem reference1d() {
  SkewSystem sys;
  sys.d = 2;
  sys.c = 1;
  sys.nu = 0.5;
  sys.alpha = 1.0;
  sys.gamma = 0.6;
  sys.gamma_hat = 1.0 / 1.1;
  Mat A(1, 1);
  A << 2.0 / 3.0;
  sys.set_map(1, FiberMap::affine(A, v1(-1.0 / 3.0)));
  sys.set_map(2, FiberMap::affine(A, v1(1.0 / 3.0)));
  return sys;
}

SkewSystem window2_system(double C0) {
  const double nu = 0.5, contraction = 0.6;
  SkewSystem sys;
  sys.d = 2;
  sys.c = 1;
  sys.nu = nu;
  sys.alpha = 1.0;
  sys.gamma = 0.55;
  sys.gamma_hat = 1.0 / 0.7;
  sys.window = 2;
  sys.C0 = C0;
  const double eta = C0 * nu * contraction;
  Mat A(1, 1);
  A << contraction;
  for (Symbol s0 : {1, 2})
    for (Symbol s1 : {1, 2})
      sys.set_map({s0, s1}, FiberMap::affine(A, v1((s0 == 2 ? 0.015 : 0.0) + (s1 == 2 ? eta : 0.0))));
  return sys;
}

struct Harness {
  int failed = 0;
  int index = 0;
  void run(const std::string& what, const std::function<std::pair<bool, std::string>()>& fn) {
    ++index;
    std::pair<bool, std::string> r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %d: %s  (%s)\n", r.first ? "PASS" : "FAIL", index, what.c_str(),
                r.second.c_str());
    std::fflush(stdout);
    if (!r.first) ++failed;
  }
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

int main() {
  Harness H;
  const Region refB = Region::box(v1(-0.9), v1(0.9));
  const Region refD = Region::box(v1(-1.0), v1(1.0));

  // Shared artifacts across criteria.
  CoveringCertificate ref_cert;
  TangencyCertificate cert8;

  // 1. Covering criterion on the 1D reference system.
  H.run("covering criterion: reference system, h = 0.001, L_hat in [0.52, 0.534]", [&] {
    const auto t0 = Clock::now();
    ref_cert = verify_covering(reference1d(), {1, 2}, refB, refD, 0.001);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool ok = ref_cert.ok && ref_cert.lebesgue_lower >= 0.52 &&
                    ref_cert.lebesgue_lower <= 0.534 && ref_cert.delta_max >= 0.156 && secs < 1.0;
    return std::make_pair(ok, "L_hat = " + fmt(ref_cert.lebesgue_lower) +
                                  ", delta_max = " + fmt(ref_cert.delta_max) + ", " + fmt(secs) + " s");
  });

  // 2. Refinement algorithm at depth 12 plus the brute-force word oracle.
  H.run("refinement: diameter claims, Lambda^u replay, lex-least oracle to length 8", [&] {
    if (!ref_cert.ok) return std::make_pair(false, std::string("no reference certificate"));
    HorizontalDisc disc;
    disc.base = TruncatedSequence({}, std::vector<Symbol>(8, 1), 64);
    disc.kind = DiscKind::constant;
    disc.x0 = v1(0.0);
    disc.delta = 0.1;
    const auto tr = refine_intersection(ref_cert, disc, 12);
    if (!tr.ok) return std::make_pair(false, "refinement failed: " + tr.failure);
    bool conditions = true;
    for (const auto& st : tr.steps) {
      conditions = conditions && st.V_diam_bound <= disc.C * std::pow(0.5, double(st.m_n)) + 1e-15;
      conditions = conditions && st.A_diam_ok && st.A_diam_bound < ref_cert.lebesgue_lower;
      conditions = conditions && st.margin_B > 0.0 && st.margin_D > 0.0;
    }
    const auto rep = verify_lambda_u(ref_cert.system, tr.point_xi, tr.point_x, ref_cert.B, 12, {1});
    conditions = conditions && rep.ok && rep.margin > 0.0;
    // Oracle equivalence over several constant discs.
    Rng rng(2024);
    bool oracle_ok = true;
    for (int t = 0; t < 40; ++t) {
      HorizontalDisc d2 = disc;
      d2.delta = 0.05;
      d2.x0 = v1(uniform(rng, -0.7, 0.7));
      const auto tr8 = refine_intersection(ref_cert, d2, 8);
      if (!tr8.ok) {
        oracle_ok = false;
        break;
      }
      std::vector<Symbol> produced;
      for (int idx : tr8.chosen)
        produced.push_back(ref_cert.blocks[static_cast<size_t>(idx)].symbols[0]);
      const auto lex = oracles::lex_least_admissible(ref_cert.system, ref_cert.B, d2.x0, 8);
      oracle_ok = oracle_ok && lex.has_value() && produced == *lex;
    }
    return std::make_pair(conditions && oracle_ok,
                          "margin = " + fmt(rep.margin) + ", 40/40 oracle words matched");
  });

  // 3. Hoelder transverse bound on depth-2 systems.
  H.run("Hoelder bound: empirical spread below the analytic bound, C0 in {0.01, 0.02, 0.05}", [&] {
    Rng rng(3033);
    const Region D = Region::box(v1(-1), v1(1));
    long checked = 0, violations = 0;
    for (double C0 : {0.01, 0.02, 0.05}) {
      SkewSystem sys = window2_system(C0);
      for (int t = 0; t < 334; ++t) {
        const int n = 1 + static_cast<int>(rng() % 4);
        std::vector<Symbol> past, future;
        for (int i = 0; i < n; ++i) past.push_back(1 + static_cast<int>(rng() % 2));
        const int flen = static_cast<int>(rng() % 3);
        for (int i = 0; i < flen; ++i) future.push_back(1 + static_cast<int>(rng() % 2));
        TruncatedSequence word(past, future, 16);
        const auto rep = holder_transverse_bound(sys, word, v1(uniform(rng, -0.2, 0.2)), n, D, 12, rng);
        if (!rep.pre_ok) continue;
        ++checked;
        if (rep.empirical_max > rep.bound + 1e-12) ++violations;
      }
    }
    return std::make_pair(checked >= 1000 && violations == 0,
                          std::to_string(checked) + " pairs, " + std::to_string(violations) + " violations");
  });

  // 4. Grassmannian metric against the sup-inf oracle and the rotation case.
  H.run("plane metric: sup-inf oracle within 1e-9 on 1e4 pairs; rotation gives |sin|", [&] {
    Rng rng(4044);
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
      const int c = 2 + static_cast<int>(rng() % 3);
      const int l = 1 + static_cast<int>(rng() % static_cast<unsigned>(c - 1));
      Mat a(c, l), b(c, l);
      for (int i = 0; i < c; ++i)
        for (int j = 0; j < l; ++j) {
          a(i, j) = std::normal_distribution<double>()(rng);
          b(i, j) = std::normal_distribution<double>()(rng);
        }
      const Plane E = Plane::from_span(a), F = Plane::from_span(b);
      worst = std::max(worst, std::abs(plane_distance(E, F) - oracles::plane_distance_supinf(E, F)));
    }
    double worst_rot = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double th = 1.5 * double(k) / 100.0;
      Mat e1(2, 1), f(2, 1);
      e1 << 1, 0;
      f << std::cos(th), std::sin(th);
      worst_rot = std::max(worst_rot, std::abs(plane_distance(Plane::from_span(e1), Plane::from_span(f)) -
                                               std::abs(std::sin(th))));
    }
    return std::make_pair(worst <= 1e-9 && worst_rot <= 1e-9,
                          "oracle gap " + fmt(worst) + ", rotation gap " + fmt(worst_rot));
  });

  // 5. Bi-Lipschitz bound with condition numbers up to 1e3.
  H.run("bi-Lipschitz bound: observed ratio below ||T|| ||T^-1|| + 1e-9 on 1e4 draws", [&] {
    Rng rng(5055);
    long bad = 0;
    double worst_excess = -1e9;
    for (int t = 0; t < 10000; ++t) {
      const int c = 2 + static_cast<int>(rng() % 3);
      const int l = 1 + static_cast<int>(rng() % static_cast<unsigned>(c - 1));
      const Mat T = oracles::random_conditioned(rng, c, 1000.0);
      Mat a(c, l), b(c, l);
      for (int i = 0; i < c; ++i)
        for (int j = 0; j < l; ++j) {
          a(i, j) = std::normal_distribution<double>()(rng);
          b(i, j) = std::normal_distribution<double>()(rng);
        }
      const Plane E = Plane::from_span(a), F = Plane::from_span(b);
      const double d = plane_distance(E, F);
      if (d < 1e-9) continue;
      const double ratio = plane_distance(apply_linear(T, E), apply_linear(T, F)) / d;
      Eigen::JacobiSVD<Mat> svd(T);
      const double bound = svd.singularValues().maxCoeff() / svd.singularValues().minCoeff();
      worst_excess = std::max(worst_excess, ratio - bound);
      if (ratio > bound + 1e-9) ++bad;
    }
    return std::make_pair(bad == 0, "worst ratio excess " + fmt(worst_excess));
  });

  // 6. Lift constants and the refusal boundary.
  H.run("lift: empirical Lipschitz below the declared bound; refusal iff the conditions fail", [&] {
    Rng rng(6066);
    // Empirical bound on a constructed system.
    SkewSystem sys;
    sys.d = 2;
    sys.c = 3;
    sys.nu = 0.5;
    sys.alpha = 1.0;
    sys.gamma = 0.7;
    sys.gamma_hat = 0.8;
    for (Symbol s : {1, 2}) {
      Vec sv(3);
      sv << 0.75, 0.95, 1.2;
      sys.set_map(s, FiberMap::affine(random_with_spectrum(rng, sv), uniform_vec(rng, 3, -0.5, 0.5)));
    }
    const LiftedSystem lift = lift_system(sys, 1);
    const double emp = lifted_lipschitz_empirical(lift, 10000, rng);
    const bool emp_ok = emp <= std::max(lift.lip_forward, lift.lip_backward) + 1e-6;
    // Boundary fuzz of the admissibility predicate against lift_system.
    int agree = 0;
    for (int t = 0; t < 100; ++t) {
      const double nu = uniform(rng, 0.25, 0.85);
      const double gamma = uniform(rng, nu + 0.01, 0.99);
      const double ghinv = uniform(rng, 1.01, 1.0 / nu - 0.01);
      const double LD = uniform(rng, 0.0, 1.2) * gamma * (1.0 / nu - ghinv);
      SkewSystem tiny;
      tiny.d = 2;
      tiny.c = 2;
      tiny.nu = nu;
      tiny.alpha = 1.0;
      tiny.gamma = gamma;
      tiny.gamma_hat = 1.0 / ghinv;
      tiny.LD = LD;
      const double mid = std::sqrt(gamma * ghinv);
      tiny.set_map(1, FiberMap::affine(mid * Mat::Identity(2, 2), Vec::Zero(2)));
      tiny.set_map(2, FiberMap::affine(mid * Mat::Identity(2, 2), Vec::Zero(2)));
      bool refused = false;
      try {
        lift_system(tiny, 1);
      } catch (const input_error&) {
        refused = true;
      }
      if (refused == !lift_admissible(nu, 1.0, gamma, 1.0 / ghinv, LD)) ++agree;
    }
    return std::make_pair(emp_ok && agree == 100,
                          "empirical " + fmt(emp) + " vs bound " +
                              fmt(std::max(lift.lip_forward, lift.lip_backward)) + ", fuzz " +
                              std::to_string(agree) + "/100");
  });

  // 7. Cones: certification, backward decay, perturbation stability.
  H.run("cones: diag(3,1/3) certifies, exact backward rate 1/3, 100/100 perturbations", [&] {
    Rng rng(7077);
    Mat A(2, 2);
    A << 3, 0, 0, 1.0 / 3.0;
    SkewSystem sys;
    sys.d = 2;
    sys.c = 2;
    sys.nu = 0.5;
    sys.alpha = 1.0;
    sys.gamma = 0.3;
    sys.gamma_hat = 1.0 / 3.1;
    sys.set_map(1, FiberMap::affine(A, Vec::Zero(2)));
    sys.set_map(2, FiberMap::affine(A, Vec::Zero(2)));
    const Cone C = Cone::standard(2, 1, 0.5);
    const Region D = Region::box((Vec(2) << -1, -1).finished(), (Vec(2) << 1, 1).finished());
    const auto cert = verify_unstable_cone(sys, C, D, 0.4, 64, rng);
    if (!cert.ok || cert.min_expansion < 2.68 || cert.min_margin <= 0.0)
      return std::make_pair(false, "certificate: expansion " + fmt(cert.min_expansion));
    TruncatedSequence xi(std::vector<Symbol>(12, 1), {1}, 16);
    const auto bc = backward_contraction_check(sys, C, xi, Vec::Zero(2), 10, (Vec(2) << 1, 0).finished(),
                                               1.0 / 3.0 + 1e-9, D);
    if (!bc.ok || std::abs(bc.fitted_rate - 1.0 / 3.0) > 1e-9)
      return std::make_pair(false, "backward rate " + fmt(bc.fitted_rate));
    const double eta = cert.min_margin * (1.0 / 3.0) / 4.0;
    int pass = 0;
    for (int t = 0; t < 100; ++t) {
      SkewSystem per = sys;
      for (auto& [key, m] : per.maps) {
        Mat G(2, 2);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) G(i, j) = std::normal_distribution<double>()(rng);
        Eigen::JacobiSVD<Mat> svd(G);
        m = FiberMap::affine(m.A + (eta / svd.singularValues().maxCoeff()) * G, m.b);
      }
      Rng inner(9000 + t);
      if (verify_unstable_cone(per, C, D, 0.4, 64, inner).ok) ++pass;
    }
    return std::make_pair(pass == 100, "expansion " + fmt(cert.min_expansion) + ", rate " +
                                           fmt(bc.fitted_rate) + ", survivals " + std::to_string(pass) + "/100");
  });

  // 8. End-to-end tangency scenario in dimension four.
  H.run("tangency scenario: c=4, i1=i2=2, l=2, eps=0.2; c_T=2, d_T=2 at N=20, rates within 10%, < 60 s", [&] {
    const auto t0 = Clock::now();
    cert8 = build_tangency_scenario(4, 2, 2, 2, 0.2);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!cert8.ok)
      return std::make_pair(false, "failing stage: " + cert8.failing_stage + " (" + fmt(secs) + " s)");
    const bool rates_ok =
        std::abs(cert8.rate_forward / cert8.geom.design_rate_forward - 1.0) < 0.10 &&
        std::abs(cert8.rate_backward / cert8.geom.design_rate_backward - 1.0) < 0.10;
    const bool ok = cert8.c_T == 2 && cert8.d_T == 2 && cert8.geom.horizon == 20 && rates_ok && secs < 60.0;
    return std::make_pair(ok, "d = " + std::to_string(cert8.system.d) + " maps, slack = " +
                                  fmt(cert8.global_slack) + ", rates (" + fmt(cert8.rate_forward) + ", " +
                                  fmt(cert8.rate_backward) + "), " + fmt(secs) + " s");
  });

  // 9. Robustness probe around the scenario.
  H.run("robustness probe: eta = slack*gamma/4 passes 100/100; eta = 10*slack names a failing stage", [&] {
    if (!cert8.ok) return std::make_pair(false, std::string("no scenario certificate"));
    const double eta_small = cert8.global_slack * cert8.system.gamma / 4.0;
    const auto rep = robustness_probe(cert8, eta_small, 100, 99);
    if (rep.passed != rep.trials)
      return std::make_pair(false, std::to_string(rep.passed) + "/100 at eta = " + fmt(eta_small));
    const auto rep10 = robustness_probe(cert8, 10.0 * cert8.global_slack, 20, 17);
    bool named = false;
    for (const auto& t : rep10.results) named = named || (!t.ok && !t.failing_stage.empty());
    return std::make_pair(named, "small eta " + fmt(eta_small) + ": 100/100; large eta failures " +
                                     std::to_string(rep10.trials - rep10.passed) + "/20");
  });

  // 10. Transition search equals exhaustive enumeration.
  H.run("transition search: (length, lex) optimal on 50 random configurations", [&] {
    Rng rng(1010);
    int matched = 0;
    for (int t = 0; t < 50; ++t) {
      SkewSystem sys;
      sys.d = 2 + static_cast<int>(rng() % 2);
      sys.c = 1;
      sys.nu = 0.5;
      sys.alpha = 1.0;
      sys.gamma = 0.2;
      sys.gamma_hat = 1.0 / 2.5;
      Mat A(1, 1);
      for (Symbol s = 1; s <= sys.d; ++s) {
        A << uniform(rng, 0.35, 2.2);
        sys.set_map(s, FiberMap::affine(A, v1(uniform(rng, -1, 1))));
      }
      const Region source = Region::ball(v1(uniform(rng, -1, 1)), uniform(rng, 0.2, 0.5));
      const Region target = Region::ball(v1(uniform(rng, -2.5, 2.5)), uniform(rng, 0.05, 0.4));
      const int depth = 3 + static_cast<int>(rng() % 4);  // up to 6
      const auto seeds = transition_seeds(source);
      const auto fast = find_transition(sys, seeds, target, depth);
      const auto slow = oracles::transition_by_enumeration(sys, seeds, target, depth);
      const bool same = fast.found == slow.found &&
                        (!fast.found || (fast.word.symbols == slow.word.symbols &&
                                         std::abs(fast.margin - slow.margin) < 1e-12));
      if (same) ++matched;
    }
    return std::make_pair(matched == 50, std::to_string(matched) + "/50 matched");
  });

  // Structural replacement for hyperbolicity (explicitly out of scope):
  // the block certificate accepts the diagonal examples and rejects identity.
  H.run("structural check: Conley-Moser blocks certify diag(1/2,3) and reject identity", [&] {
    SkewSystem sys;
    sys.d = 2;
    sys.c = 2;
    sys.nu = 0.5;
    sys.alpha = 1.0;
    sys.gamma = 0.45;
    sys.gamma_hat = 1.0 / 3.1;
    Mat A(2, 2);
    A << 0.5, 0, 0, 3.0;
    sys.set_map(1, FiberMap::affine(A, Vec::Zero(2)));
    sys.set_map(2, FiberMap::affine(A, Vec::Zero(2)));
    const Region Dcs = Region::box(v1(-1), v1(1)), Dcu = Region::box(v1(-1), v1(1));
    const auto good = verify_conley_moser(sys, {1, 2}, Dcs, Dcu);
    sys.set_map(1, FiberMap::affine(Mat::Identity(2, 2), Vec::Zero(2)));
    const auto bad = verify_conley_moser(sys, {1, 2}, Dcs, Dcu);
    const bool ok = good.ok && good.entries[0].cs_margin == 0.5 && !bad.ok;
    return std::make_pair(ok, "margins (" + fmt(good.entries[0].cs_margin) + ", " +
                                  fmt(good.entries[0].cu_margin) + "), identity rejected");
  });

  std::printf("%d of %d criteria failed\n", H.failed, H.index);
  return H.failed;
}
