#include <doctest.h>

#include "skewblend/skew.hpp"

using namespace skewblend;

namespace {

SkewSystem half_shift_system() {
  // phi_1(x) = x/2, phi_2(x) = x + 1.
  SkewSystem sys;
  sys.d = 2;
  sys.c = 1;
  sys.nu = 0.5;
  sys.alpha = 1.0;
  sys.gamma = 0.45;
  sys.gamma_hat = 1.0 / 1.05;
  Mat A(1, 1);
  Vec b(1);
  A << 0.5;
  b << 0.0;
  sys.set_map(1, FiberMap::affine(A, b));
  A << 1.0;
  b << 1.0;
  sys.set_map(2, FiberMap::affine(A, b));
  return sys;
}

Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}

}  // namespace

TEST_CASE("forward and backward composition") {
  const SkewSystem sys = half_shift_system();
  SUBCASE("n = 0 is the identity") {
    TruncatedSequence xi({}, {1}, 4);
    CHECK(compose_forward(sys, xi, 0, v1(3.7))[0] == doctest::Approx(3.7));
    CHECK(compose_backward(sys, xi, 0, v1(3.7))[0] == doctest::Approx(3.7));
  }
  SUBCASE("three halvings") {
    TruncatedSequence xi({}, {1, 1, 1}, 4);
    CHECK(compose_forward(sys, xi, 3, v1(1.0))[0] == doctest::Approx(0.125));
  }
  SUBCASE("mixed word applies the first symbol first") {
    TruncatedSequence xi({}, {1, 2}, 4);
    CHECK(compose_forward(sys, xi, 2, v1(2.0))[0] == doctest::Approx(2.0));  // (2/2) + 1
  }
  SUBCASE("backward step is the exact inverse") {
    TruncatedSequence xi({1}, {1}, 4);
    CHECK(compose_backward(sys, xi, 1, v1(0.25))[0] == doctest::Approx(0.5));
  }
  SUBCASE("insufficient depth is an input error") {
    TruncatedSequence xi({}, {1}, 4);
    CHECK_THROWS_AS(compose_forward(sys, xi, 2, v1(0)), input_error);
    CHECK_THROWS_AS(compose_backward(sys, xi, 1, v1(0)), input_error);
  }
  SUBCASE("round trip to 1e-12 on random instances") {
    Rng rng(19);
    for (int t = 0; t < 100; ++t) {
      std::vector<Symbol> p, f;
      for (int i = 0; i < 6; ++i) {
        p.push_back(1 + static_cast<int>(rng() % 2));
        f.push_back(1 + static_cast<int>(rng() % 2));
      }
      TruncatedSequence xi(p, f, 6);
      const Vec x = v1(uniform(rng, -2, 2));
      const Vec y = compose_forward(sys, xi, 5, x);
      // Pull the image back along the same five fiber maps at tau^5(xi).
      TruncatedSequence tau5 = xi;
      tau5.past.insert(tau5.past.end(), f.begin(), f.begin() + 5);
      tau5.future.erase(tau5.future.begin(), tau5.future.begin() + 5);
      CHECK(compose_backward(sys, tau5, 5, y)[0] == doctest::Approx(x[0]).epsilon(1e-12));
    }
  }
}

TEST_CASE("derivative cocycle") {
  SkewSystem sys;
  sys.d = 2;
  sys.c = 2;
  sys.nu = 0.5;
  sys.alpha = 1.0;
  sys.gamma = 0.45;
  sys.gamma_hat = 1.0 / 2.1;
  Mat A(2, 2);
  A << 0.5, 0, 0, 2.0;
  sys.set_map(1, FiberMap::affine(A, Vec::Zero(2)));
  A << 2.0, 0, 0, 0.5;
  sys.set_map(2, FiberMap::affine(A, Vec::Zero(2)));

  TruncatedSequence xi({1, 1, 1}, {1, 1, 1}, 8);
  SUBCASE("n = 0 is the identity") {
    CHECK(derivative_cocycle(sys, xi, 0, Vec::Zero(2)).isApprox(Mat::Identity(2, 2)));
  }
  SUBCASE("diagonal powers") {
    const Mat J = derivative_cocycle(sys, xi, 3, Vec::Zero(2));
    CHECK(J(0, 0) == doctest::Approx(0.125));
    CHECK(J(1, 1) == doctest::Approx(8.0));
  }
  SUBCASE("cocycle law at machine precision") {
    TruncatedSequence z({2, 1, 2}, {1, 2, 2, 1, 2}, 8);
    const Mat whole = derivative_cocycle(sys, z, 5, Vec::Zero(2));
    TruncatedSequence tau2 = z;
    tau2.past.insert(tau2.past.end(), z.future.begin(), z.future.begin() + 2);
    tau2.future.erase(tau2.future.begin(), tau2.future.begin() + 2);
    const Mat part = derivative_cocycle(sys, tau2, 3, Vec::Zero(2)) * derivative_cocycle(sys, z, 2, Vec::Zero(2));
    CHECK(whole.isApprox(part, 1e-14));
  }
  SUBCASE("chain rule against finite differences of the composition") {
    TruncatedSequence z({}, {1, 2, 1}, 8);
    const Vec x0 = Vec::Zero(2);
    const Mat J = derivative_cocycle(sys, z, 3, x0);
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
      Vec e = Vec::Zero(2);
      e[j] = h;
      const Vec diff = (compose_forward(sys, z, 3, x0 + e) - compose_forward(sys, z, 3, x0 - e)) / (2 * h);
      CHECK((diff - J.col(j)).norm() / J.col(j).norm() < 1e-6);
    }
  }
}

TEST_CASE("verify_constants") {
  SkewSystem sys = half_shift_system();
  SUBCASE("PHS slacks of the declared constants") {
    sys.gamma = 0.6;
    sys.gamma_hat = 1.0 / 1.1;
    Mat A(1, 1);
    A << 0.8;
    sys.set_map(1, FiberMap::affine(A, Vec::Zero(1)));
    A << 1.05;
    sys.set_map(2, FiberMap::affine(A, Vec::Zero(1)));
    const auto r = verify_constants(sys);
    REQUIRE(r.declared_ok);
    CHECK(r.phs_ok);
    CHECK(r.phs[0].slack() == doctest::Approx(0.1));
    CHECK(r.phs[1].slack() == doctest::Approx(0.4));
    CHECK(r.phs[2].slack() == doctest::Approx(0.1));
    CHECK(r.phs[3].slack() == doctest::Approx(0.9));
  }
  SUBCASE("identity maps at gamma = gamma_hat = 1 fail with zero slack") {
    SkewSystem id;
    id.d = 2;
    id.c = 1;
    id.nu = 0.5;
    id.alpha = 1.0;
    id.gamma = 1.0;
    id.gamma_hat = 1.0;
    id.set_map(1, FiberMap::affine(Mat::Identity(1, 1), Vec::Zero(1)));
    id.set_map(2, FiberMap::affine(Mat::Identity(1, 1), Vec::Zero(1)));
    const auto r = verify_constants(id);
    CHECK(r.declared_ok);
    CHECK_FALSE(r.phs_ok);
    CHECK(r.phs[1].slack() == doctest::Approx(0.0));
  }
  SUBCASE("fiber bunching") {
    sys.gamma = 0.9;
    sys.gamma_hat = 0.9;
    Mat A(1, 1);
    A << 0.95;
    sys.set_map(1, FiberMap::affine(A, Vec::Zero(1)));
    sys.set_map(2, FiberMap::affine(A, Vec::Zero(1)));
    const auto r = verify_constants(sys);
    CHECK(r.bunched_ok);
    CHECK(r.bunching.rhs == doctest::Approx(0.81));
  }
  SUBCASE("declared bound violated by a tight bound names the map") {
    sys.gamma = 0.51;  // phi_1 has tight lower bound 0.5
    const auto r = verify_constants(sys);
    CHECK_FALSE(r.declared_ok);
    CHECK(r.offending_map.find("(1)") != std::string::npos);
  }
  SUBCASE("Lipschitz sandwich with declared constants") {
    const SkewSystem s = half_shift_system();
    Rng rng(23);
    for (int t = 0; t < 300; ++t) {
      const Vec x = v1(uniform(rng, -3, 3)), y = v1(uniform(rng, -3, 3));
      if ((x - y).norm() < 1e-9) continue;
      for (Symbol sym : {1, 2}) {
        const auto& m = s.map_for_key({sym});
        const double r = (m.apply(x) - m.apply(y)).norm() / (x - y).norm();
        CHECK(r >= s.gamma);
        CHECK(r <= s.gamma_hat_inv());
      }
    }
  }
}

TEST_CASE("holder_constant_estimate") {
  Rng rng(29);
  const Region box = Region::box(v1(-1), v1(1));
  SUBCASE("one-step systems have C0 = 0") {
    CHECK(holder_constant_estimate(half_shift_system(), box, 50, rng) == 0.0);
  }
  SUBCASE("window-2 perturbation at disagreement depth 1") {
    // phi_(s0,s1) = 0.6 x + eta * [s1 = 2]; pairs sharing s0 differ by eta at
    // d_Sigma = nu, so the estimate is at least eta / nu.
    const double eta = 0.01, nu = 0.5;
    SkewSystem sys;
    sys.d = 2;
    sys.c = 1;
    sys.nu = nu;
    sys.alpha = 1.0;
    sys.gamma = 0.55;
    sys.gamma_hat = 1.0 / 0.7;
    sys.window = 2;
    sys.C0 = eta / nu / 0.6 + 1e-9;  // inverse spread dominates
    Mat A(1, 1);
    A << 0.6;
    for (Symbol s0 : {1, 2})
      for (Symbol s1 : {1, 2}) sys.set_map({s0, s1}, FiberMap::affine(A, v1(s1 == 2 ? eta : 0.0)));
    const double est = holder_constant_estimate(sys, box, 100, rng);
    CHECK(est >= eta / nu - 1e-12);
    SUBCASE("estimate never exceeds the declared constant on a valid system") {
      CHECK(est <= sys.C0 + 1e-12);
    }
  }
}
