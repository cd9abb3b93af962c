#include <doctest.h>

#include "oracles.hpp"
#include "skewblend/grassmann.hpp"

using namespace skewblend;

namespace {

Plane span1(double x, double y) {
  Mat m(2, 1);
  m << x, y;
  return Plane::from_span(m);
}

Plane random_plane(Rng& rng, int c, int l) {
  Mat m(c, l);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < l; ++j) m(i, j) = std::normal_distribution<double>()(rng);
  return Plane::from_span(m);
}

}  // namespace

TEST_CASE("plane distance") {
  SUBCASE("coincident planes") { CHECK(plane_distance(span1(1, 0), span1(1, 0)) == doctest::Approx(0.0)); }
  SUBCASE("rotation by pi/6 gives sin") {
    const double th = M_PI / 6.0;
    CHECK(plane_distance(span1(1, 0), span1(std::cos(th), std::sin(th))) == doctest::Approx(0.5));
  }
  SUBCASE("orthogonal lines in R^3 are at distance 1") {
    CHECK(plane_distance(Plane::coordinate(3, {0}), Plane::coordinate(3, {1})) == doctest::Approx(1.0));
  }
  SUBCASE("sup-inf characterization agrees to 1e-9") {
    Rng rng(101);
    for (int t = 0; t < 2000; ++t) {
      const int c = 2 + static_cast<int>(rng() % 3);
      const int l = 1 + static_cast<int>(rng() % static_cast<unsigned>(c - 1));
      const Plane E = random_plane(rng, c, l), F = random_plane(rng, c, l);
      CHECK(plane_distance(E, F) == doctest::Approx(oracles::plane_distance_supinf(E, F)).epsilon(1e-9));
    }
  }
  SUBCASE("values stay in [0,1] and frames are interchangeable") {
    Rng rng(103);
    for (int t = 0; t < 500; ++t) {
      const Plane E = random_plane(rng, 4, 2), F = random_plane(rng, 4, 2);
      const double d = plane_distance(E, F);
      CHECK(d >= 0.0);
      CHECK(d <= 1.0 + 1e-12);
      // Re-orthonormalize a randomly recombined frame of the same span.
      Mat mix(2, 2);
      mix << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
      const Plane E2 = Plane::from_span(E.frame * mix);
      CHECK(std::abs(plane_distance(E2, F) - d) < 1e-10);
    }
  }
}

TEST_CASE("apply_linear") {
  SUBCASE("identity fixes planes") {
    Rng rng(107);
    const Plane E = random_plane(rng, 3, 2);
    CHECK(plane_distance(apply_linear(Mat::Identity(3, 3), E), E) < 1e-12);
  }
  SUBCASE("diag(2, 1/2) on the diagonal line") {
    Mat T(2, 2);
    T << 2, 0, 0, 0.5;
    const Plane E = span1(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    const Plane img = apply_linear(T, E);
    CHECK(img.frame(0, 0) == doctest::Approx(0.970142500145332));
    CHECK(img.frame(1, 0) == doctest::Approx(0.242535625036333));
  }
  SUBCASE("output frames are orthonormal") {
    Rng rng(109);
    for (int t = 0; t < 1000; ++t) {
      const Mat T = oracles::random_conditioned(rng, 3, 50.0);
      const Plane E = random_plane(rng, 3, 1 + static_cast<int>(rng() % 2));
      const Plane img = apply_linear(T, E);
      CHECK((img.frame.transpose() * img.frame - Mat::Identity(img.l(), img.l())).norm() < 1e-10);
    }
  }
}

TEST_CASE("bi-Lipschitz bound on the induced action") {
  Rng rng(113);
  SUBCASE("identity acts as an isometry") {
    const auto rep = bilipschitz_check(Mat::Identity(3, 3), 1, 500, rng);
    CHECK(rep.observed_max == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.ok);
  }
  SUBCASE("orthogonal maps stay within ratio 1") {
    const Mat Q = random_orthogonal(rng, 4);
    const auto rep = bilipschitz_check(Q, 2, 500, rng);
    CHECK(rep.bound == doctest::Approx(1.0));
    CHECK(rep.observed_max <= 1.0 + 1e-9);
  }
  SUBCASE("diag(2, 1/2) has bound 4") {
    Mat T(2, 2);
    T << 2, 0, 0, 0.5;
    const auto rep = bilipschitz_check(T, 1, 2000, rng);
    CHECK(rep.bound == doctest::Approx(4.0));
    CHECK(rep.ok);
  }
}

TEST_CASE("plane chart") {
  Rng rng(127);
  const Plane E0 = Plane::coordinate(4, {2, 3});
  const PlaneChart chart(E0);
  SUBCASE("W round trip") {
    for (int t = 0; t < 200; ++t) {
      Mat W(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) W(i, j) = uniform(rng, -0.3, 0.3);
      const Plane E = chart.from_W(W);
      CHECK((chart.to_W(E) - W).norm() < 1e-10);
    }
  }
  SUBCASE("chart op-norm balls are exact d_G balls") {
    for (int t = 0; t < 200; ++t) {
      Mat W(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) W(i, j) = uniform(rng, -0.5, 0.5);
      Eigen::JacobiSVD<Mat> svd(W);
      const double s = svd.singularValues().maxCoeff();
      CHECK(plane_distance(E0, chart.from_W(W)) == doctest::Approx(s / std::sqrt(1 + s * s)).epsilon(1e-9));
    }
  }
  SUBCASE("chart is 1-Lipschitz into d_G, bi-Lipschitz in the operator norm on balls") {
    const double wmax = 0.4;
    const double c_low = 1.0 / (1.0 + wmax * wmax);
    for (int t = 0; t < 500; ++t) {
      Mat W1(2, 2), W2(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          W1(i, j) = uniform(rng, -wmax / 2, wmax / 2);
          W2(i, j) = uniform(rng, -wmax / 2, wmax / 2);
        }
      const double dg = plane_distance(chart.from_W(W1), chart.from_W(W2));
      CHECK(dg <= (W1 - W2).norm() + 1e-12);  // Frobenius upper bound
      Eigen::JacobiSVD<Mat> svd(W1 - W2);
      CHECK(dg >= c_low * svd.singularValues().maxCoeff() - 1e-9);
    }
  }
}

TEST_CASE("lift") {
  SUBCASE("affine base with the stated constants") {
    SkewSystem sys;
    sys.d = 2;
    sys.c = 2;
    sys.nu = 0.5;
    sys.alpha = 1.0;
    sys.gamma = 0.6;
    sys.gamma_hat = 0.9;
    Mat A(2, 2);
    A << 0.7, 0, 0, 1.05;
    sys.set_map(1, FiberMap::affine(A, Vec::Zero(2)));
    sys.set_map(2, FiberMap::affine(A, Vec::Ones(2)));
    const LiftedSystem lift = lift_system(sys, 1);
    CHECK(lift.lip_forward == doctest::Approx(std::max(1.0 / 0.9, 1.0 / 0.54)));
    CHECK(lift.lip_forward == doctest::Approx(1.8518518519));
    Rng rng(131);
    const double emp = lifted_lipschitz_empirical(lift, 3000, rng);
    CHECK(emp <= std::max(lift.lip_forward, lift.lip_backward) + 1e-6);
  }
  SUBCASE("bunching failure refuses the lift") {
    std::string reason;
    CHECK_FALSE(lift_admissible(0.5, 1.0, 0.6, 0.5, 0.0, &reason));
    CHECK(reason.find("bunching") != std::string::npos);
  }
  SUBCASE("derivative Lipschitz bound failure refuses the lift") {
    std::string reason;
    // cap = 0.6 (2 - 1/0.9) = 0.533...
    CHECK(lift_admissible(0.5, 1.0, 0.6, 0.9, 0.5, nullptr));
    CHECK_FALSE(lift_admissible(0.5, 1.0, 0.6, 0.9, 0.54, &reason));
    CHECK(reason.find("Lipschitz") != std::string::npos);
  }
  SUBCASE("projection commutes with the lift") {
    SkewSystem sys;
    sys.d = 2;
    sys.c = 3;
    sys.nu = 0.5;
    sys.alpha = 1.0;
    sys.gamma = 0.7;
    sys.gamma_hat = 0.8;
    Rng rng(137);
    for (Symbol s : {1, 2}) {
      Vec sv(3);
      sv << 0.75, 0.9, 1.2;
      sys.set_map(s, FiberMap::affine(random_with_spectrum(rng, sv), uniform_vec(rng, 3, -1, 1)));
    }
    const LiftedSystem lift = lift_system(sys, 1);
    for (int t = 0; t < 1000; ++t) {
      const Vec x = uniform_vec(rng, 3, -1, 1);
      const Plane E = random_plane(rng, 3, 1);
      const Symbol s = 1 + static_cast<int>(rng() % 2);
      const auto [y, F] = lift.apply({s}, x, E);
      CHECK((y - sys.map_for_key({s}).apply(x)).norm() == doctest::Approx(0.0));
    }
  }
  SUBCASE("identity base gives ratio exactly 1") {
    SkewSystem sys;
    sys.d = 2;
    sys.c = 2;
    sys.nu = 0.5;
    sys.alpha = 1.0;
    sys.gamma = 0.9;
    sys.gamma_hat = 0.9;
    sys.set_map(1, FiberMap::affine(Mat::Identity(2, 2), Vec::Zero(2)));
    sys.set_map(2, FiberMap::affine(Mat::Identity(2, 2), Vec::Zero(2)));
    const LiftedSystem lift = lift_system(sys, 1);
    Rng rng(139);
    CHECK(lifted_lipschitz_empirical(lift, 500, rng) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("eq.estimate: plane images under nearby derivatives") {
    // For affine maps the derivative is constant, so the left side is 0.
    SkewSystem sys;
    sys.d = 2;
    sys.c = 2;
    sys.nu = 0.5;
    sys.alpha = 1.0;
    sys.gamma = 0.6;
    sys.gamma_hat = 0.9;
    Mat A(2, 2);
    A << 0.8, 0.1, 0, 1.0;
    sys.set_map(1, FiberMap::affine(A, Vec::Zero(2)));
    sys.set_map(2, FiberMap::affine(A, Vec::Ones(2)));
    Rng rng(141);
    const Plane E = random_plane(rng, 2, 1);
    const Plane F1 = apply_linear(sys.map_for_key({1}).A, E);
    const Plane F2 = apply_linear(sys.map_for_key({2}).A, E);
    CHECK(plane_distance(F1, F2) < 1e-12);
  }
}

TEST_CASE("plane cover on a chart ball") {
  // c = 2, l = 1: contraction towards the axis plus two tilts covers a ball.
  const Plane E0 = Plane::coordinate(2, {1});
  const PlaneBall ball{E0, 0.0995};
  Mat A(2, 2);
  A << 0.8, 0, 0, 1.25;  // W contraction 0.64
  const double t = 0.06;
  Mat Rp(2, 2), Rm(2, 2);
  const double th = std::atan(t);
  Rp << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  Rm = Rp.transpose();
  const auto cert = verify_plane_cover({A, Rp * A, Rm * A}, ball, 0.004);
  CHECK(cert.ok);
  CHECK(cert.covering_margin > 0.0);
  CHECK(cert.lebesgue_lower > 0.0);

  SUBCASE("a single contraction leaves the ball boundary uncovered") {
    const auto bad = verify_plane_cover({A}, ball, 0.004);
    CHECK_FALSE(bad.ok);
  }
}
