#include <doctest.h>

#include "oracles.hpp"
#include "skewblend/blend.hpp"

using namespace skewblend;

namespace {

Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}

// The two-interval reference: phi_1 = 2x/3 - 1/3, phi_2 = 2x/3 + 1/3.
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

const Region refB = Region::box(v1(-0.9), v1(0.9));
const Region refD = Region::box(v1(-1.0), v1(1.0));

}  // namespace

TEST_CASE("covering certificate on the two-interval reference") {
  const SkewSystem sys = reference1d();
  const auto cert = verify_covering(sys, {1, 2}, refB, refD, 0.001);
  REQUIRE(cert.ok);

  SUBCASE("Lebesgue lower bound brackets the analytic number") {
    // Exact value: the two images (-14/15, 4/15) and (-4/15, 14/15) of B fail
    // together only on sets spanning both outer complements.
    const double exact = oracles::lebesgue_1d_two_intervals(-0.9, 0.9, -14.0 / 15, 4.0 / 15,
                                                            -4.0 / 15, 14.0 / 15);
    CHECK(exact == doctest::Approx(8.0 / 15.0));
    CHECK(cert.lebesgue_lower >= 0.52);
    CHECK(cert.lebesgue_lower <= exact + 1e-9);
    CHECK(cert.delta_max >= 0.156);
    CHECK(cert.lebesgue_method == "anchored");
  }
  SUBCASE("margins and the Hoelder check") {
    CHECK(cert.covering_margin > 0.0);
    CHECK(cert.bd_margin > 0.0);
    CHECK(cert.C_hold == 0.0);
    CHECK(cert.C_lt_L.ok());
  }
  SUBCASE("soundness: random points of closure(B) lie in some image with depth") {
    const CompiledElements ce = compile_elements(sys, CoverMode::cs, cert.blocks);
    Rng rng(41);
    for (int t = 0; t < 10000; ++t) {
      const Vec x = v1(uniform(rng, -0.9, 0.9));
      double best = -1;
      for (int i = 0; i < 2; ++i) best = std::max(best, compiled_depth(ce, refB, i, x));
      CHECK(best > 0.0);
    }
  }
  SUBCASE("shrinking h never decreases the bound beyond lattice alignment noise") {
    double prev = 0.0, prev_h = 0.0;
    for (double h : {0.02, 0.01, 0.005, 0.001}) {
      const auto c = verify_covering(sys, {1, 2}, refB, refD, h);
      REQUIRE(c.ok);
      CHECK(c.lebesgue_lower >= prev - (h + prev_h));
      prev = c.lebesgue_lower;
      prev_h = h;
    }
    // ... and converges to the analytic value within h sqrt(c).
    CHECK(prev >= 8.0 / 15.0 - 2 * 0.001);
  }
  SUBCASE("perturbation soundness at eta below margin * gamma / 2") {
    Rng rng(43);
    const double eta = cert.covering_margin * sys.gamma / 2.0 * 0.9;
    for (int t = 0; t < 20; ++t) {
      SkewSystem per = sys;
      for (auto& [key, m] : per.maps)
        m = FiberMap::affine(m.A, m.b + v1(uniform(rng, -eta, eta)));
      const auto c = verify_covering(per, {1, 2}, refB, refD, 0.002);
      CHECK(c.ok);
    }
  }
}

TEST_CASE("covering failures") {
  const SkewSystem sys = reference1d();
  SUBCASE("B = (-1,1): the closure endpoints are uncovered") {
    const auto cert = verify_covering(sys, {1, 2}, refD, Region::box(v1(-1.2), v1(1.2)), 0.001);
    CHECK_FALSE(cert.ok);
    REQUIRE(cert.witness_x.size() == 1);
    CHECK(std::abs(cert.witness_x[0]) > 0.95);
  }
  SUBCASE("identity maps cannot cover the closure") {
    SkewSystem id = reference1d();
    id.gamma = 0.9;
    id.gamma_hat = 1.0 / 1.05;
    id.set_map(1, FiberMap::affine(Mat::Identity(1, 1), Vec::Zero(1)));
    id.set_map(2, FiberMap::affine(Mat::Identity(1, 1), Vec::Zero(1)));
    const auto cert = verify_covering(id, {1, 2}, refB, refD, 0.01);
    CHECK_FALSE(cert.ok);
  }
  SUBCASE("cu mode swaps to preimages") {
    // Expanding maps cover in cu mode: psi_i = 1.5(x -+ 1/3) have preimages
    // x/1.5 +- 1/3, the mirrored contracting family.
    SkewSystem exp;
    exp.d = 2;
    exp.c = 1;
    exp.nu = 0.5;
    exp.alpha = 1.0;
    exp.gamma = 0.9;
    exp.gamma_hat = 0.6;
    Mat A(1, 1);
    A << 1.5;
    exp.set_map(1, FiberMap::affine(A, v1(0.5)));
    exp.set_map(2, FiberMap::affine(A, v1(-0.5)));
    const auto cert = verify_covering(exp, {1, 2}, refB, refD, 0.002, CoverMode::cu);
    CHECK(cert.ok);
  }
}

TEST_CASE("translation families") {
  SUBCASE("1D halving map: three maps with offsets 0, +-0.6 delta") {
    Mat A(1, 1);
    A << 0.5;
    const auto fam = build_translation_family(FiberMap::affine(A, Vec::Zero(1)), Vec::Zero(1), 0.5);
    CHECK(fam.k == 3);
    REQUIRE(fam.offsets.size() == 3);
    CHECK(fam.offsets[0].norm() == doctest::Approx(0.0));
    CHECK(std::abs(fam.offsets[1][0]) == doctest::Approx(0.6 * fam.delta));
    CHECK(std::abs(fam.offsets[2][0]) == doctest::Approx(0.6 * fam.delta));
    CHECK(fam.self_check.ok);
  }
  SUBCASE("2D contraction at rho = 1/2 needs at most 9 maps") {
    Mat A = 0.5 * Mat::Identity(2, 2);
    const auto fam = build_translation_family(FiberMap::affine(A, Vec::Zero(2)), Vec::Zero(2), 0.4);
    CHECK(fam.k <= 9);
    CHECK(fam.self_check.ok);
  }
  SUBCASE("saddle: offsets only along the contracting axis") {
    Mat A(2, 2);
    A << 0.5, 0, 0, 3.0;
    const auto fam = build_translation_family(FiberMap::affine(A, Vec::Zero(2)), Vec::Zero(2), 0.4);
    CHECK(fam.k == 3);
    for (const auto& v : fam.offsets) CHECK(v[1] == doctest::Approx(0.0));
    CHECK(fam.self_check.ok);
  }
  SUBCASE("offsets scale to zero with eps") {
    Mat A(1, 1);
    A << 0.5;
    double prev = 1e9;
    for (double eps : {0.4, 0.04, 0.004}) {
      const auto fam = build_translation_family(FiberMap::affine(A, Vec::Zero(1)), Vec::Zero(1), eps);
      double maxoff = 0;
      for (const auto& v : fam.offsets) maxoff = std::max(maxoff, v.norm());
      CHECK(maxoff < prev);
      CHECK(maxoff <= eps);
      prev = maxoff;
    }
  }
  SUBCASE("non-contracting seed map is refused") {
    Mat A(1, 1);
    A << 2.0;
    CHECK_THROWS_AS(build_translation_family(FiberMap::affine(A, Vec::Zero(1)), Vec::Zero(1), 0.4),
                    construction_error);
  }
  SUBCASE("moving point is refused") {
    Mat A(1, 1);
    A << 0.5;
    CHECK_THROWS_AS(build_translation_family(FiberMap::affine(A, v1(1.0)), Vec::Zero(1), 0.4),
                    construction_error);
  }
}

TEST_CASE("conley-moser block certificate") {
  SkewSystem sys;
  sys.d = 1;
  sys.c = 2;
  sys.nu = 0.5;
  sys.alpha = 1.0;
  sys.gamma = 0.45;
  sys.gamma_hat = 1.0 / 3.1;
  Mat A(2, 2);
  A << 0.5, 0, 0, 3.0;
  sys.set_map(1, FiberMap::affine(A, Vec::Zero(2)));
  const Region Dcs = Region::box(v1(-1), v1(1));
  const Region Dcu = Region::box(v1(-1), v1(1));

  // The alphabet needs at least two symbols; duplicate the map.
  sys.d = 2;
  sys.set_map(2, FiberMap::affine(A, Vec::Zero(2)));

  SUBCASE("diag(1/2, 3) certifies with margins 0.5 and 2/3") {
    const auto cert = verify_conley_moser(sys, {1}, Dcs, Dcu);
    REQUIRE(cert.ok);
    CHECK(cert.cs_index == 1);
    CHECK(cert.entries[0].cs_contraction == doctest::Approx(0.5));
    CHECK(cert.entries[0].cu_contraction == doctest::Approx(1.0 / 3.0));
    CHECK(cert.entries[0].cs_margin == doctest::Approx(0.5));
    CHECK(cert.entries[0].cu_margin == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("an offset pushing the image outside D fails with a witness") {
    Vec b(2);
    b << 0.8, 0.0;
    sys.set_map(1, FiberMap::affine(A, b));
    const auto cert = verify_conley_moser(sys, {1}, Dcs, Dcu);
    CHECK_FALSE(cert.ok);
    CHECK(cert.failure.find("containment") != std::string::npos);
  }
  SUBCASE("identity blocks are rejected with the offending singular value") {
    sys.set_map(1, FiberMap::affine(Mat::Identity(2, 2), Vec::Zero(2)));
    const auto cert = verify_conley_moser(sys, {1}, Dcs, Dcu);
    CHECK_FALSE(cert.ok);
    CHECK(cert.failure.find("contract") != std::string::npos);
  }
}
