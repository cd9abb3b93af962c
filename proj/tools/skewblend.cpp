// Command-line front end: config ingestion, subcommand dispatch, certificate
// persistence and CSV emission.  Exit codes: 0 valid certificate, 1
// verification failure (witness in the output), 2 input error.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "skewblend/certificate.hpp"
#include "skewblend/config.hpp"

using namespace skewblend;

namespace {

std::vector<Symbol> parse_symbols(const std::string& csv, const SkewSystem& sys) {
  std::vector<Symbol> S;
  std::string cur;
  for (char ch : csv + ",") {
    if (ch == ',') {
      if (!cur.empty()) S.push_back(std::stoi(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (S.empty())
    for (Symbol s = 1; s <= sys.d; ++s) S.push_back(s);
  return S;
}

int report_and_exit(bool ok, const std::string& what, const std::string& failure) {
  if (ok) {
    std::cout << what << ": OK\n";
    return 0;
  }
  std::cout << what << ": FAILED - " << failure << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skewblend - covering-property certificates for blenders, robust cycles and bundle tangencies in symbolic skew-products"};
  app.require_subcommand(1);

  unsigned long long seed = 0;
  std::string out_path;
  app.add_option("--seed", seed, "global random seed")->capture_default_str();
  app.add_option("--out", out_path, "output certificate path");

  // verify-blender
  auto* vb = app.add_subcommand("verify-blender", "verify the covering property of a blending region");
  std::string vb_system, vb_mode = "cs", vb_symbols, vb_B, vb_D;
  double vb_grid = 0.0;
  vb->add_option("--system", vb_system, "system config file")->required();
  vb->add_option("--mode", vb_mode, "cs or cu")->capture_default_str();
  vb->add_option("--symbols", vb_symbols, "comma separated symbol subset (default: all)");
  vb->add_option("--B", vb_B, "blending region literal (default: key B of the config)");
  vb->add_option("--D", vb_D, "domain region literal (default: key D of the config)");
  vb->add_option("--grid", vb_grid, "grid spacing h (default: min extent / 200)");

  // build-blender
  auto* bb = app.add_subcommand("build-blender", "construct a translation family around a fixed point");
  std::string bb_system, bb_point, bb_mode = "cs";
  int bb_symbol = 1;
  double bb_eps = 0.0;
  bb->add_option("--system", bb_system, "system config file")->required();
  bb->add_option("--symbol", bb_symbol, "symbol of the seed map")->capture_default_str();
  bb->add_option("--fixed-point", bb_point, "fixed point, e.g. [0,0]")->required();
  bb->add_option("--eps", bb_eps, "construction scale")->required();
  bb->add_option("--mode", bb_mode, "cs or cu")->capture_default_str();

  // verify-conley-moser
  auto* cm = app.add_subcommand("verify-conley-moser", "structural hyperbolicity via block contraction");
  std::string cm_system, cm_symbols, cm_dcs, cm_dcu;
  cm->add_option("--system", cm_system)->required();
  cm->add_option("--symbols", cm_symbols, "comma separated symbols (default: all)");
  cm->add_option("--D-cs", cm_dcs, "cs block box (default: key D_cs)");
  cm->add_option("--D-cu", cm_dcu, "cu block box (default: key D_cu)");

  // find-intersection
  auto* fi = app.add_subcommand("find-intersection", "nested refinement of a horizontal disc");
  std::string fi_cert, fi_disc;
  int fi_depth = 12;
  fi->add_option("--certificate", fi_cert, "covering certificate (JSON)")->required();
  fi->add_option("--disc", fi_disc, "disc config file")->required();
  fi->add_option("--depth", fi_depth, "refinement depth N")->capture_default_str();

  // lift
  auto* lf = app.add_subcommand("lift", "induced Grassmannian skew-product with PHS check");
  std::string lf_system;
  int lf_ell = 1, lf_samples = 2000;
  lf->add_option("--system", lf_system)->required();
  lf->add_option("--ell", lf_ell, "plane dimension")->required();
  lf->add_option("--samples", lf_samples, "empirical Lipschitz samples")->capture_default_str();

  // verify-cone
  auto* vc = app.add_subcommand("verify-cone", "unstable cone certificate");
  std::string vc_system, vc_cone, vc_region, vc_kind = "unstable";
  double vc_lambda = 0.5;
  int vc_samples = 64;
  vc->add_option("--system", vc_system)->required();
  vc->add_option("--cone", vc_cone, "cone config file")->required();
  vc->add_option("--region", vc_region, "region literal (default: key D of the system config)");
  vc->add_option("--lambda", vc_lambda, "target rate")->capture_default_str();
  vc->add_option("--kind", vc_kind, "unstable or stable")->capture_default_str();
  vc->add_option("--samples", vc_samples)->capture_default_str();

  // find-transition
  auto* ft = app.add_subcommand("find-transition", "breadth-first transition search in the IFS");
  std::string ft_system, ft_source, ft_target;
  int ft_depth = 4;
  ft->add_option("--system", ft_system)->required();
  ft->add_option("--source", ft_source, "source region literal")->required();
  ft->add_option("--target", ft_target, "target region literal")->required();
  ft->add_option("--depth", ft_depth, "maximal word length")->capture_default_str();

  // verify-cycle
  auto* cy = app.add_subcommand("verify-cycle", "robust-cycle certificate from two blending regions");
  std::string cy_system, cy_b1, cy_d1, cy_b2, cy_d2, cy_dcs1, cy_dcu1, cy_dcs2, cy_dcu2;
  double cy_grid = 0.0;
  int cy_depth = 4;
  cy->add_option("--system", cy_system)->required();
  cy->add_option("--B1", cy_b1)->required();
  cy->add_option("--D1", cy_d1)->required();
  cy->add_option("--B2", cy_b2)->required();
  cy->add_option("--D2", cy_d2)->required();
  cy->add_option("--D1-cs", cy_dcs1)->required();
  cy->add_option("--D1-cu", cy_dcu1)->required();
  cy->add_option("--D2-cs", cy_dcs2)->required();
  cy->add_option("--D2-cu", cy_dcu2)->required();
  cy->add_option("--grid", cy_grid, "grid spacing (default: min extent / 200)");
  cy->add_option("--depth", cy_depth, "transition search depth")->capture_default_str();

  // detect-tangency
  auto* dt = app.add_subcommand("detect-tangency", "tangent directions at a scenario's intersection point");
  std::string dt_cert, dt_csv;
  int dt_horizon = 0;
  dt->add_option("--certificate", dt_cert, "tangency certificate (JSON)")->required();
  dt->add_option("--csv", dt_csv, "decay CSV output path");
  dt->add_option("--horizon", dt_horizon, "override horizon N");

  // build-scenario
  auto* bs = app.add_subcommand("build-scenario", "one-step tangency scenario with full verification");
  int bs_c = 2, bs_i1 = 1, bs_i2 = 1, bs_l = 1;
  double bs_eps = 0.2;
  std::string bs_variant = "cycle";
  bs->add_option("--c", bs_c)->required();
  bs->add_option("--i1", bs_i1)->required();
  bs->add_option("--i2", bs_i2)->required();
  bs->add_option("--ell", bs_l)->required();
  bs->add_option("--eps", bs_eps)->required();
  bs->add_option("--variant", bs_variant, "cycle | homoclinic | identity-arc")->capture_default_str();

  // probe
  auto* pr = app.add_subcommand("probe", "robustness probe of a tangency certificate");
  std::string pr_cert;
  double pr_eta = 0.0;
  int pr_trials = 10;
  pr->add_option("--certificate", pr_cert)->required();
  pr->add_option("--eta", pr_eta, "perturbation size")->required();
  pr->add_option("--trials", pr_trials)->capture_default_str();

  // Global flags may follow the subcommand on the command line.
  for (auto* sc : {vb, bb, cm, fi, lf, vc, ft, cy, dt, bs, pr}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (vb->parsed()) {
      const Config cfg = Config::parse_file(vb_system);
      const SkewSystem sys = system_from_config(cfg);
      const Region B = vb_B.empty() ? cfg.region("B") : parse_region(vb_B);
      const Region D = vb_D.empty() ? cfg.region("D") : parse_region(vb_D);
      double h = vb_grid;
      if (h <= 0.0) {
        const Box bb2 = B.bounding_box();
        h = (bb2.hi - bb2.lo).minCoeff() / 200.0;
      }
      const auto S = parse_symbols(vb_symbols, sys);
      const auto cert = verify_covering(sys, S, B, D, h,
                                        vb_mode == "cu" ? CoverMode::cu : CoverMode::cs);
      if (!out_path.empty()) write_certificate(out_path, "covering", json_of(cert), seed);
      std::cout << "L_hat = " << cert.lebesgue_lower << ", delta_max = " << cert.delta_max
                << ", covering margin = " << cert.covering_margin << "\n";
      return report_and_exit(cert.ok, "covering certificate", cert.failure);
    }
    if (bb->parsed()) {
      const Config cfg = Config::parse_file(bb_system);
      const SkewSystem sys = system_from_config(cfg);
      const auto pt = parse_region("ball{center=" + bb_point + ", radius=1}");
      TranslationOptions topts;
      topts.mode = bb_mode == "cu" ? CoverMode::cu : CoverMode::cs;
      const auto fam = build_translation_family(sys.map_for_key({bb_symbol}), pt.balls[0].center,
                                                bb_eps, topts);
      if (!out_path.empty()) write_certificate(out_path, "covering", json_of(fam.self_check), seed);
      std::cout << "k = " << fam.k << " maps, delta = " << fam.delta
                << ", L_hat = " << fam.self_check.lebesgue_lower << "\n";
      return report_and_exit(fam.self_check.ok, "translation family", fam.self_check.failure);
    }
    if (cm->parsed()) {
      const Config cfg = Config::parse_file(cm_system);
      const SkewSystem sys = system_from_config(cfg);
      const Region dcs = cm_dcs.empty() ? cfg.region("D_cs") : parse_region(cm_dcs);
      const Region dcu = cm_dcu.empty() ? cfg.region("D_cu") : parse_region(cm_dcu);
      const auto cert = verify_conley_moser(sys, parse_symbols(cm_symbols, sys), dcs, dcu);
      if (!out_path.empty()) write_certificate(out_path, "conley-moser", json_of(cert), seed);
      std::cout << "cs-index = " << cert.cs_index << ", min margin = " << cert.min_margin << "\n";
      return report_and_exit(cert.ok, "structural hyperbolicity", cert.failure);
    }
    if (fi->parsed()) {
      const Json j = read_certificate(fi_cert, "covering");
      const CoveringCertificate cert = covering_of_json(j.at("payload"));
      const HorizontalDisc disc = disc_from_config(Config::parse_file(fi_disc));
      const RefinementTrace tr = refine_intersection(cert, disc, fi_depth);
      if (!out_path.empty()) write_certificate(out_path, "refinement", json_of(tr), seed);
      if (tr.ok) {
        std::cout << "word:";
        for (const auto& st : tr.steps) std::cout << " " << st.block.str();
        std::cout << "\npoint x = [";
        for (int i = 0; i < tr.point_x.size(); ++i) std::cout << (i ? "," : "") << tr.point_x[i];
        std::cout << "], error radius " << tr.error_radius << "\n";
      }
      return report_and_exit(tr.ok, "refinement", tr.failure);
    }
    if (lf->parsed()) {
      const Config cfg = Config::parse_file(lf_system);
      const SkewSystem sys = system_from_config(cfg);
      const LiftedSystem lift = lift_system(sys, lf_ell);
      Rng rng(seed);
      const double emp = lifted_lipschitz_empirical(lift, lf_samples, rng);
      Json j;
      j["lip_forward"] = lift.lip_forward;
      j["lip_backward"] = lift.lip_backward;
      j["empirical"] = emp;
      Json checks = Json::array();
      for (const auto& q : lift.checks) checks.push_back(json_of(q));
      j["checks"] = checks;
      j["system"] = json_of(sys);
      if (!out_path.empty()) write_certificate(out_path, "lift", j, seed);
      std::cout << "lifted Lipschitz bound " << std::max(lift.lip_forward, lift.lip_backward)
                << ", empirical " << emp << "\n";
      return report_and_exit(emp <= std::max(lift.lip_forward, lift.lip_backward) + 1e-6, "lift",
                             "empirical ratio exceeds the declared bound");
    }
    if (vc->parsed()) {
      const Config scfg = Config::parse_file(vc_system);
      const SkewSystem sys = system_from_config(scfg);
      const Cone cone = cone_from_config(Config::parse_file(vc_cone), sys.c);
      const Region region = vc_region.empty() ? scfg.region("D") : parse_region(vc_region);
      Rng rng(seed);
      const auto cert = vc_kind == "stable"
                            ? verify_stable_cone(sys, cone, region, vc_lambda, vc_samples, rng)
                            : verify_unstable_cone(sys, cone, region, vc_lambda, vc_samples, rng);
      if (!out_path.empty()) write_certificate(out_path, "cone", json_of(cert), seed);
      std::cout << "min margin " << cert.min_margin << ", min expansion " << cert.min_expansion << "\n";
      return report_and_exit(cert.ok, "cone certificate", cert.failure);
    }
    if (ft->parsed()) {
      const Config cfg = Config::parse_file(ft_system);
      const SkewSystem sys = system_from_config(cfg);
      const auto w = find_transition(sys, parse_region(ft_source), parse_region(ft_target), ft_depth);
      if (!out_path.empty()) write_certificate(out_path, "transition", json_of(w), seed);
      if (w.found)
        std::cout << "word " << w.word.str() << ", margin " << w.margin << "\n";
      else
        std::cout << "not found to depth " << ft_depth << ", near miss " << w.near_miss << "\n";
      return report_and_exit(w.found, "transition", "exhausted depth");
    }
    if (cy->parsed()) {
      const Config cfg = Config::parse_file(cy_system);
      const SkewSystem sys = system_from_config(cfg);
      const Region B1 = parse_region(cy_b1), D1 = parse_region(cy_d1);
      const Region B2 = parse_region(cy_b2), D2 = parse_region(cy_d2);
      double h = cy_grid;
      if (h <= 0.0) {
        const Box bb2 = B1.bounding_box();
        h = (bb2.hi - bb2.lo).minCoeff() / 200.0;
      }
      std::vector<Symbol> S;
      for (Symbol s = 1; s <= sys.d; ++s) S.push_back(s);
      BlenderSpec cs, cu;
      cs.cover = verify_covering(sys, S, B1, D1, h, CoverMode::cs);
      cs.structure = verify_conley_moser(sys, S, parse_region(cy_dcs1), parse_region(cy_dcu1));
      cs.cs_index = cs.structure.cs_index;
      cu.cover = verify_covering(sys, S, B2, D2, h, CoverMode::cu);
      cu.structure = verify_conley_moser(sys, S, parse_region(cy_dcs2), parse_region(cy_dcu2));
      cu.cs_index = cu.structure.cs_index;
      if (!cs.valid() || !cu.valid()) {
        std::cout << "blender stage failed: "
                  << (!cs.cover.ok ? cs.cover.failure
                                   : !cu.cover.ok ? cu.cover.failure
                                                  : "structural certificate invalid")
                  << "\n";
        return 1;
      }
      const auto t12 = find_transition(sys, B1, B2, cy_depth);
      const auto t21 = find_transition(sys, B2, B1, cy_depth);
      if (!t12.found || !t21.found) return report_and_exit(false, "cycle", "missing transition");
      const auto cert = verify_cycle(cs, cu, t12, t21);
      if (!out_path.empty()) write_certificate(out_path, "cycle", json_of(cert), seed);
      std::cout << "co-index " << cert.co_index << ", global slack " << cert.global_slack << "\n";
      return report_and_exit(cert.ok, "cycle certificate", cert.failure);
    }
    if (dt->parsed()) {
      const Json j = read_certificate(dt_cert, "tangency");
      TangencyCertificate cert = tangency_of_json(j.at("payload"));
      ScenarioOptions opts;
      opts.seed = seed;
      if (dt_horizon > 0) {
        cert.geom.horizon = dt_horizon;
        cert.geom.refine_depth = std::max(cert.geom.refine_depth, dt_horizon + 4);
      }
      const TangencyCertificate replay = replay_tangency(cert.geom, cert.system, opts);
      if (!dt_csv.empty() && !replay.tangent.vectors.empty()) emit_decay_csv(replay.tangent, dt_csv);
      if (!out_path.empty()) write_certificate(out_path, "tangent-directions", json_of(replay.tangent), seed);
      std::cout << "d_T = " << replay.d_T << ", c_T = " << replay.c_T << ", rates ("
                << replay.rate_forward << ", " << replay.rate_backward << ")\n";
      return report_and_exit(replay.ok, "tangency replay", replay.failing_stage);
    }
    if (bs->parsed()) {
      ScenarioOptions opts;
      opts.seed = seed;
      if (bs_variant == "homoclinic") opts.variant = ScenarioVariant::homoclinic;
      else if (bs_variant == "identity-arc") opts.variant = ScenarioVariant::identity_arc;
      else if (bs_variant != "cycle") throw input_error("unknown variant '" + bs_variant + "'");
      const TangencyCertificate cert = build_tangency_scenario(bs_c, bs_i1, bs_i2, bs_l, bs_eps, opts);
      if (!out_path.empty()) write_certificate(out_path, "tangency", json_of(cert), seed);
      std::cout << "d = " << cert.system.d << " maps, d_T = " << cert.d_T << ", c_T = " << cert.c_T
                << ", global slack = " << cert.global_slack << "\n";
      return report_and_exit(cert.ok, "tangency certificate", cert.failing_stage);
    }
    if (pr->parsed()) {
      const Json j = read_certificate(pr_cert, "tangency");
      const TangencyCertificate cert = tangency_of_json(j.at("payload"));
      const ProbeReport rep = robustness_probe(cert, pr_eta, pr_trials, seed);
      if (!out_path.empty()) write_certificate(out_path, "probe", json_of(rep), seed);
      std::cout << rep.passed << "/" << rep.trials << " trials passed, min slack " << rep.min_slack << "\n";
      for (const auto& t : rep.results)
        if (!t.ok) {
          std::cout << "first failure: trial " << t.trial << " at stage '" << t.failing_stage << "'\n";
          break;
        }
      return rep.passed == rep.trials ? 0 : 1;
    }
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const resource_error& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 2;
  } catch (const construction_error& e) {
    std::cerr << "construction error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
