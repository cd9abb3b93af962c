#include "skewblend/certificate.hpp"

#include <chrono>
#include <fstream>

namespace skewblend {

namespace {

Json json_vec(const Vec& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_of(const Json& a) {
  Vec v(static_cast<long>(a.size()));
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<long>(i)] = a[i].get<double>();
  return v;
}

Json json_mat(const Mat& m) {
  Json a = Json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

Mat mat_of(const Json& a, int rows, int cols) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = a[static_cast<size_t>(i * cols + j)].get<double>();
  return m;
}

Json json_word(const Word& w) {
  Json a = Json::array();
  for (Symbol s : w.symbols) a.push_back(s);
  return a;
}

Word word_of(const Json& a) {
  std::vector<Symbol> s;
  for (const auto& x : a) s.push_back(x.get<Symbol>());
  return Word(s);
}

double finite(double x) {
  if (std::isinf(x)) return x > 0 ? 1e300 : -1e300;
  return x;
}

}  // namespace

Json json_of(const SkewSystem& sys) {
  Json j;
  j["alphabet"] = sys.d;
  j["c"] = sys.c;
  j["nu"] = sys.nu;
  j["alpha"] = sys.alpha;
  j["gamma"] = sys.gamma;
  j["gamma_hat"] = sys.gamma_hat;
  j["C0"] = sys.C0;
  j["LD"] = sys.LD;
  j["window"] = sys.window;
  if (sys.lambda_local) j["lambda_D"] = *sys.lambda_local;
  if (sys.beta_local) j["beta_D"] = *sys.beta_local;
  Json maps = Json::array();
  for (const auto& [key, m] : sys.maps) {
    Json e;
    e["key"] = key;
    e["A"] = json_mat(m.A);
    e["b"] = json_vec(m.b);
    maps.push_back(e);
  }
  j["maps"] = maps;
  return j;
}

SkewSystem system_of_json(const Json& j) {
  SkewSystem sys;
  sys.d = j.at("alphabet").get<int>();
  sys.c = j.at("c").get<int>();
  sys.nu = j.at("nu").get<double>();
  sys.alpha = j.at("alpha").get<double>();
  sys.gamma = j.at("gamma").get<double>();
  sys.gamma_hat = j.at("gamma_hat").get<double>();
  sys.C0 = j.at("C0").get<double>();
  sys.LD = j.at("LD").get<double>();
  sys.window = j.at("window").get<int>();
  if (j.contains("lambda_D")) sys.lambda_local = j.at("lambda_D").get<double>();
  if (j.contains("beta_D")) sys.beta_local = j.at("beta_D").get<double>();
  for (const auto& e : j.at("maps")) {
    std::vector<Symbol> key = e.at("key").get<std::vector<Symbol>>();
    sys.set_map(key, FiberMap::affine(mat_of(e.at("A"), sys.c, sys.c), vec_of(e.at("b"))));
  }
  return sys;
}

Json json_of(const Region& r) {
  Json j;
  j["c"] = r.c;
  Json balls = Json::array();
  for (const auto& b : r.balls) balls.push_back({{"center", json_vec(b.center)}, {"radius", b.radius}});
  Json boxes = Json::array();
  for (const auto& b : r.boxes) boxes.push_back({{"lo", json_vec(b.lo)}, {"hi", json_vec(b.hi)}});
  j["balls"] = balls;
  j["boxes"] = boxes;
  return j;
}

Region region_of_json(const Json& j) {
  Region r;
  r.c = j.at("c").get<int>();
  for (const auto& b : j.at("balls")) r.add_ball(vec_of(b.at("center")), b.at("radius").get<double>());
  for (const auto& b : j.at("boxes")) r.add_box(vec_of(b.at("lo")), vec_of(b.at("hi")));
  return r;
}

Json json_of(const InequalityCheck& q) {
  return {{"name", q.name}, {"lhs", q.lhs}, {"rhs", q.rhs}, {"slack", q.slack()}, {"ok", q.ok()}};
}

Json json_of(const ConstantsReport& r) {
  Json j;
  j["gamma"] = r.gamma;
  j["gamma_hat"] = r.gamma_hat;
  j["C0"] = r.C0;
  j["nu"] = r.nu;
  j["alpha"] = r.alpha;
  j["LD"] = r.LD;
  j["tight_smin"] = r.tight_smin;
  j["tight_smax"] = r.tight_smax;
  j["declared_ok"] = r.declared_ok;
  if (!r.declared_ok) j["offending_map"] = r.offending_map;
  Json phs = Json::array();
  for (const auto& q : r.phs) phs.push_back(json_of(q));
  j["phs"] = phs;
  j["phs_ok"] = r.phs_ok;
  j["bunching"] = json_of(r.bunching);
  j["bunched_ok"] = r.bunched_ok;
  j["min_phs_slack"] = r.min_phs_slack;
  return j;
}

Json json_of(const CoveringCertificate& cert) {
  Json j;
  j["ok"] = cert.ok;
  if (!cert.ok) j["failure"] = cert.failure;
  j["mode"] = cert.mode == CoverMode::cs ? "cs" : "cu";
  Json blocks = Json::array();
  for (const auto& b : cert.blocks) blocks.push_back(json_word(b));
  j["blocks"] = blocks;
  j["B"] = json_of(cert.B);
  j["D"] = json_of(cert.D);
  j["h"] = cert.h;
  j["grid_correction"] = cert.grid_correction;
  j["grid_points"] = cert.grid_points;
  j["lebesgue_lower"] = cert.lebesgue_lower;
  j["lebesgue_method"] = cert.lebesgue_method;
  j["covering_margin"] = cert.covering_margin;
  j["bd_margin"] = finite(cert.bd_margin);
  Json els = Json::array();
  for (const auto& e : cert.elements)
    els.push_back({{"block", json_word(e.block)},
                   {"gamma_block", e.gamma_block},
                   {"image_in_D_margin", finite(e.image_in_D_margin)}});
  j["elements"] = els;
  j["lambda"] = cert.lambda;
  j["C_hold"] = cert.C_hold;
  j["C_lt_L"] = json_of(cert.C_lt_L);
  j["delta_max"] = cert.delta_max;
  if (cert.witness_x.size() > 0) {
    j["witness_x"] = json_vec(cert.witness_x);
    j["witness_depth"] = cert.witness_depth;
  }
  j["constants"] = json_of(cert.constants);
  j["system"] = json_of(cert.system);
  j["slack"] = cert.ok ? cert.slack() : 0.0;
  return j;
}

CoveringCertificate covering_of_json(const Json& j) {
  CoveringCertificate cert;
  cert.ok = j.at("ok").get<bool>();
  if (j.contains("failure")) cert.failure = j.at("failure").get<std::string>();
  cert.mode = j.at("mode").get<std::string>() == "cs" ? CoverMode::cs : CoverMode::cu;
  for (const auto& b : j.at("blocks")) cert.blocks.push_back(word_of(b));
  cert.B = region_of_json(j.at("B"));
  cert.D = region_of_json(j.at("D"));
  cert.h = j.at("h").get<double>();
  cert.grid_correction = j.at("grid_correction").get<double>();
  cert.grid_points = j.at("grid_points").get<long>();
  cert.lebesgue_lower = j.at("lebesgue_lower").get<double>();
  cert.lebesgue_method = j.at("lebesgue_method").get<std::string>();
  cert.covering_margin = j.at("covering_margin").get<double>();
  cert.bd_margin = j.at("bd_margin").get<double>();
  for (const auto& e : j.at("elements")) {
    ElementReport er;
    er.block = word_of(e.at("block"));
    er.gamma_block = e.at("gamma_block").get<double>();
    er.image_in_D_margin = e.at("image_in_D_margin").get<double>();
    cert.elements.push_back(er);
  }
  cert.lambda = j.at("lambda").get<double>();
  cert.C_hold = j.at("C_hold").get<double>();
  cert.delta_max = j.at("delta_max").get<double>();
  cert.system = system_of_json(j.at("system"));
  cert.constants = verify_constants(cert.system);
  cert.C_lt_L = {"C < L_hat", cert.C_hold, cert.lebesgue_lower};
  return cert;
}

Json json_of(const ConleyMoserCertificate& cert) {
  Json j;
  j["ok"] = cert.ok;
  if (!cert.ok) j["failure"] = cert.failure;
  j["cs_index"] = cert.cs_index;
  Json es = Json::array();
  for (const auto& e : cert.entries)
    es.push_back({{"symbol", e.symbol},
                  {"cs_contraction", e.cs_contraction},
                  {"cu_contraction", e.cu_contraction},
                  {"cs_margin", e.cs_margin},
                  {"cu_margin", e.cu_margin},
                  {"ok", e.ok}});
  j["entries"] = es;
  j["min_contraction_slack"] = finite(cert.min_contraction_slack);
  j["min_margin"] = finite(cert.min_margin);
  return j;
}

Json json_of(const ConeCertificate& cert) {
  Json j;
  j["ok"] = cert.ok;
  if (!cert.ok) j["failure"] = cert.failure;
  j["lambda"] = cert.lambda;
  j["min_margin"] = finite(cert.min_margin);
  j["min_expansion"] = finite(cert.min_expansion);
  j["analytic_blocks"] = cert.analytic_blocks;
  if (cert.witness_symbol) j["witness_symbol"] = cert.witness_symbol;
  return j;
}

Json json_of(const RefinementTrace& tr) {
  Json j;
  j["ok"] = tr.ok;
  if (!tr.ok) {
    j["failure"] = tr.failure;
    j["fail_step"] = tr.fail_step;
  }
  Json steps = Json::array();
  for (const auto& s : tr.steps)
    steps.push_back({{"element", s.element},
                     {"block", json_word(s.block)},
                     {"m_n", s.m_n},
                     {"A_diam_bound", s.A_diam_bound},
                     {"depth_found", s.depth_found},
                     {"V_diam_bound", s.V_diam_bound},
                     {"pullback_bound", s.pullback_bound},
                     {"margin_B", finite(s.margin_B)},
                     {"margin_D", finite(s.margin_D)},
                     {"A_diam_ok", s.A_diam_ok}});
  j["steps"] = steps;
  if (tr.ok) {
    j["point_past"] = tr.point_xi.past;
    j["point_future"] = tr.point_xi.future;
    j["point_x"] = json_vec(tr.point_x);
    j["error_radius"] = tr.error_radius;
  }
  return j;
}

Json json_of(const TransitionWitness& w) {
  Json j;
  j["found"] = w.found;
  if (w.found) {
    j["word"] = json_word(w.word);
    j["x"] = json_vec(w.x);
    j["image"] = json_vec(w.image);
    j["margin"] = w.margin;
  } else {
    j["near_miss"] = finite(w.near_miss);
  }
  return j;
}

Json json_of(const CycleCertificate& cert) {
  Json j;
  j["ok"] = cert.ok;
  if (!cert.ok) j["failure"] = cert.failure;
  j["co_index"] = cert.co_index;
  j["region_gap"] = cert.region_gap_value;
  j["global_slack"] = cert.global_slack;
  j["cs_cover"] = json_of(cert.cs.cover);
  j["cs_structure"] = json_of(cert.cs.structure);
  j["cs_index_1"] = cert.cs.cs_index;
  j["cu_cover"] = json_of(cert.cu.cover);
  j["cu_structure"] = json_of(cert.cu.structure);
  j["cs_index_2"] = cert.cu.cs_index;
  j["t12"] = json_of(cert.t12);
  j["t21"] = json_of(cert.t21);
  return j;
}

Json json_of(const TangentDirectionReport& rep) {
  Json j;
  j["N"] = rep.N;
  j["lambda"] = rep.lambda;
  j["C"] = rep.Cbound;
  j["horizon_too_small"] = rep.horizon_too_small;
  j["d_T"] = rep.d_T;
  Json vs = Json::array();
  for (const auto& v : rep.vectors) {
    Json e;
    e["v"] = json_vec(v.v);
    e["passes"] = v.passes;
    e["worst_ratio"] = v.worst_ratio;
    e["rate_forward"] = v.rate_forward;
    e["rate_backward"] = v.rate_backward;
    vs.push_back(e);
  }
  j["vectors"] = vs;
  return j;
}

namespace {

Json json_of_geometry(const ScenarioGeometry& g) {
  Json j;
  j["c"] = g.c;
  j["i1"] = g.i1;
  j["i2"] = g.i2;
  j["l"] = g.l;
  j["eps"] = g.eps;
  j["variant"] = g.variant == ScenarioVariant::cycle       ? "cycle"
                 : g.variant == ScenarioVariant::homoclinic ? "homoclinic"
                                                            : "identity-arc";
  j["p"] = json_vec(g.p);
  j["q"] = json_vec(g.q);
  j["B1"] = json_of(g.B1);
  j["D1"] = json_of(g.D1);
  j["B2"] = json_of(g.B2);
  j["D2"] = json_of(g.D2);
  j["D1_cs"] = json_of(g.D1_cs);
  j["D1_cu"] = json_of(g.D1_cu);
  j["D2_cs"] = json_of(g.D2_cs);
  j["D2_cu"] = json_of(g.D2_cu);
  j["S1"] = g.S1;
  j["S2"] = g.S2;
  j["fam1_base"] = g.fam1_base;
  j["fam1_twists"] = g.fam1_twists;
  j["fam2_base"] = g.fam2_base;
  j["fam2_twists"] = g.fam2_twists;
  j["pure1"] = g.pure1;
  j["pure2"] = g.pure2;
  j["conn12"] = g.conn12;
  j["conn21"] = g.conn21;
  j["cone_uu"] = {{"l", g.cone_uu.l}, {"rho", g.cone_uu.rho}, {"basis", json_mat(g.cone_uu.basis)}};
  j["cone_ss"] = {{"l", g.cone_ss.l}, {"rho", g.cone_ss.rho}, {"basis", json_mat(g.cone_ss.basis)}};
  j["G1"] = {{"frame", json_mat(g.G1.center.frame)}, {"radius", g.G1.radius}};
  j["G2"] = {{"frame", json_mat(g.G2.center.frame)}, {"radius", g.G2.radius}};
  j["base_h1"] = g.base_h1;
  j["base_h2"] = g.base_h2;
  j["plane_h1"] = g.plane_h1;
  j["plane_h2"] = g.plane_h2;
  j["lambda_u"] = g.lambda_u;
  j["lambda_s"] = g.lambda_s;
  j["design_rate_forward"] = g.design_rate_forward;
  j["design_rate_backward"] = g.design_rate_backward;
  j["refine_depth"] = g.refine_depth;
  j["horizon"] = g.horizon;
  return j;
}

ScenarioGeometry geometry_of_json(const Json& j) {
  ScenarioGeometry g;
  g.c = j.at("c").get<int>();
  g.i1 = j.at("i1").get<int>();
  g.i2 = j.at("i2").get<int>();
  g.l = j.at("l").get<int>();
  g.eps = j.at("eps").get<double>();
  const std::string v = j.at("variant").get<std::string>();
  g.variant = v == "cycle" ? ScenarioVariant::cycle
              : v == "homoclinic" ? ScenarioVariant::homoclinic
                                  : ScenarioVariant::identity_arc;
  g.p = vec_of(j.at("p"));
  g.q = vec_of(j.at("q"));
  g.B1 = region_of_json(j.at("B1"));
  g.D1 = region_of_json(j.at("D1"));
  g.B2 = region_of_json(j.at("B2"));
  g.D2 = region_of_json(j.at("D2"));
  g.D1_cs = region_of_json(j.at("D1_cs"));
  g.D1_cu = region_of_json(j.at("D1_cu"));
  g.D2_cs = region_of_json(j.at("D2_cs"));
  g.D2_cu = region_of_json(j.at("D2_cu"));
  g.S1 = j.at("S1").get<std::vector<Symbol>>();
  g.S2 = j.at("S2").get<std::vector<Symbol>>();
  g.fam1_base = j.at("fam1_base").get<int>();
  g.fam1_twists = j.at("fam1_twists").get<int>();
  g.fam2_base = j.at("fam2_base").get<int>();
  g.fam2_twists = j.at("fam2_twists").get<int>();
  g.pure1 = j.at("pure1").get<Symbol>();
  g.pure2 = j.at("pure2").get<Symbol>();
  g.conn12 = j.at("conn12").get<Symbol>();
  g.conn21 = j.at("conn21").get<Symbol>();
  const auto cone_of = [&](const Json& cj) {
    Cone C = Cone::standard(g.c, cj.at("l").get<int>(), cj.at("rho").get<double>());
    C.basis = mat_of(cj.at("basis"), g.c, g.c);
    C.basis_inv = C.basis.inverse();
    return C;
  };
  g.cone_uu = cone_of(j.at("cone_uu"));
  g.cone_ss = cone_of(j.at("cone_ss"));
  g.G1 = {Plane(mat_of(j.at("G1").at("frame"), g.c, g.l)), j.at("G1").at("radius").get<double>()};
  g.G2 = {Plane(mat_of(j.at("G2").at("frame"), g.c, g.l)), j.at("G2").at("radius").get<double>()};
  g.base_h1 = j.at("base_h1").get<double>();
  g.base_h2 = j.at("base_h2").get<double>();
  g.plane_h1 = j.at("plane_h1").get<double>();
  g.plane_h2 = j.at("plane_h2").get<double>();
  g.lambda_u = j.at("lambda_u").get<double>();
  g.lambda_s = j.at("lambda_s").get<double>();
  g.design_rate_forward = j.at("design_rate_forward").get<double>();
  g.design_rate_backward = j.at("design_rate_backward").get<double>();
  g.refine_depth = j.at("refine_depth").get<int>();
  g.horizon = j.at("horizon").get<int>();
  return g;
}

}  // namespace

Json json_of(const TangencyCertificate& cert) {
  Json j;
  j["ok"] = cert.ok;
  if (!cert.ok) j["failing_stage"] = cert.failing_stage;
  j["geometry"] = json_of_geometry(cert.geom);
  j["system"] = json_of(cert.system);
  j["constants"] = json_of(cert.constants);
  Json lifts = Json::array();
  for (const auto& q : cert.lift_checks) lifts.push_back(json_of(q));
  j["lift_checks"] = lifts;
  j["lifted_bound_forward"] = cert.lifted_bound_forward;
  j["lifted_bound_backward"] = cert.lifted_bound_backward;
  j["cover1"] = json_of(cert.cover1);
  j["cover2"] = json_of(cert.cover2);
  j["conley1"] = json_of(cert.conley1);
  j["conley2"] = json_of(cert.conley2);
  j["cone_u"] = json_of(cert.cone_u);
  j["cone_s"] = json_of(cert.cone_s);
  const auto lifted_json = [](const LiftedCoverSummary& s) {
    return Json{{"ok", s.ok},
                {"min_base_margin", finite(s.min_base_margin)},
                {"min_base_lebesgue", finite(s.min_base_lebesgue)},
                {"plane_margin", finite(s.plane_margin)},
                {"plane_lebesgue", finite(s.plane_lebesgue)},
                {"lebesgue_lower", finite(s.lebesgue_lower)},
                {"delta_max", finite(s.delta_max)}};
  };
  j["lifted1"] = lifted_json(cert.lifted1);
  j["lifted2"] = lifted_json(cert.lifted2);
  j["t3_margin1"] = cert.t3_margin1;
  j["t3_margin2"] = cert.t3_margin2;
  j["lifted_transition"] = {{"found", cert.t_hat.found},
                            {"word", cert.t_hat.found ? json_word(cert.t_hat.word) : Json::array()},
                            {"margin", cert.t_hat.margin}};
  j["t12"] = json_of(cert.t12);
  j["t21"] = json_of(cert.t21);
  j["refinement"] = {{"ok", cert.refinement.ok},
                     {"word", cert.refinement.word},
                     {"min_depth", finite(cert.refinement.min_depth)},
                     {"min_margin_B", finite(cert.refinement.min_margin_B)}};
  j["tangent"] = json_of(cert.tangent);
  j["d_T"] = cert.d_T;
  j["c_T"] = cert.c_T;
  j["rate_forward"] = cert.rate_forward;
  j["rate_backward"] = cert.rate_backward;
  Json stages = Json::array();
  for (const auto& s : cert.stages)
    stages.push_back({{"name", s.name}, {"ok", s.ok}, {"slack", finite(s.slack)}, {"detail", s.detail}});
  j["stages"] = stages;
  j["global_slack"] = finite(cert.global_slack);
  return j;
}

TangencyCertificate tangency_of_json(const Json& j) {
  // The certificate is replayable from its geometry and system echo; use
  // replay_tangency to recompute the dependent fields.
  TangencyCertificate cert;
  cert.geom = geometry_of_json(j.at("geometry"));
  cert.system = system_of_json(j.at("system"));
  cert.ok = j.at("ok").get<bool>();
  if (j.contains("global_slack")) cert.global_slack = j.at("global_slack").get<double>();
  if (j.contains("d_T")) cert.d_T = j.at("d_T").get<int>();
  if (j.contains("c_T")) cert.c_T = j.at("c_T").get<int>();
  return cert;
}

Json json_of(const ProbeReport& rep) {
  Json j;
  j["eta"] = rep.eta;
  j["trials"] = rep.trials;
  j["passed"] = rep.passed;
  j["min_slack"] = finite(rep.min_slack);
  Json rs = Json::array();
  for (const auto& t : rep.results) {
    Json e;
    e["trial"] = t.trial;
    e["ok"] = t.ok;
    if (!t.ok) e["failing_stage"] = t.failing_stage;
    e["slack"] = t.slack;
    rs.push_back(e);
  }
  j["results"] = rs;
  return j;
}

void write_certificate(const std::string& path, const std::string& kind, const Json& payload,
                       unsigned long long seed) {
  Json j;
  j["schema_version"] = kCertificateSchemaVersion;
  j["kind"] = kind;
  j["seed"] = seed;
  j["timestamp"] = static_cast<long long>(
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
          .count());
  j["payload"] = payload;
  std::ofstream out(path);
  if (!out) throw input_error("certificate: cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

Json read_certificate(const std::string& path, const std::string& expected_kind) {
  std::ifstream in(path);
  if (!in) throw input_error("certificate: cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw input_error("certificate: malformed JSON in '" + path + "': " + e.what());
  }
  if (!expected_kind.empty() && j.at("kind").get<std::string>() != expected_kind)
    throw input_error("certificate: '" + path + "' is of kind '" + j.at("kind").get<std::string>() +
                      "', expected '" + expected_kind + "'");
  return j;
}

void emit_decay_csv(const TangentDirectionReport& rep, const std::string& path) {
  if (rep.vectors.empty()) throw input_error("emit_decay_csv: empty report");
  std::ofstream out(path);
  if (!out) throw input_error("emit_decay_csv: cannot write '" + path + "'");
  out << "n,vector,norm,bound\n";
  out.precision(17);
  for (int n = -rep.N; n <= rep.N; ++n) {
    for (size_t v = 0; v < rep.vectors.size(); ++v) {
      const double nm = rep.vectors[v].norms[static_cast<size_t>(n + rep.N)];
      const double bound = rep.Cbound * std::pow(rep.lambda, std::abs(double(n)));
      out << n << "," << v << "," << nm << "," << bound << "\n";
    }
  }
}

}  // namespace skewblend
