#include "skewblend/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace skewblend {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& inside) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : inside) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

std::vector<double> parse_bracket_numbers(const std::string& text, const std::string& where) {
  const size_t a = text.find('['), b = text.find(']');
  if (a == std::string::npos || b == std::string::npos || b < a)
    throw input_error(where + ": expected a bracketed list, got '" + text + "'");
  std::vector<double> out;
  for (const auto& tok : split_list(text.substr(a + 1, b - a - 1))) {
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      throw input_error(where + ": bad number '" + tok + "'");
    }
  }
  return out;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Config cfg = parse_string(ss.str(), path);
  cfg.path = path;
  return cfg;
}

Config Config::parse_string(const std::string& text, const std::string& name) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw input_error(name + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw input_error(name + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.kv.count(key)) throw input_error(name + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg.kv[key] = val;
  }
  return cfg;
}

std::string Config::raw(const std::string& key) const {
  auto it = kv.find(key);
  if (it == kv.end()) throw input_error("config: missing key '" + key + "'");
  return it->second;
}

double Config::number(const std::string& key) const {
  try {
    return std::stod(raw(key));
  } catch (const input_error&) {
    throw;
  } catch (...) {
    throw input_error("config: key '" + key + "' is not a number");
  }
}

double Config::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long Config::integer(const std::string& key) const {
  const double v = number(key);
  const long n = static_cast<long>(v);
  if (static_cast<double>(n) != v) throw input_error("config: key '" + key + "' is not an integer");
  return n;
}

std::vector<double> Config::numbers(const std::string& key) const {
  return parse_bracket_numbers(raw(key), "config key '" + key + "'");
}

std::vector<int> Config::integers(const std::string& key) const {
  std::vector<int> out;
  for (double v : numbers(key)) {
    const int n = static_cast<int>(v);
    if (static_cast<double>(n) != v) throw input_error("config: key '" + key + "' holds a non-integer");
    out.push_back(n);
  }
  return out;
}

std::vector<int> Config::integers_or(const std::string& key, std::vector<int> fallback) const {
  return has(key) ? integers(key) : fallback;
}

Region Config::region(const std::string& key) const { return parse_region(raw(key)); }

Region parse_region(const std::string& text) {
  Region r;
  size_t pos = 0;
  bool any = false;
  while (pos < text.size()) {
    const size_t ball = text.find("ball{", pos);
    const size_t box = text.find("box{", pos);
    if (ball == std::string::npos && box == std::string::npos) break;
    const bool is_ball = ball != std::string::npos && (box == std::string::npos || ball < box);
    const size_t open = is_ball ? ball : box;
    const size_t close = text.find('}', open);
    if (close == std::string::npos) throw input_error("region: unbalanced braces in '" + text + "'");
    const std::string body = text.substr(open, close - open + 1);
    if (is_ball) {
      const auto center = parse_bracket_numbers(body.substr(body.find("center")), "region ball center");
      const size_t rpos = body.find("radius");
      if (rpos == std::string::npos) throw input_error("region: ball without radius");
      std::string rv = body.substr(rpos);
      rv = rv.substr(rv.find('=') + 1);
      if (const size_t stop = rv.find_first_of(",}"); stop != std::string::npos) rv = rv.substr(0, stop);
      Vec c(static_cast<long>(center.size()));
      for (size_t i = 0; i < center.size(); ++i) c[static_cast<long>(i)] = center[i];
      r.add_ball(c, std::stod(trim(rv)));
    } else {
      const size_t lo_at = body.find("lo"), hi_at = body.find("hi");
      if (lo_at == std::string::npos || hi_at == std::string::npos)
        throw input_error("region: box needs lo and hi");
      const auto lo = parse_bracket_numbers(body.substr(lo_at), "region box lo");
      const auto hi = parse_bracket_numbers(body.substr(hi_at), "region box hi");
      if (lo.size() != hi.size()) throw input_error("region: box lo/hi length mismatch");
      Vec l(static_cast<long>(lo.size())), h(static_cast<long>(hi.size()));
      for (size_t i = 0; i < lo.size(); ++i) {
        l[static_cast<long>(i)] = lo[i];
        h[static_cast<long>(i)] = hi[i];
      }
      r.add_box(l, h);
    }
    any = true;
    pos = close + 1;
  }
  if (!any) throw input_error("region: no ball{...} or box{...} literal in '" + text + "'");
  return r;
}

SkewSystem system_from_config(const Config& cfg) {
  SkewSystem sys;
  sys.d = static_cast<int>(cfg.integer("alphabet"));
  sys.c = static_cast<int>(cfg.integer("c"));
  sys.nu = cfg.number("nu");
  sys.alpha = cfg.number_or("alpha", 1.0);
  if (cfg.has("gamma_hat_inv"))
    sys.gamma_hat = 1.0 / cfg.number("gamma_hat_inv");
  else
    sys.gamma_hat = cfg.number("gamma_hat");
  sys.gamma = cfg.number("gamma");
  sys.C0 = cfg.number_or("C0", 0.0);
  sys.LD = cfg.number_or("LD", 0.0);
  sys.window = static_cast<int>(cfg.integer("window"));
  if (cfg.has("lambda_D")) sys.lambda_local = cfg.number("lambda_D");
  if (cfg.has("beta_D")) sys.beta_local = cfg.number("beta_D");
  if (sys.nu <= 0 || sys.nu >= 1) throw input_error("config: nu must lie in (0,1)");
  if (sys.d < 2) throw input_error("config: alphabet size must be at least 2");

  int found = 0;
  for (const auto& [key, val] : cfg.kv) {
    if (key.rfind("map.", 0) != 0) continue;
    const size_t dot = key.rfind('.');
    const std::string field = key.substr(dot + 1);
    if (field != "A") continue;
    const std::string id = key.substr(4, dot - 4);
    std::vector<Symbol> window_key;
    for (const auto& tok : split_list(id)) window_key.push_back(std::stoi(tok));
    const auto a = cfg.numbers(key);
    const auto b = cfg.numbers("map." + id + ".b");
    if (static_cast<int>(a.size()) != sys.c * sys.c)
      throw input_error("config: map." + id + ".A must have c*c entries (row-major)");
    if (static_cast<int>(b.size()) != sys.c) throw input_error("config: map." + id + ".b must have c entries");
    Mat A(sys.c, sys.c);
    for (int i = 0; i < sys.c; ++i)
      for (int j = 0; j < sys.c; ++j) A(i, j) = a[static_cast<size_t>(i * sys.c + j)];
    Vec bb(sys.c);
    for (int i = 0; i < sys.c; ++i) bb[i] = b[static_cast<size_t>(i)];
    sys.set_map(window_key, FiberMap::affine(A, bb));
    ++found;
  }
  if (found == 0) throw input_error("config: no fiber maps (map.<key>.A / map.<key>.b)");
  return sys;
}

HorizontalDisc disc_from_config(const Config& cfg) {
  HorizontalDisc disc;
  const auto past = cfg.integers_or("base.past", {});
  const auto future = cfg.integers("base.future");
  disc.base = TruncatedSequence(past, future,
                              cfg.has("base.depth") ? static_cast<int>(cfg.integer("base.depth")) : 64);
  const auto x0 = cfg.numbers("x0");
  disc.x0 = Vec(static_cast<long>(x0.size()));
  for (size_t i = 0; i < x0.size(); ++i) disc.x0[static_cast<long>(i)] = x0[i];
  disc.C = cfg.number_or("C", 0.0);
  disc.alpha = cfg.number_or("alpha", 1.0);
  disc.delta = cfg.number("delta");
  const std::string kind = cfg.has("kind") ? cfg.raw("kind") : "constant";
  if (kind == "constant") {
    disc.kind = DiscKind::constant;
  } else if (kind == "table") {
    disc.kind = DiscKind::table;
    for (const auto& [key, val] : cfg.kv) {
      if (key.rfind("table.", 0) != 0) continue;
      std::vector<Symbol> w;
      for (const auto& tok : split_list(key.substr(6))) w.push_back(std::stoi(tok));
      const auto v = parse_bracket_numbers(val, "disc table value");
      Vec vv(static_cast<long>(v.size()));
      for (size_t i = 0; i < v.size(); ++i) vv[static_cast<long>(i)] = v[i];
      disc.table[w] = vv;
    }
  } else if (kind == "series") {
    disc.kind = DiscKind::series;
    disc.series_amp = cfg.number("series.amp");
    const auto dir = cfg.numbers("series.dir");
    disc.series_dir = Vec(static_cast<long>(dir.size()));
    for (size_t i = 0; i < dir.size(); ++i) disc.series_dir[static_cast<long>(i)] = dir[i];
    disc.series_nu = cfg.number("series.nu");
    disc.series_d = static_cast<int>(cfg.integer("series.d"));
  } else {
    throw input_error("disc: unknown kind '" + kind + "'");
  }
  return disc;
}

Cone cone_from_config(const Config& cfg, int c) {
  const int rank = static_cast<int>(cfg.integer("rank"));
  const double rho = cfg.number("rho");
  if (cfg.has("basis")) {
    const auto b = cfg.numbers("basis");
    if (static_cast<int>(b.size()) != c * c) throw input_error("cone: basis must have c*c entries");
    Cone C = Cone::standard(c, rank, rho);
    Mat B(c, c);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j) B(i, j) = b[static_cast<size_t>(i * c + j)];
    C.basis = B;
    C.basis_inv = B.inverse();
    return C;
  }
  if (cfg.has("axes")) {
    return Cone::axes(c, cfg.integers("axes"), rho);
  }
  return Cone::standard(c, rank, rho);
}

}  // namespace skewblend
