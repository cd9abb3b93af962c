#ifndef SKEWBLEND_CONFIG_HPP
#define SKEWBLEND_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "skewblend/cone.hpp"
#include "skewblend/intersect.hpp"
#include "skewblend/region.hpp"
#include "skewblend/skew.hpp"

namespace skewblend {

// Line-based `key = value` file with numbers, integer lists, vectors and
// region literals (ball{center=[...], radius=r} box{lo=[...], hi=[...]}).
struct Config {
  std::map<std::string, std::string> kv;
  std::string path;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& name = "<string>");

  bool has(const std::string& key) const { return kv.count(key) > 0; }
  std::string raw(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<int> integers(const std::string& key) const;
  std::vector<int> integers_or(const std::string& key, std::vector<int> fallback) const;
  Region region(const std::string& key) const;
};

Region parse_region(const std::string& text);

// System description: alphabet size, metric parameters, declared constants
// and the per-key affine fiber maps (`map.<key>.A` row-major, `map.<key>.b`).
SkewSystem system_from_config(const Config& cfg);

HorizontalDisc disc_from_config(const Config& cfg);

Cone cone_from_config(const Config& cfg, int c);

}  // namespace skewblend

#endif
