#include "skewblend/shift.hpp"

#include <cmath>
#include <sstream>

namespace skewblend {

std::string Word::str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < symbols.size(); ++i) {
    if (i) os << ",";
    os << symbols[i];
  }
  os << ")";
  return os.str();
}

std::string TruncatedSequence::str() const {
  std::ostringstream os;
  os << "past=[";
  for (size_t i = 0; i < past.size(); ++i) {
    if (i) os << ",";
    os << past[i];
  }
  os << "], future=[";
  for (size_t i = 0; i < future.size(); ++i) {
    if (i) os << ",";
    os << future[i];
  }
  os << "]";
  return os.str();
}

SigmaDistance sigma_distance(const TruncatedSequence& xi, const TruncatedSequence& zeta, double nu) {
  if (nu <= 0.0 || nu >= 1.0) throw input_error("sigma_distance: nu must lie in (0,1)");
  if (xi.depth != zeta.depth) throw input_error("sigma_distance: mismatched truncation depths");
  const long m = xi.depth;
  for (long i = 0; i <= m; ++i) {
    // Coordinate i is jointly constrained only while both store it; the first
    // index that is free in either sequence caps the distance from above.
    const bool fut = xi.has(i) && zeta.has(i);
    if (fut && xi.at(i) != zeta.at(i)) return {std::pow(nu, double(i)), true, i};
    const bool pst = (i == 0) || (xi.has(-i) && zeta.has(-i));
    if (i > 0 && pst && xi.at(-i) != zeta.at(-i)) return {std::pow(nu, double(i)), true, -i};
    if (!fut || !pst) return {std::pow(nu, double(i)), false, -1};
  }
  return {std::pow(nu, double(m)), false, -1};
}

bool cylinder_membership(const TruncatedSequence& xi, CylinderKind kind, Symbol s) {
  if (kind == CylinderKind::horizontal) {
    if (xi.future_length() < 1) throw input_error("cylinder_membership: no coordinate 0 stored");
    return xi.at(0) == s;
  }
  if (xi.past_length() < 1) throw input_error("cylinder_membership: no coordinate -1 stored");
  return xi.at(-1) == s;
}

TruncatedSequence prepend_block(const TruncatedSequence& xi, const Word& alpha) {
  TruncatedSequence out = xi;
  out.past.insert(out.past.begin(), alpha.symbols.begin(), alpha.symbols.end());
  if (out.past_length() > out.depth) out.depth = out.past_length();
  return out;
}

}  // namespace skewblend
