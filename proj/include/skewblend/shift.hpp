#ifndef SKEWBLEND_SHIFT_HPP
#define SKEWBLEND_SHIFT_HPP

#include <string>
#include <vector>

#include "skewblend/util.hpp"

namespace skewblend {

// Symbols are 1-based: {1, ..., d}.
using Symbol = int;

// A finite block of symbols.  Orientation (past vs future) is determined by
// where the word is used; stored left to right in increasing index order.
struct Word {
  std::vector<Symbol> symbols;

  Word() = default;
  explicit Word(std::vector<Symbol> s) : symbols(std::move(s)) {}

  int length() const { return static_cast<int>(symbols.size()); }
  bool empty() const { return symbols.empty(); }
  std::string str() const;

  bool operator==(const Word& o) const { return symbols == o.symbols; }
  bool operator<(const Word& o) const { return symbols < o.symbols; }
};

// Depth-m truncation of a bi-sequence: stands for the cylinder of all points
// of Sigma agreeing on the stored coordinates.
//   past  holds indices -past.size() .. -1   (past.back() is index -1),
//   future holds indices 0 .. future.size()-1.
struct TruncatedSequence {
  std::vector<Symbol> past;
  std::vector<Symbol> future;
  int depth = 64;

  TruncatedSequence() = default;
  TruncatedSequence(std::vector<Symbol> p, std::vector<Symbol> f, int m = 64)
      : past(std::move(p)), future(std::move(f)), depth(m) {}

  bool has(long i) const {
    if (i >= 0) return i < static_cast<long>(future.size());
    return -i <= static_cast<long>(past.size());
  }
  Symbol at(long i) const {
    if (!has(i)) throw input_error("truncated sequence: coordinate " + std::to_string(i) + " not stored");
    if (i >= 0) return future[static_cast<size_t>(i)];
    return past[past.size() - static_cast<size_t>(-i)];
  }
  int past_length() const { return static_cast<int>(past.size()); }
  int future_length() const { return static_cast<int>(future.size()); }
  std::string str() const;
};

// Metric value on Sigma.  `exact` distinguishes a genuine value (first
// disagreement found inside the stored window) from the tight upper bound
// nu^j obtained when all jointly stored coordinates agree.
struct SigmaDistance {
  double value = 0.0;
  bool exact = false;
  long disagreement = -1;  // index of first disagreement when exact
};

// d_Sigma(xi, zeta) = nu^l with l the least i >= 0 such that the sequences
// differ at i or -i.  Requires equal truncation depth.
SigmaDistance sigma_distance(const TruncatedSequence& xi, const TruncatedSequence& zeta, double nu);

enum class CylinderKind { horizontal, vertical };

// Horizontal cylinder H_s: xi_0 = s.  Vertical cylinder V_s: xi_{-1} = s.
bool cylinder_membership(const TruncatedSequence& xi, CylinderKind kind, Symbol s);

// Prepends a block to the past:  new past = alpha ++ old past, so the block
// occupies the most negative stored indices.  Future is untouched.  The depth
// grows if needed.
TruncatedSequence prepend_block(const TruncatedSequence& xi, const Word& alpha);

}  // namespace skewblend

#endif
