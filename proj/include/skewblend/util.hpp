#ifndef SKEWBLEND_UTIL_HPP
#define SKEWBLEND_UTIL_HPP

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>

namespace skewblend {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad caller input: missing coordinates, dimension mismatches, malformed
// configs.  CLI maps this to exit code 2.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A requested computation would exceed a configured cap (e.g. grid size).
struct resource_error : std::runtime_error {
  explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A construction cannot be carried out (unsupported structure, degenerate
// parameters).  Distinct from a verification that ran and failed: failed
// verifications are reported as data inside certificates, not thrown.
struct construction_error : std::runtime_error {
  explicit construction_error(const std::string& msg) : std::runtime_error(msg) {}
};

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec uniform_vec(Rng& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

inline Vec gaussian_vec(Rng& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

// Uniform direction on the unit sphere in R^n.
inline Vec unit_vec(Rng& rng, int n) {
  Vec v = gaussian_vec(rng, n);
  double nn = v.norm();
  while (nn < 1e-12) {
    v = gaussian_vec(rng, n);
    nn = v.norm();
  }
  return v / nn;
}

// Random matrix with prescribed singular values (random orthogonal factors).
Mat random_with_spectrum(Rng& rng, const Vec& svals);

// Random orthogonal matrix (Haar-ish via QR of a Gaussian matrix).
Mat random_orthogonal(Rng& rng, int n);

}  // namespace skewblend

#endif
