#include "skewblend/util.hpp"

#include <Eigen/QR>

namespace skewblend {

Mat random_orthogonal(Rng& rng, int n) {
  Mat G(n, n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = g(rng);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

Mat random_with_spectrum(Rng& rng, const Vec& svals) {
  const int n = static_cast<int>(svals.size());
  Mat U = random_orthogonal(rng, n);
  Mat V = random_orthogonal(rng, n);
  return U * svals.asDiagonal() * V.transpose();
}

}  // namespace skewblend
