#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>

namespace maxlink {

using Complex = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using Rng = std::mt19937_64;

// One zero-mean circularly-symmetric complex Gaussian draw with the given
// total variance (variance/2 per real dimension).
inline Complex complex_gaussian(Rng& rng, double variance) {
  std::normal_distribution<double> axis(0.0, std::sqrt(0.5 * variance));
  const double re = axis(rng);
  const double im = axis(rng);
  return {re, im};
}

}  // namespace maxlink
