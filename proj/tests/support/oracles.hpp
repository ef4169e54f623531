#pragma once

// Test-only oracles, kept independent of the library's metric and
// protocol implementations.

#include <Eigen/Dense>
#include <cmath>

#include "maxlink/constellation.hpp"

namespace oracles {

struct BruteForceResult {
  double min_value = 0.0;
  long long pairs = 0;
};

// Minimum squared pair distance ||H (x_l - x_n)||^2 over all C(K, 2)
// symbol-vector pairs, by direct enumeration.
template <typename Derived>
BruteForceResult brute_force_min_distance(const Eigen::MatrixBase<Derived>& h,
                                          const maxlink::SymbolVectorSet& vectors) {
  BruteForceResult r;
  r.min_value = std::numeric_limits<double>::infinity();
  const Eigen::Index k = vectors.count();
  for (Eigen::Index l = 0; l < k; ++l) {
    for (Eigen::Index n = l + 1; n < k; ++n) {
      const maxlink::VectorXc delta = vectors.vectors.col(l) - vectors.vectors.col(n);
      const double v = (h * delta).squaredNorm();
      if (v < r.min_value) r.min_value = v;
      ++r.pairs;
    }
  }
  return r;
}

inline double q_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// BPSK over a known fixed channel with symbol energy Es: Q(sqrt(2 Es / N0)).
inline double bpsk_awgn_ber(double symbol_energy, double n0) {
  return q_tail(std::sqrt(2.0 * symbol_energy / n0));
}

// BPSK over Rayleigh fading with mean branch SNR g = Es * sigma2 / N0.
inline double bpsk_rayleigh_ber(double mean_snr) {
  return 0.5 * (1.0 - std::sqrt(mean_snr / (1.0 + mean_snr)));
}

}  // namespace oracles
