#pragma once

#include "maxlink/metrics.hpp"

namespace maxlink {

// Arithmetic cost of evaluating each criterion over all 2N relay link
// matrices (U submatrices each).
struct ComplexityReport {
  long long x = 0;  // structured metric terms per submatrix
  long long mmd_additions = 0;
  long long mmd_multiplications = 0;
  long long qn_additions = 0;
  long long qn_multiplications = 0;
};

inline ComplexityReport complexity_report(int n_relays, int n_sub,
                                          int n_antennas, int n_distances) {
  if (n_relays < 1 || n_sub < 1)
    throw std::invalid_argument("complexity_report: arguments must be >= 1");
  ComplexityReport r;
  r.x = metric_count(n_antennas, n_distances);
  const long long base = 2LL * n_relays * n_sub;
  r.mmd_additions = base * n_antennas * (r.x - 1);
  r.mmd_multiplications = base * n_antennas * r.x;
  r.qn_additions = base * (static_cast<long long>(n_antennas) * n_antennas - 1);
  r.qn_multiplications = base * static_cast<long long>(n_antennas) * n_antennas;
  return r;
}

}  // namespace maxlink
