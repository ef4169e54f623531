#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "maxlink/selection.hpp"

namespace maxlink {

// Gaussian tail probability via the complementary error function.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Worst-case pairwise error probability of a direct slot:
// Q(sqrt(E / (2 N0 M) * d'_min)), with d'_min the energy-free minimum
// distance of the selected matrix.
inline double pep_direct(double d_min, double energy, double noise_psd,
                         int n_antennas) {
  if (d_min < 0.0 || energy <= 0.0 || noise_psd <= 0.0 || n_antennas < 1)
    throw std::invalid_argument("pep_direct: invalid arguments");
  return q_function(std::sqrt(energy / (2.0 * noise_psd * n_antennas) * d_min));
}

// Worst-case pairwise error probability of a cooperative slot (two hops):
// 1 - (1 - Q(.))^2 with the same argument as the direct case.
inline double pep_cooperative(double d_min, double energy, double noise_psd,
                              int n_antennas) {
  const double q = pep_direct(d_min, energy, noise_psd, n_antennas);
  return 1.0 - (1.0 - q) * (1.0 - q);
}

struct PepTraceEntry {
  Mode mode = Mode::MaxLinkSR;
  double d_min = 0.0;  // energy-free minimum distance of the selected matrix
};

// Mean worst-case PEP over a per-slot selection trace: direct slots use the
// single-hop expression, cooperative slots the two-hop one.
inline double mean_worst_case_pep(const std::vector<PepTraceEntry>& trace,
                                  double energy, double noise_psd,
                                  int n_antennas) {
  if (trace.empty())
    throw std::invalid_argument("mean_worst_case_pep: empty trace");
  double sum = 0.0;
  for (const PepTraceEntry& e : trace) {
    sum += e.mode == Mode::DirectTx
               ? pep_direct(e.d_min, energy, noise_psd, n_antennas)
               : pep_cooperative(e.d_min, energy, noise_psd, n_antennas);
  }
  return sum / static_cast<double>(trace.size());
}

}  // namespace maxlink
