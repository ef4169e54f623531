#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "maxlink/constellation.hpp"
#include "maxlink/types.hpp"

namespace maxlink {

struct DetectionResult {
  Eigen::Index index = 0;   // detected vector's index in the SymbolVectorSet
  double residual = 0.0;    // squared norm at the minimizer
};

// Exhaustive search is the only detector; anything larger than this is
// refused rather than silently taking hours.
inline constexpr Eigen::Index kMaxDetectionCandidates = 4096;

// Argmin over precomputed received-signal hypotheses (columns of
// `candidates`, typically sqrt(energy) * H * x_k). Ties break toward the
// lowest column index.
template <typename DerivedY, typename DerivedC>
DetectionResult ml_detect_candidates(const Eigen::MatrixBase<DerivedY>& y,
                                     const Eigen::MatrixBase<DerivedC>& candidates) {
  if (y.size() != candidates.rows())
    throw std::invalid_argument("ml_detect: dimension mismatch between y and candidates");
  if (candidates.cols() > kMaxDetectionCandidates)
    throw std::invalid_argument("ml_detect: candidate count exceeds exhaustive-search cap");
  DetectionResult best{0, std::numeric_limits<double>::infinity()};
  for (Eigen::Index k = 0; k < candidates.cols(); ++k) {
    const double d = (y - candidates.col(k)).squaredNorm();
    if (d < best.residual) {
      best.residual = d;
      best.index = k;
    }
  }
  return best;
}

// ML detection of a transmit vector: argmin over all candidate vectors of
// ||y - sqrt(energy_per_antenna) * h_est * x'||^2. The caller supplies the
// per-antenna energy of the mode in use (2E/M for direct, E/M for
// cooperative links).
template <typename DerivedY, typename DerivedH>
DetectionResult ml_detect(const Eigen::MatrixBase<DerivedY>& y,
                          const Eigen::MatrixBase<DerivedH>& h_est,
                          double energy_per_antenna,
                          const SymbolVectorSet& vectors) {
  if (h_est.cols() != vectors.n_antennas)
    throw std::invalid_argument("ml_detect: channel columns != vector antennas");
  if (y.size() != h_est.rows())
    throw std::invalid_argument("ml_detect: y dimension != channel rows");
  if (!(energy_per_antenna > 0.0))
    throw std::invalid_argument("ml_detect: energy_per_antenna <= 0");
  const MatrixXc candidates =
      std::sqrt(energy_per_antenna) * (h_est * vectors.vectors);
  return ml_detect_candidates(y, candidates);
}

}  // namespace maxlink
