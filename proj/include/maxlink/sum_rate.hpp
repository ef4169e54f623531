#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "maxlink/types.hpp"

namespace maxlink {

enum class RateMode { SourceRelay, RelayDestination, Direct };

// log2 det(c * H * H^H + I) via Cholesky of the Hermitian positive-definite
// Gram matrix.
template <typename Derived>
double log2_det_gram(const Eigen::MatrixBase<Derived>& h, double c) {
  const Eigen::Index rows = h.rows();
  MatrixXc gram = c * (h * h.adjoint());
  gram += MatrixXc::Identity(rows, rows);
  Eigen::LLT<MatrixXc> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log2_det_gram: Cholesky failed");
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i)
    log_det += std::log(llt.matrixL()(i, i).real());
  return 2.0 * log_det / std::log(2.0);
}

// Per-slot rate in bits/Hz with identity-scaled symbol covariances:
//   reception slot:    1/2 log2 det(H (E/(M N0)) H^H + I)   (H tall, U*M x M)
//   transmission slot: 1/2 log2 det(H^u (E/(M N0)) H^uH + I) (square M x M)
//   direct slot:       log2 det(H (2E/(M N0)) H^H + I)       (square M x M)
template <typename Derived>
double sum_rate_slot(RateMode mode, const Eigen::MatrixBase<Derived>& h,
                     double energy, double noise_psd, int n_antennas) {
  if (energy <= 0.0 || noise_psd <= 0.0 || n_antennas < 1)
    throw std::invalid_argument("sum_rate_slot: invalid arguments");
  if (h.cols() != n_antennas)
    throw std::invalid_argument("sum_rate_slot: channel columns != n_antennas");
  switch (mode) {
    case RateMode::SourceRelay:
      if (h.rows() % n_antennas != 0)
        throw std::invalid_argument("sum_rate_slot: reception matrix rows not a multiple of n_antennas");
      return 0.5 * log2_det_gram(h, energy / (n_antennas * noise_psd));
    case RateMode::RelayDestination:
      if (h.rows() != n_antennas)
        throw std::invalid_argument("sum_rate_slot: transmission matrix is not square");
      return 0.5 * log2_det_gram(h, energy / (n_antennas * noise_psd));
    case RateMode::Direct:
      if (h.rows() != n_antennas)
        throw std::invalid_argument("sum_rate_slot: direct matrix is not square");
      return log2_det_gram(h, 2.0 * energy / (n_antennas * noise_psd));
  }
  throw std::invalid_argument("sum_rate_slot: unknown mode");
}

// Slot-weighted aggregate: direct slots deliver in one hop and are double
// weighted in the denominator.
inline double sum_rate_aggregate(const std::vector<double>& sr_rates,
                                 const std::vector<double>& rd_rates,
                                 const std::vector<double>& sd_rates) {
  const double denom = static_cast<double>(sr_rates.size()) +
                       static_cast<double>(rd_rates.size()) +
                       2.0 * static_cast<double>(sd_rates.size());
  if (denom == 0.0)
    throw std::invalid_argument("sum_rate_aggregate: no slots");
  double sum = 0.0;
  for (double r : sr_rates) sum += r;
  for (double r : rd_rates) sum += r;
  for (double r : sd_rates) sum += 2.0 * r;
  return sum / denom;
}

}  // namespace maxlink
