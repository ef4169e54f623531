#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "maxlink/types.hpp"

namespace maxlink {

// Per-link complex coefficient variances.
struct LinkVarianceProfile {
  double sigma2_sr = 1.0;
  double sigma2_rd = 1.0;
  double sigma2_sd = 1.0;
};

// Channel estimation error model: estimate = channel + error, with error
// variance beta * E^(-alpha) on relay links and beta * (2E)^(-alpha) on the
// direct link. beta = 0 means perfect CSI.
struct CsiModel {
  double beta = 0.0;
  double alpha = 0.0;

  bool perfect() const { return beta == 0.0; }
  double error_variance_relay(double energy) const {
    return beta * std::pow(energy, -alpha);
  }
  double error_variance_direct(double energy) const {
    return beta * std::pow(2.0 * energy, -alpha);
  }
};

// One time slot's fading state. Relay matrices are tall (U*M x M), formed
// by U stacked square M x M submatrices; the direct matrix is M x M.
// Estimated copies are filled by apply_csi_error.
struct ChannelRealization {
  std::vector<MatrixXc> h_sr;
  std::vector<MatrixXc> h_rd;
  MatrixXc h_sd;
  std::vector<MatrixXc> h_sr_est;
  std::vector<MatrixXc> h_rd_est;
  MatrixXc h_sd_est;

  int n_relays() const { return static_cast<int>(h_sr.size()); }
};

// View of stacked submatrix u (0-based) of a tall relay matrix.
template <typename Derived>
auto submatrix(const Eigen::MatrixBase<Derived>& tall, int u, int n_antennas) {
  return tall.middleRows(u * n_antennas, n_antennas);
}

inline MatrixXc random_complex_matrix(Rng& rng, Eigen::Index rows,
                                      Eigen::Index cols, double variance) {
  MatrixXc m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, j) = complex_gaussian(rng, variance);
  return m;
}

// Fresh block-fading draw: independent across calls, entries zero-mean
// complex Gaussian with the per-link variance from `profile`.
inline ChannelRealization generate_channels(Rng& rng, int n_relays,
                                            int n_antennas, int n_sub,
                                            const LinkVarianceProfile& profile) {
  if (n_relays < 0) throw std::invalid_argument("generate_channels: n_relays < 0");
  if (n_sub < 1) throw std::invalid_argument("generate_channels: n_sub < 1");
  ChannelRealization ch;
  ch.h_sr.reserve(n_relays);
  ch.h_rd.reserve(n_relays);
  const Eigen::Index rows = static_cast<Eigen::Index>(n_sub) * n_antennas;
  for (int i = 0; i < n_relays; ++i)
    ch.h_sr.push_back(random_complex_matrix(rng, rows, n_antennas, profile.sigma2_sr));
  for (int i = 0; i < n_relays; ++i)
    ch.h_rd.push_back(random_complex_matrix(rng, rows, n_antennas, profile.sigma2_rd));
  ch.h_sd = random_complex_matrix(rng, n_antennas, n_antennas, profile.sigma2_sd);
  return ch;
}

// Fills the estimated matrices. With beta = 0 the estimates equal the true
// channels exactly and no randomness is consumed.
inline void apply_csi_error(Rng& rng, ChannelRealization& ch,
                            const CsiModel& csi, double energy) {
  if (energy <= 0.0) throw std::invalid_argument("apply_csi_error: energy <= 0");
  const int n = ch.n_relays();
  ch.h_sr_est.resize(n);
  ch.h_rd_est.resize(n);
  if (csi.perfect()) {
    for (int i = 0; i < n; ++i) {
      ch.h_sr_est[i] = ch.h_sr[i];
      ch.h_rd_est[i] = ch.h_rd[i];
    }
    ch.h_sd_est = ch.h_sd;
    return;
  }
  const double var_relay = csi.error_variance_relay(energy);
  const double var_direct = csi.error_variance_direct(energy);
  for (int i = 0; i < n; ++i)
    ch.h_sr_est[i] =
        ch.h_sr[i] + random_complex_matrix(rng, ch.h_sr[i].rows(),
                                           ch.h_sr[i].cols(), var_relay);
  for (int i = 0; i < n; ++i)
    ch.h_rd_est[i] =
        ch.h_rd[i] + random_complex_matrix(rng, ch.h_rd[i].rows(),
                                           ch.h_rd[i].cols(), var_relay);
  ch.h_sd_est = ch.h_sd + random_complex_matrix(rng, ch.h_sd.rows(),
                                                ch.h_sd.cols(), var_direct);
}

// i.i.d. circularly-symmetric complex noise, total variance n0 per entry.
inline VectorXc awgn(Rng& rng, Eigen::Index dimension, double n0) {
  if (n0 <= 0.0) throw std::invalid_argument("awgn: n0 <= 0");
  VectorXc v(dimension);
  for (Eigen::Index i = 0; i < dimension; ++i) v(i) = complex_gaussian(rng, n0);
  return v;
}

}  // namespace maxlink
