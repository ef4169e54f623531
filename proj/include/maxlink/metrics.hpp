#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <vector>

#include "maxlink/constellation.hpp"
#include "maxlink/types.hpp"

namespace maxlink {

// Number of distance terms the structured enumeration evaluates per square
// channel matrix: sum over i = 1..M of 2^(i-1) * W^i * C(M, i), where W is
// the number of distinct constellation distance values.
inline long long metric_count(int n_antennas, int n_distances) {
  if (n_antennas < 1 || n_distances < 1)
    throw std::invalid_argument("metric_count: arguments must be >= 1");
  long long total = 0;
  long long binom = 1;  // C(M, i), updated incrementally
  long long wpow = 1;
  long long spow = 1;  // 2^(i-1)
  for (int i = 1; i <= n_antennas; ++i) {
    binom = binom * (n_antennas - i + 1) / i;
    wpow *= n_distances;
    if (i > 1) spow *= 2;
    total += spow * wpow * binom;
  }
  return total;
}

// The structured set of symbol-vector differences x_l - x_n: for every
// subset of symbol positions, every assignment of distance values d_c to
// those positions, and every relative sign pattern (the first position in
// the subset keeps a + sign; a global sign does not change the metric).
// Column count equals metric_count(M, W).
struct DifferenceSet {
  int n_antennas = 0;
  MatrixXc deltas;

  Eigen::Index count() const { return deltas.cols(); }
};

inline DifferenceSet make_difference_set(const Constellation& c,
                                         int n_antennas) {
  if (n_antennas < 1)
    throw std::invalid_argument("make_difference_set: n_antennas < 1");
  const int w = c.w();
  const long long total = metric_count(n_antennas, w);

  DifferenceSet set;
  set.n_antennas = n_antennas;
  set.deltas = MatrixXc::Zero(n_antennas, total);

  std::vector<int> positions;
  Eigen::Index col = 0;
  // Enumerate subsets of positions in lexicographic order per subset size.
  for (int size = 1; size <= n_antennas; ++size) {
    positions.resize(size);
    for (int t = 0; t < size; ++t) positions[t] = t;
    while (true) {
      // Distance-value digits, first position outermost.
      std::vector<int> digits(size, 0);
      while (true) {
        const int sign_patterns = 1 << (size - 1);
        for (int mask = 0; mask < sign_patterns; ++mask) {
          for (int t = 0; t < size; ++t) {
            Complex d = c.distance_alphabet[digits[t]];
            if (t > 0 && (mask >> (t - 1)) & 1) d = -d;
            set.deltas(positions[t], col) = d;
          }
          ++col;
        }
        int t = size - 1;
        while (t >= 0 && ++digits[t] == w) digits[t--] = 0;
        if (t < 0) break;
      }
      // Next combination.
      int t = size - 1;
      while (t >= 0 && positions[t] == n_antennas - size + t) --t;
      if (t < 0) break;
      ++positions[t];
      for (int s = t + 1; s < size; ++s) positions[s] = positions[s - 1] + 1;
    }
  }
  if (col != total)
    throw std::logic_error("make_difference_set: enumeration does not match the term count");
  return set;
}

// Minimum squared pair distance ||H * (x_l - x_n)||^2 over the structured
// difference set (energy factor removed). Matches exhaustive enumeration
// over all C(Ns^M, 2) symbol-vector pairs for BPSK and for QPSK with
// M <= 2.
template <typename Derived>
double min_distance(const Eigen::MatrixBase<Derived>& h,
                    const DifferenceSet& diffs) {
  if (h.cols() != diffs.n_antennas)
    throw std::invalid_argument("min_distance: channel columns != difference length");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < diffs.count(); ++k) {
    const double v = (h * diffs.deltas.col(k)).squaredNorm();
    if (v < best) best = v;
  }
  return best;
}

struct MinDistanceResult {
  double min_value = 0.0;
  Eigen::VectorXd terms;  // all structured distance values, in enumeration order
};

// Same as min_distance, restricted to a square M x M submatrix, returning
// the full term list as well.
template <typename Derived>
MinDistanceResult min_distance_submatrix(const Eigen::MatrixBase<Derived>& h_sub,
                                         const DifferenceSet& diffs) {
  if (h_sub.rows() != h_sub.cols())
    throw std::invalid_argument("min_distance_submatrix: matrix is not square");
  if (h_sub.cols() != diffs.n_antennas)
    throw std::invalid_argument("min_distance_submatrix: size != difference length");
  MinDistanceResult r;
  r.terms.resize(diffs.count());
  for (Eigen::Index k = 0; k < diffs.count(); ++k)
    r.terms(k) = (h_sub * diffs.deltas.col(k)).squaredNorm();
  r.min_value = r.terms.minCoeff();
  return r;
}

// Total link power: squared Frobenius norm of the channel matrix.
template <typename Derived>
double qn_metric(const Eigen::MatrixBase<Derived>& h) {
  return h.squaredNorm();
}

}  // namespace maxlink
