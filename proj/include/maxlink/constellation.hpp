#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxlink/types.hpp"

namespace maxlink {

enum class ConstellationKind { Bpsk, Qpsk, Qam16 };

ConstellationKind constellation_from_string(const std::string& name);
std::string to_string(ConstellationKind kind);

// Symbol alphabet with unit average power, plus the set of distinct
// inter-symbol distance values d_c used by the structured metric
// enumeration. For BPSK there is a single value (2); for QPSK there are
// W = 3 representatives (sqrt2, sqrt2*j, sqrt2 + sqrt2*j), signs being
// handled by the +/- enumeration of the metric terms.
struct Constellation {
  ConstellationKind kind;
  std::vector<Complex> symbols;
  std::vector<Complex> distance_alphabet;
  int bits_per_symbol = 0;

  int size() const { return static_cast<int>(symbols.size()); }
  int w() const { return static_cast<int>(distance_alphabet.size()); }
};

inline Constellation build_constellation(ConstellationKind kind) {
  Constellation c;
  c.kind = kind;
  switch (kind) {
    case ConstellationKind::Bpsk: {
      c.symbols = {Complex(-1.0, 0.0), Complex(1.0, 0.0)};
      c.bits_per_symbol = 1;
      c.distance_alphabet = {c.symbols[1] - c.symbols[0]};
      return c;
    }
    case ConstellationKind::Qpsk: {
      // Lexicographic in (re, im); symbol index bits are (re > 0, im > 0),
      // a per-axis Gray mapping.
      const double a = 1.0 / std::sqrt(2.0);
      c.symbols = {Complex(-a, -a), Complex(-a, a), Complex(a, -a),
                   Complex(a, a)};
      c.bits_per_symbol = 2;
      // Distance values derived from actual symbol differences so that the
      // structured metric terms match exhaustive pair enumeration bit for
      // bit: sqrt2, sqrt2*j, sqrt2 + sqrt2*j.
      c.distance_alphabet = {c.symbols[2] - c.symbols[0],
                             c.symbols[1] - c.symbols[0],
                             c.symbols[3] - c.symbols[0]};
      return c;
    }
    case ConstellationKind::Qam16:
      throw std::invalid_argument("unsupported constellation: 16-QAM");
  }
  throw std::invalid_argument("unsupported constellation");
}

inline ConstellationKind constellation_from_string(const std::string& name) {
  if (name == "BPSK" || name == "bpsk") return ConstellationKind::Bpsk;
  if (name == "QPSK" || name == "qpsk") return ConstellationKind::Qpsk;
  if (name == "16QAM" || name == "16-QAM" || name == "qam16")
    return ConstellationKind::Qam16;
  throw std::invalid_argument("unsupported constellation: " + name);
}

inline std::string to_string(ConstellationKind kind) {
  switch (kind) {
    case ConstellationKind::Bpsk: return "BPSK";
    case ConstellationKind::Qpsk: return "QPSK";
    case ConstellationKind::Qam16: return "16QAM";
  }
  return "?";
}

// All Ns^M transmit vectors in lexicographic order (first antenna varies
// slowest). Column k of `vectors` is the k-th candidate; `symbol_indices`
// holds the per-antenna constellation indices of each candidate.
struct SymbolVectorSet {
  int n_antennas = 0;
  MatrixXc vectors;
  Eigen::MatrixXi symbol_indices;

  Eigen::Index count() const { return vectors.cols(); }
};

inline SymbolVectorSet enumerate_symbol_vectors(const Constellation& c,
                                                int n_antennas) {
  if (n_antennas < 1)
    throw std::invalid_argument("enumerate_symbol_vectors: need >= 1 antenna");
  const int ns = c.size();
  Eigen::Index count = 1;
  for (int i = 0; i < n_antennas; ++i) count *= ns;

  SymbolVectorSet set;
  set.n_antennas = n_antennas;
  set.vectors.resize(n_antennas, count);
  set.symbol_indices.resize(n_antennas, count);
  for (Eigen::Index k = 0; k < count; ++k) {
    Eigen::Index rem = k;
    for (int a = n_antennas - 1; a >= 0; --a) {
      const int idx = static_cast<int>(rem % ns);
      rem /= ns;
      set.symbol_indices(a, k) = idx;
      set.vectors(a, k) = c.symbols[idx];
    }
  }
  return set;
}

}  // namespace maxlink
