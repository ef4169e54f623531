#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxlink/channel.hpp"
#include "maxlink/constellation.hpp"
#include "maxlink/protocol.hpp"

namespace maxlink {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Experiment description parsed from a JSON file. Required keys: N, M_S,
// J, constellation, snr_db, protocols, seeds. snr_db is either an array of
// dB values or {"from": a, "to": b, "step": s}.
struct ExperimentConfig {
  int n_relays = 0;        // N
  int n_antennas = 1;      // M_S
  int n_sub = 1;           // U
  int buffer_packets = 2;  // J
  ConstellationKind constellation = ConstellationKind::Bpsk;
  double switch_s = 1.0;   // S
  std::vector<double> snr_db;
  long long packets = 0;   // default 10000 * M_S
  int symbols_per_packet = 100;
  LinkVarianceProfile profile;
  CsiModel csi;
  std::vector<Protocol> protocols;
  std::vector<std::uint64_t> seeds;
  double r0 = 1.0;
  double rho = 0.5;
  long long pep_slots = 100000;
  int dtmc_draws = 10000;

  int capacity() const { return buffer_packets / n_antennas; }
  double energy_for_snr_db(double snr_db_value) const {
    return std::pow(10.0, snr_db_value / 10.0);  // N0 = 1, E = SNR * N0
  }
  EngineConfig engine_config(double snr_db_value) const;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

}  // namespace maxlink
