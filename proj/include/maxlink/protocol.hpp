#pragma once

#include <optional>
#include <string>
#include <vector>

#include "maxlink/buffers.hpp"
#include "maxlink/channel.hpp"
#include "maxlink/constellation.hpp"
#include "maxlink/pep.hpp"
#include "maxlink/selection.hpp"
#include "maxlink/sum_rate.hpp"

namespace maxlink {

// The transmission schemes the engine can run. SwitchedMaxLink with
// switch_s = 0 is pure Max-Link operation under the minimum-distance
// criterion (MmdMaxLink is that, under its own label). QnMaxLink selects
// by squared Frobenius norm and has no direct branch. ThresholdMaxLinkDT
// is a simplified rate-threshold baseline: the feasible link with the
// highest per-slot mutual information transmits unless it falls below r0,
// in which case the slot is an outage.
struct Protocol {
  enum class Family { SwitchedMaxLink, QnMaxLink, DirectMimo, ThresholdMaxLinkDT };

  Family family = Family::SwitchedMaxLink;
  double switch_s = 0.0;
  double rate_threshold = 1.0;
  std::string label = "switched_max_link";

  static Protocol switched_max_link(double s);
  static Protocol mmd_max_link();
  static Protocol qn_max_link();
  static Protocol direct_mimo();
  static Protocol threshold_max_link_dt(double r0);
  static Protocol from_name(const std::string& name, double s, double r0);

  bool direct_allowed() const {
    switch (family) {
      case Family::SwitchedMaxLink: return switch_s > 0.0;
      case Family::QnMaxLink: return false;
      case Family::DirectMimo: return true;
      case Family::ThresholdMaxLinkDT: return true;
    }
    return false;
  }
};

struct EngineConfig {
  int n_relays = 1;
  int n_antennas = 1;  // M, antennas at source and destination
  int n_sub = 1;       // U, sets of M antennas at each relay
  int buffer_packets = 2;  // J
  ConstellationKind constellation = ConstellationKind::Bpsk;
  double energy = 1.0;     // E; direct slots transmit 2E
  double noise_psd = 1.0;  // N0
  LinkVarianceProfile profile;
  CsiModel csi;
  long long total_packets = 0;
  int symbols_per_packet = 100;
  long long slot_budget = 0;  // 0 = 20x the minimum needed

  int capacity() const { return buffer_packets / n_antennas; }
  long long total_sets() const { return total_packets / n_antennas; }
};

struct RunMetrics {
  double ber = 0.0;
  long long bit_errors = 0;
  long long bits_compared = 0;
  double avg_delay_slots = 0.0;  // per delivered set; direct sets count as 0
  double avg_throughput = 0.0;   // delivered sets per slot
  long long n_sr = 0;
  long long n_rd = 0;
  long long n_sd = 0;
  long long n_outage = 0;
  long long slots = 0;
  long long delivered_sets = 0;
  long long undelivered_sets = 0;
  bool budget_exceeded = false;
  double mean_pep = 0.0;
  double sum_rate = 0.0;            // slot-weighted aggregate, bits/Hz
  double avg_buffer_occupancy = 0.0;  // sets, mean over slots and relays
  double p_ml = 0.0;  // fraction of delivered sets that went via relays
};

struct SlotRecord {
  Mode mode = Mode::DirectTx;
  int relay = -1;
  int u = -1;
  bool outage = false;
};

// Per-slot action chosen by a protocol before any symbols are sent.
struct SlotAction {
  bool feasible = false;
  bool outage = false;
  Mode mode = Mode::DirectTx;
  int relay = -1;
  int u = -1;
  double d_min = 0.0;  // energy-free minimum distance of the selected matrix
};

struct SelectionContext {
  const Protocol* protocol = nullptr;
  const DifferenceSet* diffs = nullptr;
  int n_antennas = 1;
  double energy = 1.0;
  double noise_psd = 1.0;
  double balancing_ratio = 1.0;
  bool source_has_data = true;
};

SlotAction choose_action(const SelectionContext& ctx, const ChannelRealization& ch,
                         const std::vector<bool>& can_receive,
                         const std::vector<bool>& can_transmit,
                         DistanceReport* report_out = nullptr);

// Slot-by-slot simulation of one protocol: buffer dynamics, transmissions
// with ML detection, packet-set reassembly and measurement.
class ProtocolEngine {
 public:
  ProtocolEngine(const EngineConfig& config, const Protocol& protocol, Rng& rng);

  bool finished() const;
  SlotRecord step_slot();  // fresh fading draw from the engine's RNG
  SlotRecord step_slot(const ChannelRealization& ch);  // caller-supplied fading
  RunMetrics metrics() const;

  long long slot_index() const { return slots_; }
  const std::vector<RelayBuffer>& buffers() const { return buffers_; }
  const BalancingState& balancing() const { return balancing_; }
  const std::vector<DeliveredSet>& delivered() const { return delivered_; }
  long long source_remaining() const { return total_sets_ - next_seq_; }
  int direct_toggle() const { return direct_toggle_; }
  const std::vector<PepTraceEntry>& pep_trace() const { return pep_trace_; }
  long long slot_budget() const { return slot_budget_; }

 private:
  PacketSet draw_source_set();
  std::vector<std::uint8_t> transmit_detect(const std::vector<std::uint8_t>& bits,
                                            const MatrixXc& h_true,
                                            const MatrixXc& h_est,
                                            double energy_per_antenna);
  void deliver(DeliveredSet set);

  EngineConfig config_;
  Protocol protocol_;
  Rng* rng_;
  Constellation constellation_;
  SymbolVectorSet vectors_;
  DifferenceSet diffs_;
  std::vector<RelayBuffer> buffers_;
  BalancingState balancing_;
  std::vector<std::vector<std::uint8_t>> source_bits_;
  std::vector<DeliveredSet> delivered_;
  std::vector<PepTraceEntry> pep_trace_;
  std::vector<double> sr_rates_, rd_rates_, sd_rates_;
  long long total_sets_ = 0;
  long long next_seq_ = 0;
  long long slots_ = 0;
  long long n_sr_ = 0, n_rd_ = 0, n_sd_ = 0, n_outage_ = 0;
  long long relayed_delay_sum_ = 0;
  double occupancy_sum_ = 0.0;
  int direct_toggle_ = 0;
  long long slot_budget_ = 0;
  bool no_feasible_action_ = false;
};

RunMetrics run_protocol(const EngineConfig& config, const Protocol& protocol,
                        Rng& rng, std::vector<SlotRecord>* trace = nullptr);

// Selection-only run with an unlimited source: moves packet-sets through
// the buffers per the protocol's decisions but sends no symbols. Used for
// the theoretical PEP and sum-rate companions.
std::vector<PepTraceEntry> run_selection_trace(const EngineConfig& config,
                                               const Protocol& protocol,
                                               long long n_slots, Rng& rng);

}  // namespace maxlink
