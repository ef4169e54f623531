#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

namespace maxlink {

// One set of M packets transmitted together (one packet per source
// antenna). Bits are stored packet-major; for relayed sets they are the
// detected bits, which may differ from the source bits.
struct PacketSet {
  long long seq = 0;
  std::vector<std::uint8_t> bits;
  long long arrival_slot = -1;  // slot the set entered a relay buffer
};

// FIFO of packet-sets with capacity L = J / M sets.
class RelayBuffer {
 public:
  explicit RelayBuffer(int capacity) : capacity_(capacity) {}

  bool full() const { return static_cast<int>(sets_.size()) >= capacity_; }
  bool empty() const { return sets_.empty(); }
  int size() const { return static_cast<int>(sets_.size()); }
  int capacity() const { return capacity_; }

  void push(PacketSet set) {
    if (full()) throw std::logic_error("RelayBuffer: push into full buffer");
    sets_.push_back(std::move(set));
  }
  PacketSet pop() {
    if (empty()) throw std::logic_error("RelayBuffer: pop from empty buffer");
    PacketSet s = std::move(sets_.front());
    sets_.pop_front();
    return s;
  }
  const PacketSet& front() const { return sets_.front(); }

 private:
  std::deque<PacketSet> sets_;
  int capacity_;
};

struct DeliveredSet {
  long long seq = 0;
  std::vector<std::uint8_t> bits;
  long long delay_slots = 0;  // 0 for direct deliveries
  bool via_relay = false;
};

struct ReassemblyResult {
  std::vector<std::uint8_t> bits;       // concatenated in sequence order
  std::vector<long long> missing_seqs;  // undelivered sequence ids
};

// Restores source order regardless of arrival order. Sets beyond
// expected_count are rejected; gaps are reported as missing.
inline ReassemblyResult reassemble(const std::vector<DeliveredSet>& received,
                                   long long expected_count) {
  std::vector<const DeliveredSet*> by_seq(expected_count, nullptr);
  for (const DeliveredSet& s : received) {
    if (s.seq < 0 || s.seq >= expected_count)
      throw std::invalid_argument("reassemble: sequence id out of range");
    by_seq[s.seq] = &s;
  }
  ReassemblyResult out;
  for (long long i = 0; i < expected_count; ++i) {
    if (by_seq[i] == nullptr) {
      out.missing_seqs.push_back(i);
      continue;
    }
    out.bits.insert(out.bits.end(), by_seq[i]->bits.begin(), by_seq[i]->bits.end());
  }
  return out;
}

}  // namespace maxlink
