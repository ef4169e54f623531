#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "maxlink/protocol.hpp"
#include "support/oracles.hpp"

using namespace maxlink;

namespace {

EngineConfig base_config() {
  EngineConfig cfg;
  cfg.n_relays = 3;
  cfg.n_antennas = 2;
  cfg.n_sub = 1;
  cfg.buffer_packets = 4;
  cfg.constellation = ConstellationKind::Bpsk;
  cfg.energy = std::pow(10.0, 0.6);
  cfg.total_packets = 400;
  cfg.symbols_per_packet = 20;
  return cfg;
}

}  // namespace

TEST_CASE("packet-set reassembly") {
  SUBCASE("arrival order (3,1,2) comes out (1,2,3)") {
    std::vector<DeliveredSet> received;
    received.push_back({2, {1, 1}, 0, true});
    received.push_back({0, {0, 0}, 0, true});
    received.push_back({1, {0, 1}, 0, true});
    const ReassemblyResult r = reassemble(received, 3);
    CHECK(r.missing_seqs.empty());
    CHECK(r.bits == std::vector<std::uint8_t>{0, 0, 0, 1, 1, 1});
  }
  SUBCASE("identity on in-order arrivals") {
    std::vector<DeliveredSet> received;
    for (int i = 0; i < 4; ++i)
      received.push_back({i, {static_cast<std::uint8_t>(i & 1)}, 0, false});
    const ReassemblyResult r = reassemble(received, 4);
    CHECK(r.bits == std::vector<std::uint8_t>{0, 1, 0, 1});
  }
  SUBCASE("random permutations always come out sorted") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<long long> seqs(100);
      std::iota(seqs.begin(), seqs.end(), 0);
      std::shuffle(seqs.begin(), seqs.end(), rng);
      std::vector<DeliveredSet> received;
      for (long long s : seqs)
        received.push_back({s, {static_cast<std::uint8_t>(s % 2)}, 0, true});
      const ReassemblyResult r = reassemble(received, 100);
      REQUIRE(r.missing_seqs.empty());
      for (int i = 0; i < 100; ++i) CHECK(r.bits[i] == i % 2);
    }
  }
  SUBCASE("gaps are reported as missing") {
    std::vector<DeliveredSet> received;
    received.push_back({0, {1}, 0, false});
    received.push_back({2, {1}, 0, false});
    const ReassemblyResult r = reassemble(received, 3);
    CHECK(r.missing_seqs == std::vector<long long>{1});
  }
}

TEST_CASE("relay buffer is first-in first-out") {
  RelayBuffer buffer(2);
  buffer.push({0, {}, 1});
  buffer.push({1, {}, 2});
  CHECK(buffer.full());
  CHECK(buffer.pop().seq == 0);
  CHECK(buffer.pop().seq == 1);
  CHECK(buffer.empty());
  CHECK_THROWS_AS(buffer.pop(), std::logic_error);
}

TEST_CASE("bits round-trip through modulation and detection at high SNR") {
  for (const ConstellationKind kind :
       {ConstellationKind::Bpsk, ConstellationKind::Qpsk}) {
    EngineConfig cfg = base_config();
    cfg.constellation = kind;
    cfg.energy = std::pow(10.0, 4.0);  // 40 dB: errors vanish
    cfg.total_packets = 100;
    Rng rng(9);
    const RunMetrics m = run_protocol(cfg, Protocol::switched_max_link(1.0), rng);
    CHECK(m.bit_errors == 0);
    CHECK(m.delivered_sets == cfg.total_sets());
  }
}

TEST_CASE("no relays forces direct transmission every slot") {
  EngineConfig cfg = base_config();
  cfg.n_relays = 0;
  Rng rng(1);
  std::vector<SlotRecord> trace;
  const RunMetrics m = run_protocol(cfg, Protocol::switched_max_link(1.0), rng, &trace);
  CHECK(m.n_sd == cfg.total_sets());
  CHECK(m.n_sr == 0);
  CHECK(m.n_rd == 0);
  for (const SlotRecord& r : trace) CHECK(r.mode == Mode::DirectTx);
}

TEST_CASE("empty buffers leave reception as the only feasible Max-Link action") {
  EngineConfig cfg = base_config();
  Rng rng(2);
  ProtocolEngine engine(cfg, Protocol::mmd_max_link(), rng);
  const SlotRecord first = engine.step_slot();
  CHECK(first.mode == Mode::MaxLinkSR);
}

TEST_CASE("buffer bounds and conservation hold every slot") {
  EngineConfig cfg = base_config();
  Rng rng(3);
  ProtocolEngine engine(cfg, Protocol::switched_max_link(1.0), rng);
  while (!engine.finished()) {
    engine.step_slot();
    long long buffered = 0;
    for (const RelayBuffer& b : engine.buffers()) {
      CHECK(b.size() >= 0);
      CHECK(b.size() <= cfg.capacity());
      buffered += b.size();
    }
    const long long delivered = static_cast<long long>(engine.delivered().size());
    const long long at_source = engine.source_remaining();
    CHECK(buffered + delivered + at_source == cfg.total_sets());
  }
  CHECK(engine.metrics().delivered_sets == cfg.total_sets());
}

TEST_CASE("switch zero reproduces the pure Max-Link slot trace bit for bit") {
  EngineConfig cfg = base_config();
  std::vector<SlotRecord> switched, pure;
  Rng r1(7), r2(7);
  run_protocol(cfg, Protocol::switched_max_link(0.0), r1, &switched);
  run_protocol(cfg, Protocol::mmd_max_link(), r2, &pure);
  REQUIRE(switched.size() == pure.size());
  for (size_t i = 0; i < switched.size(); ++i) {
    CHECK(switched[i].mode == pure[i].mode);
    CHECK(switched[i].relay == pure[i].relay);
    CHECK(switched[i].u == pure[i].u);
  }
}

TEST_CASE("symmetric links keep reception and transmission slots balanced") {
  EngineConfig cfg = base_config();
  cfg.total_packets = 4000;
  Rng rng(11);
  const RunMetrics m = run_protocol(cfg, Protocol::mmd_max_link(), rng);
  CHECK(std::abs(m.n_sr - m.n_rd) <=
        static_cast<long long>(cfg.n_relays) * cfg.capacity());
  CHECK(m.n_sr + m.n_rd + m.n_sd == m.slots);
}

TEST_CASE("weak direct links keep direct slots in a small minority at switch 1") {
  EngineConfig cfg = base_config();
  cfg.n_relays = 5;
  cfg.profile.sigma2_sd = 0.2;
  cfg.total_packets = 4000;
  Rng rng(21);
  const RunMetrics m = run_protocol(cfg, Protocol::switched_max_link(1.0), rng);
  CHECK(m.n_sd > 0);
  CHECK(m.n_sd * 10 < m.n_sr + m.n_rd);
}

TEST_CASE("direct MIMO matches the Rayleigh closed form") {
  EngineConfig cfg;
  cfg.n_relays = 0;
  cfg.n_antennas = 1;
  cfg.buffer_packets = 1;
  cfg.constellation = ConstellationKind::Bpsk;
  cfg.energy = std::pow(10.0, 0.6);
  cfg.total_packets = 4000;
  cfg.symbols_per_packet = 100;
  Rng rng(13);
  const RunMetrics m = run_protocol(cfg, Protocol::direct_mimo(), rng);
  // Direct slots transmit 2E, so the mean branch SNR is 2 E sigma2 / N0.
  const double expected = oracles::bpsk_rayleigh_ber(2.0 * cfg.energy);
  CHECK(m.ber == doctest::Approx(expected).epsilon(0.05));
  CHECK(m.avg_delay_slots == 0.0);
  CHECK(m.avg_throughput == doctest::Approx(1.0));
}

TEST_CASE("direct deliveries flip the destination toggle") {
  EngineConfig cfg = base_config();
  cfg.n_relays = 0;
  cfg.total_packets = 6;  // 3 sets
  cfg.symbols_per_packet = 2;
  Rng rng(3);
  ProtocolEngine engine(cfg, Protocol::direct_mimo(), rng);
  int expected = 0;
  while (!engine.finished()) {
    engine.step_slot();
    expected ^= 1;
    CHECK(engine.direct_toggle() == expected);
  }
}

TEST_CASE("relayed delay accounting on a forced single-relay chain") {
  // N=1, L=1: reception and transmission must alternate, so every set
  // spends exactly one slot in the buffer.
  EngineConfig cfg = base_config();
  cfg.n_relays = 1;
  cfg.buffer_packets = 2;  // L = 1
  cfg.total_packets = 200;
  Rng rng(17);
  const RunMetrics m = run_protocol(cfg, Protocol::mmd_max_link(), rng);
  CHECK(m.avg_delay_slots == doctest::Approx(1.0));
  CHECK(m.p_ml == 1.0);
}

TEST_CASE("detected bits are stored at the relay, not the source bits") {
  // Two independent Rayleigh hops at energy E compose as
  // p1 (1 - p2) + p2 (1 - p1); a genie-aided relay would show only the
  // second hop's error rate.
  EngineConfig cfg;
  cfg.n_relays = 1;
  cfg.n_antennas = 1;
  cfg.buffer_packets = 1;
  cfg.constellation = ConstellationKind::Bpsk;
  cfg.energy = 1.0;  // 0 dB
  cfg.total_packets = 20000;
  cfg.symbols_per_packet = 100;
  Rng rng(19);
  const RunMetrics m = run_protocol(cfg, Protocol::mmd_max_link(), rng);
  const double p = oracles::bpsk_rayleigh_ber(cfg.energy);
  const double expected = 2.0 * p * (1.0 - p);
  CHECK(m.ber == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("undelivered packet-sets are flagged when the budget runs out") {
  EngineConfig cfg = base_config();
  cfg.slot_budget = 10;  // far too small
  Rng rng(23);
  const RunMetrics m = run_protocol(cfg, Protocol::mmd_max_link(), rng);
  CHECK(m.budget_exceeded);
  CHECK(m.undelivered_sets > 0);
  CHECK(m.delivered_sets + m.undelivered_sets == cfg.total_sets());
}

TEST_CASE("per-slot pep trace follows the selected matrices") {
  EngineConfig cfg = base_config();
  cfg.total_packets = 100;
  Rng rng(29);
  ProtocolEngine engine(cfg, Protocol::switched_max_link(1.0), rng);
  while (!engine.finished()) engine.step_slot();
  const RunMetrics m = engine.metrics();
  CHECK(static_cast<long long>(engine.pep_trace().size()) == m.slots);
  for (const PepTraceEntry& e : engine.pep_trace()) CHECK(e.d_min > 0.0);
}

TEST_CASE("selection-only trace moves sets without symbols") {
  EngineConfig cfg = base_config();
  Rng rng(31);
  const std::vector<PepTraceEntry> trace =
      run_selection_trace(cfg, Protocol::mmd_max_link(), 500, rng);
  CHECK(trace.size() == 500);
  long long sr = 0, rd = 0;
  for (const PepTraceEntry& e : trace) {
    CHECK(e.mode != Mode::DirectTx);
    (e.mode == Mode::MaxLinkSR ? sr : rd) += 1;
  }
  CHECK(std::abs(sr - rd) <= static_cast<long long>(cfg.n_relays) * cfg.capacity());
}

TEST_CASE("threshold baseline idles through outage slots") {
  EngineConfig cfg = base_config();
  cfg.n_antennas = 1;
  cfg.buffer_packets = 4;
  cfg.energy = std::pow(10.0, -0.4);  // low SNR: outages are common
  cfg.total_packets = 200;
  Rng rng(37);
  const RunMetrics m = run_protocol(cfg, Protocol::threshold_max_link_dt(2.0), rng);
  CHECK(m.n_outage > 0);
  CHECK(m.n_sr + m.n_rd + m.n_sd + m.n_outage == m.slots);
  CHECK(m.delivered_sets == cfg.total_sets());
}

TEST_CASE("qn protocol runs and reports the selected-matrix distances") {
  EngineConfig cfg = base_config();
  cfg.total_packets = 200;
  Rng rng(41);
  const RunMetrics m = run_protocol(cfg, Protocol::qn_max_link(), rng);
  CHECK(m.delivered_sets == cfg.total_sets());
  CHECK(m.n_sd == 0);
  CHECK(m.mean_pep > 0.0);
}

TEST_CASE("qpsk end to end") {
  EngineConfig cfg = base_config();
  cfg.constellation = ConstellationKind::Qpsk;
  cfg.energy = std::pow(10.0, 1.0);
  cfg.total_packets = 200;
  Rng rng(43);
  const RunMetrics m = run_protocol(cfg, Protocol::switched_max_link(1.0), rng);
  CHECK(m.delivered_sets == cfg.total_sets());
  CHECK(m.ber < 0.2);
}

TEST_CASE("BER improves with the relay antenna count") {
  double prev = 1.0;
  for (const int n_sub : {2, 4, 8}) {
    EngineConfig cfg = base_config();
    cfg.n_relays = 5;
    cfg.n_sub = n_sub;
    cfg.energy = 1.0;  // 0 dB
    cfg.total_packets = 4000;
    cfg.symbols_per_packet = 50;
    Rng rng(1);
    const RunMetrics m = run_protocol(cfg, Protocol::switched_max_link(1.0), rng);
    CHECK(m.ber < prev);
    prev = m.ber;
  }
}

TEST_CASE("estimation error degrades BER") {
  EngineConfig cfg = base_config();
  cfg.n_relays = 5;
  cfg.energy = std::pow(10.0, 1.0);
  cfg.total_packets = 4000;
  cfg.symbols_per_packet = 50;
  Rng r1(6), r2(6);
  const RunMetrics perfect = run_protocol(cfg, Protocol::switched_max_link(1.0), r1);
  cfg.csi = CsiModel{1.0, 0.8};
  const RunMetrics noisy = run_protocol(cfg, Protocol::switched_max_link(1.0), r2);
  CHECK(noisy.ber > perfect.ber);
}

TEST_CASE("engine rejects configs that cannot form whole packet-sets") {
  Rng rng(1);
  EngineConfig cfg = base_config();
  cfg.buffer_packets = 3;
  CHECK_THROWS_WITH_AS(ProtocolEngine(cfg, Protocol::mmd_max_link(), rng),
                       doctest::Contains("whole packet-sets"), std::invalid_argument);
  EngineConfig cfg2 = base_config();
  cfg2.total_packets = 401;
  CHECK_THROWS_AS(ProtocolEngine(cfg2, Protocol::mmd_max_link(), rng),
                  std::invalid_argument);
}
