#include "maxlink/protocol.hpp"

#include <cmath>
#include <stdexcept>

#include "maxlink/detection.hpp"

namespace maxlink {

Protocol Protocol::switched_max_link(double s) {
  if (s < 0.0) throw std::invalid_argument("switched_max_link: S < 0");
  return {Family::SwitchedMaxLink, s, 0.0, "switched_max_link"};
}

Protocol Protocol::mmd_max_link() {
  return {Family::SwitchedMaxLink, 0.0, 0.0, "mmd_max_link"};
}

Protocol Protocol::qn_max_link() {
  return {Family::QnMaxLink, 0.0, 0.0, "qn_max_link"};
}

Protocol Protocol::direct_mimo() {
  return {Family::DirectMimo, 0.0, 0.0, "direct_mimo"};
}

Protocol Protocol::threshold_max_link_dt(double r0) {
  if (r0 <= 0.0) throw std::invalid_argument("threshold_max_link_dt: r0 <= 0");
  return {Family::ThresholdMaxLinkDT, 0.0, r0, "threshold_max_link_dt"};
}

Protocol Protocol::from_name(const std::string& name, double s, double r0) {
  if (name == "switched_max_link") return switched_max_link(s);
  if (name == "mmd_max_link") return mmd_max_link();
  if (name == "qn_max_link") return qn_max_link();
  if (name == "direct_mimo") return direct_mimo();
  if (name == "threshold_max_link_dt") return threshold_max_link_dt(r0);
  throw std::invalid_argument("unknown protocol: " + name);
}

namespace {

double report_d_min(const DistanceReport& report, const SlotAction& action) {
  switch (action.mode) {
    case Mode::MaxLinkSR: return report.relays[action.relay].sr_min;
    case Mode::MaxLinkRD: return report.relays[action.relay].rd_min;
    case Mode::DirectTx: return report.sd_min;
  }
  return 0.0;
}

SlotAction choose_switched(const SelectionContext& ctx, const ChannelRealization& ch,
                           const std::vector<bool>& can_receive,
                           const std::vector<bool>& can_transmit,
                           DistanceReport* report_out) {
  const Protocol& p = *ctx.protocol;
  const bool include_direct = p.switch_s > 0.0;
  DistanceReport report = compute_distance_report(ch, *ctx.diffs, include_direct);
  const SelectionResult sel =
      select_max_link(report, ctx.balancing_ratio, can_receive, can_transmit);
  const bool direct_feasible = include_direct && ctx.source_has_data;

  SlotAction action;
  if (!sel.found && !direct_feasible) {
    if (report_out) *report_out = std::move(report);
    return action;  // nothing to do this slot
  }
  const SlotDecision decision =
      decide_mode(sel, report.sd_min, p.switch_s, direct_feasible);
  action.feasible = true;
  action.mode = decision.mode;
  action.relay = decision.relay;
  action.u = decision.u;
  action.d_min = report_d_min(report, action);
  if (report_out) *report_out = std::move(report);
  return action;
}

SlotAction choose_qn(const SelectionContext& ctx, const ChannelRealization& ch,
                     const std::vector<bool>& can_receive,
                     const std::vector<bool>& can_transmit,
                     DistanceReport* report_out) {
  const int n = ch.n_relays();
  const int m = ctx.n_antennas;
  SelectionResult sel;
  sel.ranking.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    sel.ranking.push_back({LinkKind::SourceRelay, i, -1,
                           qn_metric(ch.h_sr_est[i]), can_receive[i]});
    const int n_sub = static_cast<int>(ch.h_rd_est[i].rows()) / m;
    int best_u = 0;
    double best_norm = -1.0;
    for (int u = 0; u < n_sub; ++u) {
      const double norm = qn_metric(submatrix(ch.h_rd_est[i], u, m));
      if (norm > best_norm) {
        best_norm = norm;
        best_u = u;
      }
    }
    sel.ranking.push_back({LinkKind::RelayDestination, i, best_u,
                           qn_metric(ch.h_rd_est[i]), can_transmit[i]});
  }
  std::stable_sort(sel.ranking.begin(), sel.ranking.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.value != b.value) return a.value > b.value;
                     if (a.kind != b.kind) return a.kind == LinkKind::SourceRelay;
                     if (a.relay != b.relay) return a.relay < b.relay;
                     return a.u < b.u;
                   });
  SlotAction action;
  for (const Candidate& c : sel.ranking) {
    if (!c.feasible) continue;
    action.feasible = true;
    action.mode = c.kind == LinkKind::SourceRelay ? Mode::MaxLinkSR : Mode::MaxLinkRD;
    action.relay = c.relay;
    action.u = c.u;
    break;
  }
  DistanceReport report = compute_distance_report(ch, *ctx.diffs, false);
  if (action.feasible) action.d_min = report_d_min(report, action);
  if (report_out) *report_out = std::move(report);
  return action;
}

SlotAction choose_direct(const SelectionContext& ctx, const ChannelRealization& ch,
                         DistanceReport* report_out) {
  SlotAction action;
  if (!ctx.source_has_data) return action;
  action.feasible = true;
  action.mode = Mode::DirectTx;
  action.d_min = 2.0 * min_distance(ch.h_sd_est, *ctx.diffs);
  if (report_out) {
    report_out->relays.clear();
    report_out->sd_min = action.d_min;
    report_out->has_direct = true;
  }
  return action;
}

SlotAction choose_threshold(const SelectionContext& ctx, const ChannelRealization& ch,
                            const std::vector<bool>& can_receive,
                            const std::vector<bool>& can_transmit,
                            DistanceReport* report_out) {
  const Protocol& p = *ctx.protocol;
  const int n = ch.n_relays();
  const int m = ctx.n_antennas;

  // Best feasible link by per-slot mutual information on estimated CSI.
  SlotAction best;
  double best_mi = -1.0;
  for (int i = 0; i < n; ++i) {
    if (can_receive[i]) {
      const double mi = sum_rate_slot(RateMode::SourceRelay, ch.h_sr_est[i],
                                      ctx.energy, ctx.noise_psd, m);
      if (mi > best_mi) {
        best_mi = mi;
        best = {true, false, Mode::MaxLinkSR, i, -1, 0.0};
      }
    }
    if (can_transmit[i]) {
      const int n_sub = static_cast<int>(ch.h_rd_est[i].rows()) / m;
      for (int u = 0; u < n_sub; ++u) {
        const double mi =
            sum_rate_slot(RateMode::RelayDestination, submatrix(ch.h_rd_est[i], u, m),
                          ctx.energy, ctx.noise_psd, m);
        if (mi > best_mi) {
          best_mi = mi;
          best = {true, false, Mode::MaxLinkRD, i, u, 0.0};
        }
      }
    }
  }
  if (ctx.source_has_data) {
    const double mi = sum_rate_slot(RateMode::Direct, ch.h_sd_est, ctx.energy,
                                    ctx.noise_psd, m);
    if (mi > best_mi) {
      best_mi = mi;
      best = {true, false, Mode::DirectTx, -1, -1, 0.0};
    }
  }
  DistanceReport report = compute_distance_report(ch, *ctx.diffs, true);
  if (best.feasible) {
    if (best_mi < p.rate_threshold) {
      best.outage = true;  // nothing is transmitted this slot
    } else {
      best.d_min = report_d_min(report, best);
    }
  }
  if (report_out) *report_out = std::move(report);
  return best;
}

}  // namespace

SlotAction choose_action(const SelectionContext& ctx, const ChannelRealization& ch,
                         const std::vector<bool>& can_receive,
                         const std::vector<bool>& can_transmit,
                         DistanceReport* report_out) {
  switch (ctx.protocol->family) {
    case Protocol::Family::SwitchedMaxLink:
      return choose_switched(ctx, ch, can_receive, can_transmit, report_out);
    case Protocol::Family::QnMaxLink:
      return choose_qn(ctx, ch, can_receive, can_transmit, report_out);
    case Protocol::Family::DirectMimo:
      return choose_direct(ctx, ch, report_out);
    case Protocol::Family::ThresholdMaxLinkDT:
      return choose_threshold(ctx, ch, can_receive, can_transmit, report_out);
  }
  throw std::logic_error("choose_action: unknown protocol family");
}

ProtocolEngine::ProtocolEngine(const EngineConfig& config, const Protocol& protocol,
                               Rng& rng)
    : config_(config),
      protocol_(protocol),
      rng_(&rng),
      constellation_(build_constellation(config.constellation)),
      vectors_(enumerate_symbol_vectors(constellation_, config.n_antennas)),
      diffs_(make_difference_set(constellation_, config.n_antennas)) {
  if (config.n_antennas < 1) throw std::invalid_argument("engine: n_antennas < 1");
  if (config.n_sub < 1) throw std::invalid_argument("engine: n_sub < 1");
  if (config.n_relays < 0) throw std::invalid_argument("engine: n_relays < 0");
  if (config.buffer_packets % config.n_antennas != 0)
    throw std::invalid_argument("engine: buffer size must hold whole packet-sets");
  if (config.total_packets % config.n_antennas != 0)
    throw std::invalid_argument("engine: packet count must form whole packet-sets");
  if (config.energy <= 0.0 || config.noise_psd <= 0.0)
    throw std::invalid_argument("engine: energy and noise psd must be positive");
  if (vectors_.count() > kMaxDetectionCandidates)
    throw std::invalid_argument("engine: constellation^antennas exceeds exhaustive ML cap");
  total_sets_ = config.total_sets();
  buffers_.assign(config.n_relays, RelayBuffer(config.capacity()));
  source_bits_.reserve(total_sets_);
  delivered_.reserve(total_sets_);
  slot_budget_ = config.slot_budget > 0
                     ? config.slot_budget
                     : 20 * (2 * total_sets_ +
                             static_cast<long long>(config.n_relays) * config.capacity() + 10);
}

bool ProtocolEngine::finished() const {
  if (static_cast<long long>(delivered_.size()) >= total_sets_) return true;
  if (slots_ >= slot_budget_) return true;
  return no_feasible_action_;
}

PacketSet ProtocolEngine::draw_source_set() {
  PacketSet set;
  set.seq = next_seq_++;
  const int n_bits = config_.n_antennas * config_.symbols_per_packet *
                     constellation_.bits_per_symbol;
  set.bits.resize(n_bits);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int b = 0; b < n_bits; ++b)
    set.bits[b] = static_cast<std::uint8_t>(bit(*rng_));
  source_bits_.push_back(set.bits);
  return set;
}

std::vector<std::uint8_t> ProtocolEngine::transmit_detect(
    const std::vector<std::uint8_t>& bits, const MatrixXc& h_true,
    const MatrixXc& h_est, double energy_per_antenna) {
  const int m = config_.n_antennas;
  const int spp = config_.symbols_per_packet;
  const int bps = constellation_.bits_per_symbol;
  const int ns = constellation_.size();
  const double amp = std::sqrt(energy_per_antenna);

  // Hypothesis columns for the detector and the actually-transmitted
  // columns; the channel is constant within the slot.
  const MatrixXc cand_est = amp * (h_est * vectors_.vectors);
  const MatrixXc cand_true = amp * (h_true * vectors_.vectors);

  std::vector<std::uint8_t> detected(bits.size());
  for (int s = 0; s < spp; ++s) {
    Eigen::Index k_true = 0;
    for (int a = 0; a < m; ++a) {
      int idx = 0;
      for (int b = 0; b < bps; ++b)
        idx = (idx << 1) | bits[(a * spp + s) * bps + b];
      k_true = k_true * ns + idx;
    }
    const VectorXc y = cand_true.col(k_true) + awgn(*rng_, h_true.rows(), config_.noise_psd);
    const DetectionResult det = ml_detect_candidates(y, cand_est);
    for (int a = 0; a < m; ++a) {
      const int idx = vectors_.symbol_indices(a, det.index);
      for (int b = 0; b < bps; ++b)
        detected[(a * spp + s) * bps + b] =
            static_cast<std::uint8_t>((idx >> (bps - 1 - b)) & 1);
    }
  }
  return detected;
}

void ProtocolEngine::deliver(DeliveredSet set) {
  if (set.via_relay) relayed_delay_sum_ += set.delay_slots;
  delivered_.push_back(std::move(set));
}

SlotRecord ProtocolEngine::step_slot() {
  ChannelRealization ch = generate_channels(*rng_, config_.n_relays,
                                            config_.n_antennas, config_.n_sub,
                                            config_.profile);
  apply_csi_error(*rng_, ch, config_.csi, config_.energy);
  return step_slot(ch);
}

SlotRecord ProtocolEngine::step_slot(const ChannelRealization& ch) {
  if (finished()) throw std::logic_error("step_slot: run already finished");

  const bool source_has = next_seq_ < total_sets_;
  std::vector<bool> can_receive(config_.n_relays), can_transmit(config_.n_relays);
  for (int i = 0; i < config_.n_relays; ++i) {
    can_receive[i] = source_has && !buffers_[i].full();
    can_transmit[i] = !buffers_[i].empty();
  }

  SelectionContext ctx;
  ctx.protocol = &protocol_;
  ctx.diffs = &diffs_;
  ctx.n_antennas = config_.n_antennas;
  ctx.energy = config_.energy;
  ctx.noise_psd = config_.noise_psd;
  ctx.balancing_ratio = balancing_.ratio();
  ctx.source_has_data = source_has;

  DistanceReport report;
  const SlotAction action = choose_action(ctx, ch, can_receive, can_transmit, &report);
  if (protocol_.family == Protocol::Family::SwitchedMaxLink)
    update_balancing(balancing_, report);

  SlotRecord record;
  if (!action.feasible) {
    no_feasible_action_ = true;  // source exhausted and all buffers empty
    record.outage = true;
    return record;
  }

  record.mode = action.mode;
  record.relay = action.relay;
  record.u = action.u;
  record.outage = action.outage;
  const int m = config_.n_antennas;
  const double coop_energy = config_.energy / m;

  if (action.outage) {
    ++n_outage_;
  } else {
    pep_trace_.push_back({action.mode, action.d_min});
    switch (action.mode) {
      case Mode::DirectTx: {
        PacketSet set = draw_source_set();
        std::vector<std::uint8_t> bits =
            transmit_detect(set.bits, ch.h_sd, ch.h_sd_est, 2.0 * coop_energy);
        deliver({set.seq, std::move(bits), 0, false});
        direct_toggle_ ^= 1;
        ++n_sd_;
        sd_rates_.push_back(sum_rate_slot(RateMode::Direct, ch.h_sd, config_.energy,
                                          config_.noise_psd, m));
        break;
      }
      case Mode::MaxLinkSR: {
        PacketSet set = draw_source_set();
        set.bits = transmit_detect(set.bits, ch.h_sr[action.relay],
                                   ch.h_sr_est[action.relay], coop_energy);
        set.arrival_slot = slots_;
        buffers_[action.relay].push(std::move(set));
        ++n_sr_;
        sr_rates_.push_back(sum_rate_slot(RateMode::SourceRelay, ch.h_sr[action.relay],
                                          config_.energy, config_.noise_psd, m));
        break;
      }
      case Mode::MaxLinkRD: {
        PacketSet set = buffers_[action.relay].pop();
        const MatrixXc h_true = submatrix(ch.h_rd[action.relay], action.u, m);
        const MatrixXc h_est = submatrix(ch.h_rd_est[action.relay], action.u, m);
        std::vector<std::uint8_t> bits =
            transmit_detect(set.bits, h_true, h_est, coop_energy);
        deliver({set.seq, std::move(bits), slots_ - set.arrival_slot, true});
        ++n_rd_;
        rd_rates_.push_back(sum_rate_slot(RateMode::RelayDestination, h_true,
                                          config_.energy, config_.noise_psd, m));
        break;
      }
    }
  }

  double level_sum = 0.0;
  for (const RelayBuffer& b : buffers_) level_sum += b.size();
  occupancy_sum_ += config_.n_relays > 0 ? level_sum / config_.n_relays : 0.0;
  ++slots_;
  return record;
}

RunMetrics ProtocolEngine::metrics() const {
  RunMetrics m;
  m.n_sr = n_sr_;
  m.n_rd = n_rd_;
  m.n_sd = n_sd_;
  m.n_outage = n_outage_;
  m.slots = slots_;
  m.delivered_sets = static_cast<long long>(delivered_.size());
  m.undelivered_sets = total_sets_ - m.delivered_sets;
  m.budget_exceeded = slots_ >= slot_budget_ && m.undelivered_sets > 0;

  long long relayed = 0;
  for (const DeliveredSet& set : delivered_) {
    const std::vector<std::uint8_t>& sent = source_bits_[set.seq];
    for (size_t b = 0; b < sent.size(); ++b)
      m.bit_errors += sent[b] != set.bits[b];
    m.bits_compared += static_cast<long long>(sent.size());
    relayed += set.via_relay;
  }
  m.ber = m.bits_compared > 0 ? static_cast<double>(m.bit_errors) / m.bits_compared : 0.0;
  m.avg_delay_slots = m.delivered_sets > 0
                          ? static_cast<double>(relayed_delay_sum_) / m.delivered_sets
                          : 0.0;
  m.avg_throughput = slots_ > 0 ? static_cast<double>(m.delivered_sets) / slots_ : 0.0;
  m.p_ml = m.delivered_sets > 0 ? static_cast<double>(relayed) / m.delivered_sets : 0.0;
  if (!pep_trace_.empty())
    m.mean_pep = mean_worst_case_pep(pep_trace_, config_.energy, config_.noise_psd,
                                     config_.n_antennas);
  if (!sr_rates_.empty() || !rd_rates_.empty() || !sd_rates_.empty())
    m.sum_rate = sum_rate_aggregate(sr_rates_, rd_rates_, sd_rates_);
  m.avg_buffer_occupancy = slots_ > 0 ? occupancy_sum_ / slots_ : 0.0;
  return m;
}

RunMetrics run_protocol(const EngineConfig& config, const Protocol& protocol,
                        Rng& rng, std::vector<SlotRecord>* trace) {
  ProtocolEngine engine(config, protocol, rng);
  while (!engine.finished()) {
    SlotRecord record = engine.step_slot();
    if (trace) trace->push_back(record);
  }
  return engine.metrics();
}

std::vector<PepTraceEntry> run_selection_trace(const EngineConfig& config,
                                               const Protocol& protocol,
                                               long long n_slots, Rng& rng) {
  const Constellation constellation = build_constellation(config.constellation);
  const DifferenceSet diffs = make_difference_set(constellation, config.n_antennas);
  std::vector<int> levels(config.n_relays, 0);
  BalancingState balancing;
  const int capacity = config.capacity();

  std::vector<PepTraceEntry> trace;
  trace.reserve(n_slots);
  std::vector<bool> can_receive(config.n_relays), can_transmit(config.n_relays);
  for (long long slot = 0; slot < n_slots; ++slot) {
    ChannelRealization ch = generate_channels(rng, config.n_relays, config.n_antennas,
                                              config.n_sub, config.profile);
    apply_csi_error(rng, ch, config.csi, config.energy);
    for (int i = 0; i < config.n_relays; ++i) {
      can_receive[i] = levels[i] < capacity;
      can_transmit[i] = levels[i] > 0;
    }
    SelectionContext ctx;
    ctx.protocol = &protocol;
    ctx.diffs = &diffs;
    ctx.n_antennas = config.n_antennas;
    ctx.energy = config.energy;
    ctx.noise_psd = config.noise_psd;
    ctx.balancing_ratio = balancing.ratio();
    ctx.source_has_data = true;

    DistanceReport report;
    const SlotAction action = choose_action(ctx, ch, can_receive, can_transmit, &report);
    if (protocol.family == Protocol::Family::SwitchedMaxLink)
      update_balancing(balancing, report);
    if (!action.feasible || action.outage) continue;
    trace.push_back({action.mode, action.d_min});
    if (action.mode == Mode::MaxLinkSR) ++levels[action.relay];
    if (action.mode == Mode::MaxLinkRD) --levels[action.relay];
  }
  return trace;
}

}  // namespace maxlink
