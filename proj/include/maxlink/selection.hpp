#pragma once

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "maxlink/channel.hpp"
#include "maxlink/metrics.hpp"

namespace maxlink {

// Per-relay minimum distances on the energy-free scale. For reception the
// relay uses all U submatrices, and the per-relay value is the smallest
// submatrix minimum; for transmission the relay picks the submatrix with
// the largest minimum, recorded in rd_best_u.
struct RelayDistanceReport {
  Eigen::VectorXd sr_sub_min;  // U entries
  double sr_min = 0.0;         // min over u
  Eigen::VectorXd rd_sub_min;  // U entries
  double rd_min = 0.0;         // max over u
  int rd_best_u = 0;
};

struct DistanceReport {
  std::vector<RelayDistanceReport> relays;
  // Direct-link minimum on the same comparison scale as the relay values:
  // the 2x transmit-energy advantage of direct slots is folded in here.
  double sd_min = 0.0;
  bool has_direct = false;
};

// Distances are computed on the estimated channels (the selector only sees
// CSI estimates).
inline DistanceReport compute_distance_report(const ChannelRealization& ch,
                                              const DifferenceSet& diffs,
                                              bool include_direct) {
  DistanceReport report;
  const int n = ch.n_relays();
  const int m = diffs.n_antennas;
  report.relays.resize(n);
  for (int i = 0; i < n; ++i) {
    const int n_sub = static_cast<int>(ch.h_sr_est[i].rows()) / m;
    RelayDistanceReport& r = report.relays[i];
    r.sr_sub_min.resize(n_sub);
    r.rd_sub_min.resize(n_sub);
    for (int u = 0; u < n_sub; ++u) {
      r.sr_sub_min(u) = min_distance(submatrix(ch.h_sr_est[i], u, m), diffs);
      r.rd_sub_min(u) = min_distance(submatrix(ch.h_rd_est[i], u, m), diffs);
    }
    r.sr_min = r.sr_sub_min.minCoeff();
    Eigen::Index best_u = 0;
    r.rd_min = r.rd_sub_min.maxCoeff(&best_u);
    r.rd_best_u = static_cast<int>(best_u);
  }
  if (include_direct) {
    report.sd_min = 2.0 * min_distance(ch.h_sd_est, diffs);
    report.has_direct = true;
  }
  return report;
}

// Running means used to rescale reception distances so that reception and
// transmission slots are selected in comparable numbers.
struct BalancingState {
  double sr_sum = 0.0;
  long long sr_count = 0;
  double rd_sum = 0.0;
  long long rd_count = 0;

  double mean_sr() const { return sr_count ? sr_sum / sr_count : 0.0; }
  double mean_rd() const { return rd_count ? rd_sum / rd_count : 0.0; }
  // 1 until both sides have samples (first-slot warm-up).
  double ratio() const {
    if (sr_count == 0 || rd_count == 0) return 1.0;
    const double ms = mean_sr();
    return ms > 0.0 ? mean_rd() / ms : 1.0;
  }
};

// One sample per relay and side: the reception value that enters the
// ranking (min over submatrices) and the transmission value (max over
// submatrices). Matching these means keeps reception and transmission
// slots selected in comparable numbers for any U.
inline void update_balancing(BalancingState& state, const DistanceReport& report) {
  for (const RelayDistanceReport& r : report.relays) {
    state.sr_sum += r.sr_min;
    state.sr_count += 1;
    state.rd_sum += r.rd_min;
    state.rd_count += 1;
  }
}

enum class LinkKind { SourceRelay, RelayDestination };

struct Candidate {
  LinkKind kind = LinkKind::SourceRelay;
  int relay = -1;
  int u = -1;       // transmit submatrix for RD candidates
  double value = 0.0;
  bool feasible = false;
};

struct SelectionResult {
  bool found = false;
  Candidate winner;
  std::vector<Candidate> ranking;  // all 2N candidates, best first
};

// Ranks the 2N reception/transmission candidates by balanced minimum
// distance and picks the best one whose buffer state allows it: a full
// buffer blocks reception, an empty buffer blocks transmission. Ties break
// deterministically (reception first, then relay index, then submatrix).
inline SelectionResult select_max_link(const DistanceReport& report,
                                       double balancing_ratio,
                                       const std::vector<bool>& can_receive,
                                       const std::vector<bool>& can_transmit) {
  const int n = static_cast<int>(report.relays.size());
  SelectionResult result;
  result.ranking.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    const RelayDistanceReport& r = report.relays[i];
    result.ranking.push_back({LinkKind::SourceRelay, i, -1,
                              balancing_ratio * r.sr_min, can_receive[i]});
    result.ranking.push_back({LinkKind::RelayDestination, i, r.rd_best_u,
                              r.rd_min, can_transmit[i]});
  }
  std::stable_sort(result.ranking.begin(), result.ranking.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.value != b.value) return a.value > b.value;
                     if (a.kind != b.kind) return a.kind == LinkKind::SourceRelay;
                     if (a.relay != b.relay) return a.relay < b.relay;
                     return a.u < b.u;
                   });
  for (const Candidate& c : result.ranking) {
    if (c.feasible) {
      result.winner = c;
      result.found = true;
      break;
    }
  }
  return result;
}

enum class Mode { MaxLinkSR, MaxLinkRD, DirectTx };

struct SlotDecision {
  Mode mode = Mode::DirectTx;
  int relay = -1;
  int u = -1;
  double winning_metric = 0.0;
  double g = 0.0;  // ratio of the winning metric to the direct-link minimum
};

// Mode rule: a reception winner needs G > S, a transmission winner needs
// G > 1, otherwise the slot goes to direct transmission. S = 0 disables
// the direct branch entirely (pure Max-Link operation). When direct
// transmission is not available (no fresh data at the source), the winner
// is used regardless of G.
inline SlotDecision decide_mode(const SelectionResult& selection, double sd_min,
                                double switch_s, bool direct_feasible) {
  SlotDecision d;
  if (!selection.found) {
    if (!direct_feasible)
      throw std::logic_error("decide_mode: no feasible action this slot");
    if (sd_min <= 0.0)
      throw std::runtime_error("degenerate slot: no feasible candidate and zero direct-link distance");
    d.mode = Mode::DirectTx;
    return d;
  }
  const Candidate& w = selection.winner;
  d.winning_metric = w.value;
  if (switch_s == 0.0) {
    d.mode = w.kind == LinkKind::SourceRelay ? Mode::MaxLinkSR : Mode::MaxLinkRD;
    d.relay = w.relay;
    d.u = w.u;
    return d;
  }
  d.g = sd_min > 0.0 ? w.value / sd_min
                     : std::numeric_limits<double>::infinity();
  const double threshold = w.kind == LinkKind::SourceRelay ? switch_s : 1.0;
  if (d.g > threshold || !direct_feasible) {
    d.mode = w.kind == LinkKind::SourceRelay ? Mode::MaxLinkSR : Mode::MaxLinkRD;
    d.relay = w.relay;
    d.u = w.u;
  } else {
    d.mode = Mode::DirectTx;
  }
  return d;
}

}  // namespace maxlink
