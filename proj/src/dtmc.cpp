#include "maxlink/dtmc.hpp"

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "maxlink/metrics.hpp"
#include "maxlink/selection.hpp"
#include "maxlink/sum_rate.hpp"

namespace maxlink {

int DtmcModel::buffer_states() const {
  int count = 1;
  for (int i = 0; i < n_relays; ++i) count *= capacity + 1;
  return count;
}

int DtmcModel::state_count() const { return z * buffer_states(); }

int DtmcModel::buffer_level(int state, int relay) const {
  int rem = state % buffer_states();
  for (int i = 0; i < relay; ++i) rem /= capacity + 1;
  return rem % (capacity + 1);
}

int DtmcModel::direct_toggle(int state) const { return state / buffer_states(); }

int DtmcModel::index_of(int toggle, const std::vector<int>& levels) const {
  int idx = 0;
  for (int i = n_relays - 1; i >= 0; --i) idx = idx * (capacity + 1) + levels[i];
  return toggle * buffer_states() + idx;
}

double DtmcModel::mean_level(int state) const {
  double sum = 0.0;
  for (int i = 0; i < n_relays; ++i) sum += buffer_level(state, i);
  return n_relays > 0 ? sum / n_relays : 0.0;
}

namespace {

DtmcModel make_model_shape(int n_relays, int capacity, int z, long long max_states) {
  if (n_relays < 1) throw std::invalid_argument("dtmc_build: n_relays < 1");
  if (capacity < 1) throw std::invalid_argument("dtmc_build: capacity < 1");
  if (z != 1 && z != 2) throw std::invalid_argument("dtmc_build: z must be 1 or 2");
  long long count = z;
  for (int i = 0; i < n_relays; ++i) {
    count *= capacity + 1;
    if (count > max_states)
      throw std::invalid_argument("dtmc_build: state space of " + std::to_string(count) +
                                  "+ states exceeds cap of " + std::to_string(max_states));
  }
  DtmcModel model;
  model.n_relays = n_relays;
  model.capacity = capacity;
  model.z = z;
  return model;
}

}  // namespace

DtmcModel dtmc_build(int n_relays, int capacity, int z,
                     const TransitionEstimator& estimator, long long max_states) {
  DtmcModel model = make_model_shape(n_relays, capacity, z, max_states);
  const int states = model.state_count();
  model.a = Eigen::MatrixXd::Zero(states, states);

  std::vector<int> levels(n_relays);
  for (int s = 0; s < states; ++s) {
    for (int i = 0; i < n_relays; ++i) levels[i] = model.buffer_level(s, i);
    const int toggle = model.direct_toggle(s);
    const TransitionProbabilities p = estimator(toggle, levels);
    if (p.sr.size() != n_relays || p.rd.size() != n_relays)
      throw std::invalid_argument("dtmc_build: estimator returned wrong relay count");

    double total = p.stay;
    model.a(s, s) += p.stay;
    for (int i = 0; i < n_relays; ++i) {
      if (p.sr(i) > 0.0) {
        if (levels[i] >= capacity)
          throw std::invalid_argument("dtmc_build: reception probability into a full buffer");
        ++levels[i];
        model.a(model.index_of(toggle, levels), s) += p.sr(i);
        --levels[i];
        total += p.sr(i);
      }
      if (p.rd(i) > 0.0) {
        if (levels[i] <= 0)
          throw std::invalid_argument("dtmc_build: transmission probability from an empty buffer");
        --levels[i];
        model.a(model.index_of(toggle, levels), s) += p.rd(i);
        ++levels[i];
        total += p.rd(i);
      }
    }
    if (p.dt > 0.0) {
      if (z != 2)
        throw std::invalid_argument("dtmc_build: direct transition in a chain without the toggle");
      model.a(model.index_of(1 - toggle, levels), s) += p.dt;
      total += p.dt;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("dtmc_build: outgoing probabilities sum to " +
                                  std::to_string(total));
  }
  return model;
}

namespace {

// Strongly connected components of the support graph (Kosaraju).
std::vector<int> scc_labels(const Eigen::MatrixXd& a, int& n_components) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  for (int start = 0; start < n; ++start) {
    if (seen[start]) continue;
    // Iterative DFS on edges cur -> next (a(next, cur) > 0).
    std::vector<std::pair<int, int>> stack{{start, 0}};
    seen[start] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      bool descended = false;
      for (int w = next; w < n; ++w) {
        if (a(w, v) > 0.0 && !seen[w]) {
          stack.back().second = w + 1;
          stack.emplace_back(w, 0);
          seen[w] = 1;
          descended = true;
          break;
        }
      }
      if (!descended) {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  std::vector<int> label(n, -1);
  n_components = 0;
  for (int idx = n - 1; idx >= 0; --idx) {
    const int root = order[idx];
    if (label[root] != -1) continue;
    std::vector<int> stack{root};
    label[root] = n_components;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < n; ++w) {
        if (a(v, w) > 0.0 && label[w] == -1) {  // reversed edge w -> v
          label[w] = n_components;
          stack.push_back(w);
        }
      }
    }
    ++n_components;
  }
  return label;
}

}  // namespace

Eigen::VectorXd stationary_distribution(const DtmcModel& model) {
  const int n = model.state_count();
  const Eigen::MatrixXd& a = model.a;
  for (int s = 0; s < n; ++s) {
    if (std::abs(a.col(s).sum() - 1.0) > 1e-9)
      throw std::runtime_error("stationary_distribution: matrix is not column-stochastic");
  }

  int n_components = 0;
  const std::vector<int> label = scc_labels(a, n_components);
  // A component is closed when no edge leaves it; the stationary
  // distribution is supported on the unique closed component.
  std::vector<char> closed(n_components, 1);
  for (int cur = 0; cur < n; ++cur)
    for (int next = 0; next < n; ++next)
      if (a(next, cur) > 0.0 && label[next] != label[cur]) closed[label[cur]] = 0;
  int closed_component = -1;
  for (int c = 0; c < n_components; ++c) {
    if (!closed[c]) continue;
    if (closed_component != -1)
      throw std::runtime_error("stationary_distribution: chain is not irreducible (multiple closed classes)");
    closed_component = c;
  }
  if (closed_component == -1)
    throw std::runtime_error("stationary_distribution: no closed class found");

  std::vector<int> members;
  for (int s = 0; s < n; ++s)
    if (label[s] == closed_component) members.push_back(s);
  const int m = static_cast<int>(members.size());

  // Solve (A - I) pi = 0 with sum(pi) = 1 on the closed class.
  Eigen::MatrixXd system(m + 1, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      system(i, j) = a(members[i], members[j]) - (i == j ? 1.0 : 0.0);
  system.row(m).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  rhs(m) = 1.0;
  Eigen::VectorXd pi_cc = system.colPivHouseholderQr().solve(rhs);

  Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) pi(members[i]) = std::max(pi_cc(i), 0.0);
  pi /= pi.sum();

  const double residual = (a * pi - pi).lpNorm<Eigen::Infinity>();
  if (residual > 1e-10)
    throw std::runtime_error("stationary_distribution: fixed-point residual " +
                             std::to_string(residual) + " exceeds 1e-10");
  return pi;
}

QueueingSummary outage_throughput_delay(const DtmcModel& model,
                                        const Eigen::VectorXd& pi, double rho,
                                        double p_ml_s, double p_ml_prime) {
  if (pi.size() != model.state_count())
    throw std::invalid_argument("outage_throughput_delay: pi size mismatch");
  if (rho <= 0.0 || rho > 1.0)
    throw std::invalid_argument("outage_throughput_delay: rho out of (0, 1]");

  QueueingSummary s;
  s.outage_probability = model.a.diagonal().dot(pi);
  for (int r = 0; r < model.state_count(); ++r)
    s.mean_queue_length += pi(r) * model.mean_level(r);

  const bool pure_max_link = model.z == 1 || (p_ml_s >= 1.0 && p_ml_prime >= 1.0);
  if (!pure_max_link && p_ml_prime <= 0.0) {
    // Pure direct-transmission limit: nothing flows through the relays.
    s.relay_throughput = 0.0;
    s.mean_delay = 0.0;
    return s;
  }
  const double rho_eff =
      pure_max_link ? rho : 2.0 * rho * p_ml_prime / (p_ml_prime + 1.0);
  s.relay_throughput = rho_eff * (1.0 - s.outage_probability) / model.n_relays;
  s.mean_delay = s.relay_throughput > 0.0
                     ? s.mean_queue_length / s.relay_throughput *
                           (pure_max_link ? 1.0 : p_ml_s)
                     : 0.0;
  return s;
}

MonteCarloTransitionEstimator::MonteCarloTransitionEstimator(int n_relays,
                                                             const Params& params,
                                                             Rng& rng)
    : n_relays_(n_relays),
      params_(params),
      rng_(&rng),
      diffs_(make_difference_set(build_constellation(params.constellation),
                                 params.n_antennas)) {
  // Fixed balancing ratio from a warm-up pass over channel draws.
  BalancingState balancing;
  for (int d = 0; d < 2000; ++d) {
    ChannelRealization ch = generate_channels(*rng_, n_relays_, params_.n_antennas,
                                              params_.n_sub, params_.profile);
    apply_csi_error(*rng_, ch, params_.csi, params_.energy);
    update_balancing(balancing, compute_distance_report(ch, diffs_, false));
  }
  balancing_ratio_ = balancing.ratio();
}

TransitionProbabilities MonteCarloTransitionEstimator::operator()(
    int toggle, const std::vector<int>& levels) const {
  (void)toggle;  // transition probabilities do not depend on the toggle
  TransitionProbabilities p;
  p.sr = Eigen::VectorXd::Zero(n_relays_);
  p.rd = Eigen::VectorXd::Zero(n_relays_);
  long long dt_count = 0, stay_count = 0;
  Eigen::VectorXi sr_count = Eigen::VectorXi::Zero(n_relays_);
  Eigen::VectorXi rd_count = Eigen::VectorXi::Zero(n_relays_);

  const bool include_direct = params_.switch_s > 0.0;
  const bool thresholded = params_.rate_threshold > 0.0;
  // The chain models steady flow: the source always has fresh packet-sets,
  // so reception is blocked only by a full buffer.
  std::vector<bool> can_receive(n_relays_), can_transmit(n_relays_);

  for (int d = 0; d < params_.draws; ++d) {
    ChannelRealization ch = generate_channels(*rng_, n_relays_, params_.n_antennas,
                                              params_.n_sub, params_.profile);
    apply_csi_error(*rng_, ch, params_.csi, params_.energy);

    bool direct_feasible = include_direct;
    for (int i = 0; i < n_relays_; ++i) {
      can_receive[i] = levels[i] < params_.capacity;
      can_transmit[i] = levels[i] > 0;
    }
    if (thresholded) {
      for (int i = 0; i < n_relays_; ++i) {
        if (can_receive[i] &&
            sum_rate_slot(RateMode::SourceRelay, ch.h_sr_est[i], params_.energy,
                          params_.noise_psd, params_.n_antennas) < params_.rate_threshold)
          can_receive[i] = false;
        if (can_transmit[i]) {
          double best = 0.0;
          for (int u = 0; u < params_.n_sub; ++u)
            best = std::max(best, sum_rate_slot(RateMode::RelayDestination,
                                                submatrix(ch.h_rd_est[i], u,
                                                          params_.n_antennas),
                                                params_.energy, params_.noise_psd,
                                                params_.n_antennas));
          if (best < params_.rate_threshold) can_transmit[i] = false;
        }
      }
      if (direct_feasible &&
          sum_rate_slot(RateMode::Direct, ch.h_sd_est, params_.energy,
                        params_.noise_psd, params_.n_antennas) < params_.rate_threshold)
        direct_feasible = false;
    }

    const DistanceReport report = compute_distance_report(ch, diffs_, include_direct);
    const SelectionResult sel =
        select_max_link(report, balancing_ratio_, can_receive, can_transmit);
    if (!sel.found && !direct_feasible) {
      ++stay_count;
      continue;
    }
    const SlotDecision decision =
        decide_mode(sel, report.sd_min, params_.switch_s, direct_feasible);
    switch (decision.mode) {
      case Mode::MaxLinkSR: ++sr_count(decision.relay); break;
      case Mode::MaxLinkRD: ++rd_count(decision.relay); break;
      case Mode::DirectTx: ++dt_count; break;
    }
  }

  const double total = params_.draws;
  for (int i = 0; i < n_relays_; ++i) {
    p.sr(i) = sr_count(i) / total;
    p.rd(i) = rd_count(i) / total;
  }
  p.dt = dt_count / total;
  p.stay = stay_count / total;
  return p;
}

}  // namespace maxlink
