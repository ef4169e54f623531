#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "maxlink/channel.hpp"
#include "maxlink/constellation.hpp"
#include "maxlink/metrics.hpp"
#include "maxlink/types.hpp"

namespace maxlink {

// Discrete-time Markov chain over buffer occupancies. A state encodes the
// per-relay buffer levels (0..L packet-sets each) plus, when z = 2, the
// direct-delivery toggle bit. The transition matrix is column-stochastic:
// a(next, cur), so every column sums to 1 and the stationary distribution
// satisfies a * pi = pi.
struct DtmcModel {
  int n_relays = 0;
  int capacity = 0;  // L, packet-sets per buffer
  int z = 1;         // 1 without the direct toggle, 2 with it
  Eigen::MatrixXd a;

  int state_count() const;
  int buffer_states() const;  // (L+1)^N
  int buffer_level(int state, int relay) const;
  int direct_toggle(int state) const;
  int index_of(int toggle, const std::vector<int>& levels) const;
  // Mean buffer level across relays in a given state.
  double mean_level(int state) const;
};

// Probabilities of the four per-slot events from one state: a relay buffer
// gains a set, a relay buffer loses a set, the direct toggle flips, or the
// state self-loops (outage). Entries for infeasible moves must be zero and
// the total must be 1.
struct TransitionProbabilities {
  Eigen::VectorXd sr;  // per relay: buffer level +1
  Eigen::VectorXd rd;  // per relay: buffer level -1
  double dt = 0.0;     // toggle flip
  double stay = 0.0;   // outage self-loop
};

using TransitionEstimator =
    std::function<TransitionProbabilities(int toggle, const std::vector<int>& levels)>;

DtmcModel dtmc_build(int n_relays, int capacity, int z,
                     const TransitionEstimator& estimator,
                     long long max_states = 100000);

// Stationary distribution on the unique closed communicating class of the
// support graph (zero elsewhere). Throws if the chain has no unique closed
// class or if the fixed-point residual exceeds 1e-10.
Eigen::VectorXd stationary_distribution(const DtmcModel& model);

struct QueueingSummary {
  double outage_probability = 0.0;
  double relay_throughput = 0.0;   // packet-sets per slot through one relay
  double mean_queue_length = 0.0;  // packet-sets, averaged over relays
  double mean_delay = 0.0;         // slots
};

// Outage probability sum(pi_r * a_rr), per-relay throughput, mean queue
// length and mean delay. For a chain with the direct toggle, p_ml_s is the
// probability of a packet-set travelling through the relays at the
// configured switch value and p_ml_prime the same probability at the
// unit-capped switch value; both default to 1 (pure Max-Link operation).
QueueingSummary outage_throughput_delay(const DtmcModel& model,
                                        const Eigen::VectorXd& pi, double rho,
                                        double p_ml_s = 1.0,
                                        double p_ml_prime = 1.0);

// Estimates transition probabilities by running the selection rule on
// Monte Carlo channel draws, with buffer feasibility taken from the state.
// An optional rate threshold marks links with per-slot mutual information
// below r0 as unusable; a slot where no usable action remains is an outage.
class MonteCarloTransitionEstimator {
 public:
  struct Params {
    int n_antennas = 1;
    int n_sub = 1;
    int capacity = 1;  // L, packet-sets per buffer
    ConstellationKind constellation = ConstellationKind::Bpsk;
    LinkVarianceProfile profile;
    CsiModel csi;
    double energy = 1.0;
    double noise_psd = 1.0;
    double switch_s = 0.0;    // 0 disables the direct branch
    double rate_threshold = 0.0;  // 0 disables outage
    int draws = 10000;
  };

  MonteCarloTransitionEstimator(int n_relays, const Params& params, Rng& rng);

  TransitionProbabilities operator()(int toggle, const std::vector<int>& levels) const;

  double balancing_ratio() const { return balancing_ratio_; }

 private:
  int n_relays_;
  Params params_;
  Rng* rng_;
  double balancing_ratio_ = 1.0;
  DifferenceSet diffs_;
};

}  // namespace maxlink
