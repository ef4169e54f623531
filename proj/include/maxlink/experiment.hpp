#pragma once

#include <string>
#include <vector>

#include "maxlink/config.hpp"
#include "maxlink/dtmc.hpp"
#include "maxlink/protocol.hpp"

namespace maxlink {

struct RunPoint {
  std::string protocol;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

// One full protocol run per (protocol, SNR, seed), in that nesting order.
// Each run owns an RNG seeded with its seed, so results do not depend on
// how many runs execute concurrently.
std::vector<RunPoint> run_experiment(const ExperimentConfig& config, int jobs = 1);

// Writes runs.csv (one row per run) and aggregate.csv (per-point mean and
// standard error across seeds) into the directory.
void emit_results(const std::vector<RunPoint>& results, const std::string& out_dir);

struct PepPoint {
  std::string protocol;
  double snr_db = 0.0;
  double mean_pep = 0.0;
  long long slots = 0;
};

// Mean theoretical worst-case PEP per SNR point from selection-only traces.
std::vector<PepPoint> theoretical_pep_curve(const ExperimentConfig& config,
                                            const Protocol& protocol,
                                            std::uint64_t seed);

struct DtmcReport {
  std::string protocol;
  double snr_db = 0.0;
  int states = 0;
  double p_ml_s = 1.0;
  double p_ml_prime = 1.0;
  QueueingSummary summary;
};

// Builds the buffer-state chain for one protocol at one SNR point with the
// Monte Carlo transition estimator and summarizes it. For protocols with a
// direct branch, the relay-routing probabilities are measured from short
// simulation runs.
DtmcReport dtmc_report(const ExperimentConfig& config, const Protocol& protocol,
                       double snr_db, std::uint64_t seed);

}  // namespace maxlink
