#include "maxlink/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <stdexcept>

namespace maxlink {

std::vector<RunPoint> run_experiment(const ExperimentConfig& config, int jobs) {
  struct Task {
    Protocol protocol;
    double snr_db;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const Protocol& protocol : config.protocols)
    for (double snr : config.snr_db)
      for (std::uint64_t seed : config.seeds) tasks.push_back({protocol, snr, seed});

  std::vector<RunPoint> results(tasks.size());
  auto run_one = [&config](const Task& task) {
    Rng rng(task.seed);
    RunPoint point;
    point.protocol = task.protocol.label;
    point.snr_db = task.snr_db;
    point.seed = task.seed;
    point.metrics = run_protocol(config.engine_config(task.snr_db), task.protocol, rng);
    return point;
  };

  if (jobs <= 1) {
    for (size_t i = 0; i < tasks.size(); ++i) results[i] = run_one(tasks[i]);
    return results;
  }
  // Bounded fan-out; results land at their task index, so aggregation order
  // is independent of completion order.
  size_t next = 0;
  while (next < tasks.size()) {
    const size_t batch = std::min<size_t>(jobs, tasks.size() - next);
    std::vector<std::future<RunPoint>> futures;
    futures.reserve(batch);
    for (size_t b = 0; b < batch; ++b)
      futures.push_back(std::async(std::launch::async, run_one, tasks[next + b]));
    for (size_t b = 0; b < batch; ++b) results[next + b] = futures[b].get();
    next += batch;
  }
  return results;
}

namespace {

std::string fmt(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17e", value);
  return buf;
}

struct Accumulator {
  std::vector<double> ber, pep, rate, delay, throughput;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1) / v.size());
}

}  // namespace

void emit_results(const std::vector<RunPoint>& results, const std::string& out_dir) {
  if (results.empty()) throw std::invalid_argument("emit_results: no results");
  std::filesystem::create_directories(out_dir);

  const std::filesystem::path runs_path = std::filesystem::path(out_dir) / "runs.csv";
  std::ofstream runs(runs_path);
  if (!runs) throw std::runtime_error("emit_results: cannot write " + runs_path.string());
  runs << "protocol,snr_db,seed,ber,pep_theory,sum_rate_bits_hz,avg_delay_slots,"
          "avg_throughput,n_sr,n_rd,n_sd\n";
  for (const RunPoint& p : results) {
    runs << p.protocol << ',' << fmt(p.snr_db) << ',' << p.seed << ','
         << fmt(p.metrics.ber) << ',' << fmt(p.metrics.mean_pep) << ','
         << fmt(p.metrics.sum_rate) << ',' << fmt(p.metrics.avg_delay_slots) << ','
         << fmt(p.metrics.avg_throughput) << ',' << p.metrics.n_sr << ','
         << p.metrics.n_rd << ',' << p.metrics.n_sd << '\n';
  }

  // Aggregate across seeds, keyed in first-appearance order.
  std::vector<std::pair<std::string, double>> order;
  std::map<std::pair<std::string, double>, Accumulator> acc;
  for (const RunPoint& p : results) {
    const std::pair<std::string, double> key{p.protocol, p.snr_db};
    if (!acc.count(key)) order.push_back(key);
    Accumulator& a = acc[key];
    a.ber.push_back(p.metrics.ber);
    a.pep.push_back(p.metrics.mean_pep);
    a.rate.push_back(p.metrics.sum_rate);
    a.delay.push_back(p.metrics.avg_delay_slots);
    a.throughput.push_back(p.metrics.avg_throughput);
  }

  const std::filesystem::path agg_path = std::filesystem::path(out_dir) / "aggregate.csv";
  std::ofstream agg(agg_path);
  if (!agg) throw std::runtime_error("emit_results: cannot write " + agg_path.string());
  agg << "protocol,snr_db,seeds,ber_mean,ber_stderr,pep_mean,pep_stderr,"
         "sum_rate_mean,sum_rate_stderr,avg_delay_mean,avg_delay_stderr,"
         "avg_throughput_mean,avg_throughput_stderr\n";
  for (const auto& key : order) {
    const Accumulator& a = acc.at(key);
    agg << key.first << ',' << fmt(key.second) << ',' << a.ber.size() << ','
        << fmt(mean_of(a.ber)) << ',' << fmt(stderr_of(a.ber)) << ','
        << fmt(mean_of(a.pep)) << ',' << fmt(stderr_of(a.pep)) << ','
        << fmt(mean_of(a.rate)) << ',' << fmt(stderr_of(a.rate)) << ','
        << fmt(mean_of(a.delay)) << ',' << fmt(stderr_of(a.delay)) << ','
        << fmt(mean_of(a.throughput)) << ',' << fmt(stderr_of(a.throughput)) << '\n';
  }
}

std::vector<PepPoint> theoretical_pep_curve(const ExperimentConfig& config,
                                            const Protocol& protocol,
                                            std::uint64_t seed) {
  std::vector<PepPoint> curve;
  curve.reserve(config.snr_db.size());
  for (double snr : config.snr_db) {
    Rng rng(seed);
    const EngineConfig engine = config.engine_config(snr);
    const std::vector<PepTraceEntry> trace =
        run_selection_trace(engine, protocol, config.pep_slots, rng);
    curve.push_back({protocol.label, snr,
                     mean_worst_case_pep(trace, engine.energy, engine.noise_psd,
                                         engine.n_antennas),
                     static_cast<long long>(trace.size())});
  }
  return curve;
}

DtmcReport dtmc_report(const ExperimentConfig& config, const Protocol& protocol,
                       double snr_db, std::uint64_t seed) {
  if (protocol.family != Protocol::Family::SwitchedMaxLink)
    throw std::invalid_argument("dtmc_report: chain model covers the Max-Link protocols");
  DtmcReport report;
  report.protocol = protocol.label;
  report.snr_db = snr_db;

  const EngineConfig engine = config.engine_config(snr_db);
  const int z = protocol.direct_allowed() ? 2 : 1;

  MonteCarloTransitionEstimator::Params params;
  params.n_antennas = engine.n_antennas;
  params.n_sub = engine.n_sub;
  params.capacity = engine.capacity();
  params.constellation = engine.constellation;
  params.profile = engine.profile;
  params.csi = engine.csi;
  params.energy = engine.energy;
  params.noise_psd = engine.noise_psd;
  params.switch_s = protocol.switch_s;
  params.draws = config.dtmc_draws;

  Rng rng(seed);
  MonteCarloTransitionEstimator estimator(engine.n_relays, params, rng);
  const DtmcModel model =
      dtmc_build(engine.n_relays, engine.capacity(), z, estimator);
  const Eigen::VectorXd pi = stationary_distribution(model);
  report.states = model.state_count();

  if (z == 2) {
    // Relay-routing probabilities measured from short simulation runs: one
    // at the configured switch value and one at the unit-capped value.
    EngineConfig probe = engine;
    probe.total_packets =
        std::min<long long>(engine.total_packets, 2000LL * engine.n_antennas);
    Rng rng_s(seed + 1);
    report.p_ml_s = run_protocol(probe, protocol, rng_s).p_ml;
    const double s_prime = std::min(protocol.switch_s, 1.0);
    if (s_prime == protocol.switch_s) {
      report.p_ml_prime = report.p_ml_s;
    } else {
      Rng rng_p(seed + 1);
      report.p_ml_prime =
          run_protocol(probe, Protocol::switched_max_link(s_prime), rng_p).p_ml;
    }
  }
  report.summary = outage_throughput_delay(model, pi, config.rho, report.p_ml_s,
                                           report.p_ml_prime);
  return report;
}

}  // namespace maxlink
