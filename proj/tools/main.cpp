#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "maxlink/complexity.hpp"
#include "maxlink/experiment.hpp"

namespace {

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int jobs) {
  const maxlink::ExperimentConfig config = maxlink::parse_config(config_path);
  const std::vector<maxlink::RunPoint> results = maxlink::run_experiment(config, jobs);
  maxlink::emit_results(results, out_dir);
  std::printf("%-24s %8s %6s %12s %12s %10s %10s\n", "protocol", "snr_db", "seed",
              "ber", "sum_rate", "delay", "sets/slot");
  for (const maxlink::RunPoint& p : results) {
    std::printf("%-24s %8.2f %6llu %12.4e %12.4f %10.3f %10.4f\n", p.protocol.c_str(),
                p.snr_db, static_cast<unsigned long long>(p.seed), p.metrics.ber,
                p.metrics.sum_rate, p.metrics.avg_delay_slots, p.metrics.avg_throughput);
    if (p.metrics.undelivered_sets > 0)
      std::printf("  warning: %lld packet-sets undelivered (budget %s)\n",
                  p.metrics.undelivered_sets,
                  p.metrics.budget_exceeded ? "exceeded" : "not exceeded");
  }
  std::printf("wrote %s/runs.csv and %s/aggregate.csv\n", out_dir.c_str(), out_dir.c_str());
  return 0;
}

int cmd_pep(const std::string& config_path, const std::string& out_dir) {
  const maxlink::ExperimentConfig config = maxlink::parse_config(config_path);
  std::printf("%-24s %8s %14s %10s\n", "protocol", "snr_db", "pep_theory", "slots");
  std::vector<maxlink::PepPoint> all;
  for (const maxlink::Protocol& protocol : config.protocols) {
    const std::vector<maxlink::PepPoint> curve =
        maxlink::theoretical_pep_curve(config, protocol, config.seeds.front());
    for (const maxlink::PepPoint& p : curve) {
      std::printf("%-24s %8.2f %14.6e %10lld\n", p.protocol.c_str(), p.snr_db,
                  p.mean_pep, p.slots);
      all.push_back(p);
    }
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/pep.csv";
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + path);
    std::fprintf(f, "protocol,snr_db,pep_theory,slots\n");
    for (const maxlink::PepPoint& p : all)
      std::fprintf(f, "%s,%.17e,%.17e,%lld\n", p.protocol.c_str(), p.snr_db,
                   p.mean_pep, p.slots);
    std::fclose(f);
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_dtmc(const std::string& config_path, int draws_override) {
  maxlink::ExperimentConfig config = maxlink::parse_config(config_path);
  if (draws_override > 0) config.dtmc_draws = draws_override;
  std::printf("%-24s %8s %7s %10s %10s %10s %10s\n", "protocol", "snr_db", "states",
              "p_outage", "E[T_n]", "E[L_n]", "E[d]");
  for (const maxlink::Protocol& protocol : config.protocols) {
    if (protocol.family != maxlink::Protocol::Family::SwitchedMaxLink) {
      std::printf("%-24s (no chain model)\n", protocol.label.c_str());
      continue;
    }
    for (double snr : config.snr_db) {
      const maxlink::DtmcReport r =
          maxlink::dtmc_report(config, protocol, snr, config.seeds.front());
      std::printf("%-24s %8.2f %7d %10.4e %10.4f %10.4f %10.4f\n",
                  r.protocol.c_str(), r.snr_db, r.states,
                  r.summary.outage_probability, r.summary.relay_throughput,
                  r.summary.mean_queue_length, r.summary.mean_delay);
    }
  }
  return 0;
}

int cmd_complexity(int n, int ms, int u, int w) {
  const maxlink::ComplexityReport r = maxlink::complexity_report(n, u, ms, w);
  std::printf("metric terms per submatrix: %lld\n", r.x);
  std::printf("%-12s %16s %16s\n", "criterion", "additions", "multiplications");
  std::printf("%-12s %16lld %16lld\n", "MMD", r.mmd_additions, r.mmd_multiplications);
  std::printf("%-12s %16lld %16lld\n", "QN", r.qn_additions, r.qn_multiplications);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Buffer-aided cooperative MIMO relay selection simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "results";
  int jobs = 1;

  CLI::App* simulate = app.add_subcommand("simulate", "Run protocol simulations over an SNR grid");
  simulate->add_option("--config", config_path, "JSON experiment config")->required();
  simulate->add_option("--out", out_dir, "Output directory for CSV files");
  simulate->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  std::string pep_out;
  CLI::App* pep = app.add_subcommand("pep", "Theoretical worst-case PEP curves");
  pep->add_option("--config", config_path, "JSON experiment config")->required();
  pep->add_option("--out", pep_out, "Optional output directory");

  int draws = 0;
  CLI::App* dtmc = app.add_subcommand("dtmc", "Buffer-state chain: outage, throughput, delay");
  dtmc->add_option("--config", config_path, "JSON experiment config")->required();
  dtmc->add_option("--draws", draws, "Monte Carlo draws per state");

  int n = 0, ms = 0, u = 1, w = 1;
  CLI::App* complexity = app.add_subcommand("complexity", "Selection-criterion arithmetic cost");
  complexity->add_option("--n", n, "Number of relays")->required();
  complexity->add_option("--ms", ms, "Antennas at source and destination")->required();
  complexity->add_option("--u", u, "Antenna sets per relay");
  complexity->add_option("--w", w, "Distinct constellation distance values");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir, jobs);
    if (pep->parsed()) return cmd_pep(config_path, pep_out);
    if (dtmc->parsed()) return cmd_dtmc(config_path, draws);
    if (complexity->parsed()) return cmd_complexity(n, ms, u, w);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
