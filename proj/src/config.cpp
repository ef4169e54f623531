#include "maxlink/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace maxlink {

using nlohmann::json;

EngineConfig ExperimentConfig::engine_config(double snr_db_value) const {
  EngineConfig cfg;
  cfg.n_relays = n_relays;
  cfg.n_antennas = n_antennas;
  cfg.n_sub = n_sub;
  cfg.buffer_packets = buffer_packets;
  cfg.constellation = constellation;
  cfg.energy = energy_for_snr_db(snr_db_value);
  cfg.noise_psd = 1.0;
  cfg.profile = profile;
  cfg.csi = csi;
  cfg.total_packets = packets;
  cfg.symbols_per_packet = symbols_per_packet;
  return cfg;
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& field,
                       const std::string& message) {
  throw ConfigError(origin + ": field '" + field + "': " + message);
}

double require_number(const json& j, const std::string& origin, const std::string& field) {
  if (!j.is_number()) fail(origin, field, "expected a number");
  return j.get<double>();
}

long long require_integer(const json& j, const std::string& origin, const std::string& field) {
  if (!j.is_number_integer()) fail(origin, field, "expected an integer");
  return j.get<long long>();
}

std::vector<double> parse_snr_grid(const json& j, const std::string& origin) {
  std::vector<double> grid;
  if (j.is_array()) {
    for (const json& v : j) grid.push_back(require_number(v, origin, "snr_db"));
  } else if (j.is_object()) {
    const double from = require_number(j.at("from"), origin, "snr_db.from");
    const double to = require_number(j.at("to"), origin, "snr_db.to");
    const double step = j.contains("step")
                            ? require_number(j.at("step"), origin, "snr_db.step")
                            : 1.0;
    if (step <= 0.0) fail(origin, "snr_db.step", "must be positive");
    for (double s = from; s <= to + 1e-9; s += step) grid.push_back(s);
  } else {
    fail(origin, "snr_db", "expected an array or {from, to, step}");
  }
  if (grid.empty()) fail(origin, "snr_db", "grid must be nonempty");
  return grid;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

  static const std::set<std::string> known = {
      "N", "M_S", "U", "J", "constellation", "S", "snr_db", "packets",
      "symbols_per_packet", "sigma2_sr", "sigma2_rd", "sigma2_sd", "csi",
      "protocols", "seeds", "r0", "rho", "pep_slots", "dtmc_draws"};
  for (const auto& [key, value] : root.items()) {
    if (!known.count(key)) fail(origin, key, "unknown key");
  }
  for (const std::string required : {"N", "M_S", "J", "constellation", "snr_db",
                                     "protocols", "seeds"}) {
    if (!root.contains(required)) fail(origin, required, "missing required key");
  }

  ExperimentConfig cfg;
  cfg.n_relays = static_cast<int>(require_integer(root["N"], origin, "N"));
  if (cfg.n_relays < 0) fail(origin, "N", "must be >= 0");
  cfg.n_antennas = static_cast<int>(require_integer(root["M_S"], origin, "M_S"));
  if (cfg.n_antennas < 1) fail(origin, "M_S", "must be >= 1");
  if (root.contains("U")) {
    cfg.n_sub = static_cast<int>(require_integer(root["U"], origin, "U"));
    if (cfg.n_sub < 1) fail(origin, "U", "must be >= 1");
  }
  cfg.buffer_packets = static_cast<int>(require_integer(root["J"], origin, "J"));
  if (cfg.buffer_packets < 1) fail(origin, "J", "must be >= 1");
  if (cfg.buffer_packets % cfg.n_antennas != 0)
    fail(origin, "J", "buffer size must hold whole packet-sets (J divisible by M_S)");

  if (!root["constellation"].is_string())
    fail(origin, "constellation", "expected a string");
  try {
    cfg.constellation = constellation_from_string(root["constellation"].get<std::string>());
    build_constellation(cfg.constellation);
  } catch (const std::invalid_argument& e) {
    fail(origin, "constellation", e.what());
  }

  if (root.contains("S")) {
    cfg.switch_s = require_number(root["S"], origin, "S");
    if (cfg.switch_s < 0.0) fail(origin, "S", "must be >= 0");
  }
  cfg.snr_db = parse_snr_grid(root["snr_db"], origin);

  cfg.packets = root.contains("packets")
                    ? require_integer(root["packets"], origin, "packets")
                    : 10000LL * cfg.n_antennas;
  if (cfg.packets < 1) fail(origin, "packets", "must be >= 1");
  if (cfg.packets % cfg.n_antennas != 0)
    fail(origin, "packets", "must form whole packet-sets (divisible by M_S)");

  if (root.contains("symbols_per_packet")) {
    cfg.symbols_per_packet =
        static_cast<int>(require_integer(root["symbols_per_packet"], origin, "symbols_per_packet"));
    if (cfg.symbols_per_packet < 1) fail(origin, "symbols_per_packet", "must be >= 1");
  }

  for (const auto& [key, target] :
       std::initializer_list<std::pair<const char*, double*>>{
           {"sigma2_sr", &cfg.profile.sigma2_sr},
           {"sigma2_rd", &cfg.profile.sigma2_rd},
           {"sigma2_sd", &cfg.profile.sigma2_sd}}) {
    if (!root.contains(key)) continue;
    *target = require_number(root[key], origin, key);
    if (*target <= 0.0) fail(origin, key, "must be positive");
  }

  if (root.contains("csi")) {
    const json& csi = root["csi"];
    if (!csi.is_object()) fail(origin, "csi", "expected an object {beta, alpha}");
    if (csi.contains("beta")) {
      cfg.csi.beta = require_number(csi["beta"], origin, "csi.beta");
      if (cfg.csi.beta < 0.0) fail(origin, "csi.beta", "must be >= 0");
    }
    if (csi.contains("alpha")) {
      cfg.csi.alpha = require_number(csi["alpha"], origin, "csi.alpha");
      if (cfg.csi.alpha < 0.0 || cfg.csi.alpha > 1.0)
        fail(origin, "csi.alpha", "must be in [0, 1]");
    }
  }

  if (root.contains("r0")) {
    cfg.r0 = require_number(root["r0"], origin, "r0");
    if (cfg.r0 <= 0.0) fail(origin, "r0", "must be positive");
  }
  if (root.contains("rho")) {
    cfg.rho = require_number(root["rho"], origin, "rho");
    if (cfg.rho <= 0.0 || cfg.rho > 1.0) fail(origin, "rho", "must be in (0, 1]");
  }
  if (root.contains("pep_slots")) {
    cfg.pep_slots = require_integer(root["pep_slots"], origin, "pep_slots");
    if (cfg.pep_slots < 1) fail(origin, "pep_slots", "must be >= 1");
  }
  if (root.contains("dtmc_draws")) {
    cfg.dtmc_draws = static_cast<int>(require_integer(root["dtmc_draws"], origin, "dtmc_draws"));
    if (cfg.dtmc_draws < 1) fail(origin, "dtmc_draws", "must be >= 1");
  }

  if (!root["protocols"].is_array() || root["protocols"].empty())
    fail(origin, "protocols", "expected a nonempty array of protocol names");
  for (const json& name : root["protocols"]) {
    if (!name.is_string()) fail(origin, "protocols", "entries must be strings");
    try {
      cfg.protocols.push_back(
          Protocol::from_name(name.get<std::string>(), cfg.switch_s, cfg.r0));
    } catch (const std::invalid_argument& e) {
      fail(origin, "protocols", e.what());
    }
  }

  if (!root["seeds"].is_array() || root["seeds"].empty())
    fail(origin, "seeds", "expected a nonempty array of seeds");
  for (const json& seed : root["seeds"]) {
    if (!seed.is_number_integer()) fail(origin, "seeds", "entries must be integers");
    cfg.seeds.push_back(seed.get<std::uint64_t>());
  }

  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

}  // namespace maxlink
