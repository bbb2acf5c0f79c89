#include "slicesim/exp/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace slicesim::exp {

namespace {

using nlohmann::json;

std::string join_errors(const std::vector<std::string>& errors) {
  std::ostringstream out;
  out << "scenario validation failed:";
  for (const std::string& e : errors) out << "\n  " << e;
  return out.str();
}

// Accumulates path-tagged violations while walking one JSON object.
struct Checker {
  const json& obj;
  std::string path;
  std::vector<std::string>& errors;
  std::set<std::string> seen;

  void fail(const std::string& sub, const std::string& msg) {
    errors.push_back(path + sub + ": " + msg);
  }

  const json* field(const char* key, bool required) {
    seen.insert(key);
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(std::string("/") + key, "required field is missing");
      return nullptr;
    }
    return &*it;
  }

  void number(const char* key, bool required, double lo, double hi) {
    const json* v = field(key, required);
    if (!v) return;
    if (!v->is_number()) {
      fail(std::string("/") + key, "must be a number");
      return;
    }
    const double x = v->get<double>();
    if (x < lo || x > hi) {
      fail(std::string("/") + key,
           "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
               "]");
    }
  }

  void integer(const char* key, bool required, std::int64_t lo,
               std::int64_t hi) {
    const json* v = field(key, required);
    if (!v) return;
    if (!v->is_number_integer() && !v->is_number_unsigned()) {
      fail(std::string("/") + key, "must be an integer");
      return;
    }
    const auto x = v->get<std::int64_t>();
    if (x < lo || x > hi) {
      fail(std::string("/") + key,
           "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
               "]");
    }
  }

  void boolean(const char* key) {
    const json* v = field(key, false);
    if (v && !v->is_boolean())
      fail(std::string("/") + key, "must be a boolean");
  }

  void string_choice(const char* key, bool required,
                     const std::vector<std::string>& allowed) {
    const json* v = field(key, required);
    if (!v) return;
    if (!v->is_string()) {
      fail(std::string("/") + key, "must be a string");
      return;
    }
    const auto s = v->get<std::string>();
    for (const std::string& a : allowed) {
      if (s == a) return;
    }
    std::string list;
    for (std::size_t i = 0; i < allowed.size(); ++i)
      list += (i ? ", " : "") + ("'" + allowed[i] + "'");
    fail(std::string("/") + key, "must be one of " + list);
  }

  void no_unknown_fields() {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (seen.count(it.key()) == 0)
        fail(std::string("/") + it.key(), "unknown field");
    }
  }
};

void check_radio(const json& j, const std::string& path,
                 std::vector<std::string>& errors) {
  Checker c{j, path, errors, {}};
  c.number("carrier_mhz", false, 1e-6, 1e6);
  c.number("cell_radius_m", false, 1.0, 1e6);
  c.integer("total_rbs", false, 1, 100000);
  c.number("rb_bandwidth_hz", false, 1.0, 1e9);
  c.number("tx_power_dbm", false, -100.0, 100.0);
  c.number("noise_density_dbm_hz", false, -300.0, 0.0);
  c.number("shadowing_std_db", false, 0.0, 50.0);
  c.number("lambda_weight", false, 0.0, 1e3);
  c.number("mu_weight", false, 0.0, 1e3);
  c.number("delay_cap_s", false, 1e-6, 1e6);
  c.number("reference_spectral_efficiency", false, 1e-3, 100.0);
  c.integer("kappa", false, 0, 100000);
  c.no_unknown_fields();
}

void check_slice(const json& j, const std::string& path,
                 std::vector<std::string>& errors) {
  Checker c{j, path, errors, {}};
  const json* id = c.field("id", true);
  if (id && !id->is_string()) c.fail("/id", "must be a string");
  c.string_choice("kind", true, {"rate", "delay"});
  c.number("r_min_mbps", false, 0.0, 1e6);
  c.number("tau_max_ms", false, 0.0, 1e6);
  c.number("phi", false, 1e-9, 1e9);
  c.integer("device_count", false, 1, 100000);
  c.number("lambda_pkts_s", false, 1e-9, 1e9);
  c.number("packet_bits", false, 1.0, 1e9);
  c.number("load_scale", false, 1e-9, 1e6);
  c.no_unknown_fields();
}

void check_traffic(const json& j, const std::string& path,
                   std::vector<std::string>& errors) {
  Checker c{j, path, errors, {}};
  c.number("base_load_mbps", false, 1e-9, 1e6);
  c.number("amplitude", false, 0.0, 1e3);
  c.number("noise_std", false, 0.0, 1e3);
  c.integer("period", false, 1, 1000000);
  c.boolean("random_phase");
  c.number("rho", false, 0.0, 0.999);
  c.number("scale_m", false, 1e-3, 1e6);
  c.no_unknown_fields();
}

void check_twin(const json& j, const std::string& path,
                std::vector<std::string>& errors) {
  Checker c{j, path, errors, {}};
  c.integer("window", false, 2, 10000);
  c.integer("conv_kernel", false, 1, 10000);
  c.integer("conv_hidden", false, 1, 10000);
  c.integer("features", false, 1, 10000);
  c.integer("embed", false, 1, 10000);
  c.integer("graph_dim", false, 1, 10000);
  c.integer("attn_dim", false, 1, 10000);
  c.integer("out_dim", false, 1, 10000);
  c.integer("head_hidden", false, 1, 10000);
  c.number("beta", false, 1e-9, 1e6);
  c.number("learning_rate", false, 1e-12, 1e3);
  c.string_choice("optimizer", false, {"sgd", "adam"});
  c.number("demand_scale_mbps", false, 1e-9, 1e6);
  c.boolean("federate");
  c.no_unknown_fields();

  if (j.contains("window") && j.contains("conv_kernel") &&
      j["window"].is_number_integer() && j["conv_kernel"].is_number_integer() &&
      j["conv_kernel"].get<std::int64_t>() > j["window"].get<std::int64_t>()) {
    errors.push_back(path + "/conv_kernel: must not exceed window");
  }
}

void check_agent(const json& j, const std::string& path,
                 std::vector<std::string>& errors) {
  Checker c{j, path, errors, {}};
  c.integer("hidden", false, 1, 100000);
  c.integer("hidden_layers", false, 1, 100);
  c.number("gamma", false, 0.0, 0.9999);
  c.number("nu", false, 1e-9, 1.0);
  c.number("learning_rate", false, 1e-12, 1e3);
  c.string_choice("optimizer", false, {"sgd", "adam"});
  c.number("delta_fraction", false, 1e-9, 1.0);
  c.integer("replay_capacity", false, 1, 10000000);
  c.integer("batch", false, 1, 10000000);
  c.no_unknown_fields();

  if (j.contains("batch") && j.contains("replay_capacity") &&
      j["batch"].is_number_integer() &&
      j["replay_capacity"].is_number_integer() &&
      j["batch"].get<std::int64_t>() >
          j["replay_capacity"].get<std::int64_t>()) {
    errors.push_back(path + "/batch: must not exceed replay_capacity");
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

nn::Optimizer::Kind optimizer_kind(const std::string& name) {
  return name == "adam" ? nn::Optimizer::Kind::Adam : nn::Optimizer::Kind::Sgd;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

std::vector<std::string> validate_scenario_json(const json& j) {
  std::vector<std::string> errors;
  if (!j.is_object()) {
    errors.push_back(": scenario must be a JSON object");
    return errors;
  }
  Checker c{j, "", errors, {}};

  const json* name = c.field("name", true);
  if (name && !name->is_string()) c.fail("/name", "must be a string");

  const json* slices = c.field("slices", true);
  if (slices) {
    if (!slices->is_array() || slices->empty()) {
      c.fail("/slices", "must be a non-empty array");
    } else {
      std::set<std::string> ids;
      for (std::size_t i = 0; i < slices->size(); ++i) {
        const std::string path = "/slices/" + std::to_string(i);
        const json& entry = (*slices)[i];
        if (!entry.is_object()) {
          errors.push_back(path + ": must be an object");
          continue;
        }
        check_slice(entry, path, errors);
        if (entry.contains("id") && entry["id"].is_string()) {
          const auto id = entry["id"].get<std::string>();
          if (!ids.insert(id).second)
            errors.push_back(path + "/id: duplicate slice id '" + id + "'");
        }
      }
    }
  }

  for (const char* key : {"radio", "traffic", "twin", "agent"}) {
    const json* sub = c.field(key, false);
    if (!sub) continue;
    if (!sub->is_object()) {
      c.fail(std::string("/") + key, "must be an object");
      continue;
    }
    const std::string path = std::string("/") + key;
    if (std::string(key) == "radio") check_radio(*sub, path, errors);
    if (std::string(key) == "traffic") check_traffic(*sub, path, errors);
    if (std::string(key) == "twin") check_twin(*sub, path, errors);
    if (std::string(key) == "agent") check_agent(*sub, path, errors);
  }

  c.string_choice("allocator", false,
                  {"dt-mafl", "fl-only", "madqn", "netshare"});
  c.integer("agg_tau", false, 1, 1000000000);
  c.integer("steps", true, 0, 1000000000);
  c.number("demand_norm_mbps", false, 1e-9, 1e9);

  const json* seeds = c.field("seeds", true);
  if (seeds) {
    if (!seeds->is_array() || seeds->empty()) {
      c.fail("/seeds", "must be a non-empty array");
    } else {
      std::set<std::uint64_t> seen_seeds;
      for (std::size_t i = 0; i < seeds->size(); ++i) {
        const std::string path = "/seeds/" + std::to_string(i);
        const json& entry = (*seeds)[i];
        if (!entry.is_number_unsigned() && !entry.is_number_integer()) {
          errors.push_back(path + ": must be a non-negative integer");
          continue;
        }
        if (entry.is_number_integer() && entry.get<std::int64_t>() < 0) {
          errors.push_back(path + ": must be a non-negative integer");
          continue;
        }
        if (!seen_seeds.insert(entry.get<std::uint64_t>()).second)
          errors.push_back(path + ": duplicate seed");
      }
    }
  }

  c.no_unknown_fields();
  return errors;
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.name = j.at("name").get<std::string>();

  if (j.contains("radio")) {
    const json& r = j["radio"];
    read_if(r, "carrier_mhz", s.radio.carrier_mhz);
    read_if(r, "cell_radius_m", s.radio.cell_radius_m);
    read_if(r, "total_rbs", s.radio.total_rbs);
    read_if(r, "rb_bandwidth_hz", s.radio.rb_bandwidth_hz);
    read_if(r, "tx_power_dbm", s.radio.tx_power_dbm);
    read_if(r, "noise_density_dbm_hz", s.radio.noise_density_dbm_hz);
    read_if(r, "shadowing_std_db", s.radio.shadowing_std_db);
    read_if(r, "lambda_weight", s.radio.lambda_weight);
    read_if(r, "mu_weight", s.radio.mu_weight);
    read_if(r, "delay_cap_s", s.radio.delay_cap_s);
    read_if(r, "reference_spectral_efficiency",
            s.radio.reference_spectral_efficiency);
    read_if(r, "kappa", s.radio.kappa);
  }

  for (const json& entry : j.at("slices")) {
    SliceScenario spec;
    spec.id = entry.at("id").get<std::string>();
    spec.kind = entry.at("kind").get<std::string>();
    read_if(entry, "r_min_mbps", spec.r_min_mbps);
    read_if(entry, "tau_max_ms", spec.tau_max_ms);
    read_if(entry, "phi", spec.phi);
    read_if(entry, "device_count", spec.device_count);
    read_if(entry, "lambda_pkts_s", spec.lambda_pkts_s);
    read_if(entry, "packet_bits", spec.packet_bits);
    s.slices.push_back(std::move(spec));
  }

  if (j.contains("traffic")) {
    const json& t = j["traffic"];
    read_if(t, "base_load_mbps", s.traffic.base_load_mbps);
    read_if(t, "amplitude", s.traffic.amplitude);
    read_if(t, "noise_std", s.traffic.noise_std);
    read_if(t, "period", s.traffic.period);
    read_if(t, "random_phase", s.traffic.random_phase);
    read_if(t, "rho", s.traffic.rho);
    read_if(t, "scale_m", s.traffic.scale_m);
  }
  if (j.contains("twin")) {
    const json& t = j["twin"];
    read_if(t, "window", s.twin.window);
    read_if(t, "conv_kernel", s.twin.conv_kernel);
    read_if(t, "conv_hidden", s.twin.conv_hidden);
    read_if(t, "features", s.twin.features);
    read_if(t, "embed", s.twin.embed);
    read_if(t, "graph_dim", s.twin.graph_dim);
    read_if(t, "attn_dim", s.twin.attn_dim);
    read_if(t, "out_dim", s.twin.out_dim);
    read_if(t, "head_hidden", s.twin.head_hidden);
    read_if(t, "beta", s.twin.beta);
    read_if(t, "learning_rate", s.twin.learning_rate);
    read_if(t, "optimizer", s.twin.optimizer);
    read_if(t, "demand_scale_mbps", s.twin.demand_scale_mbps);
    read_if(t, "federate", s.twin.federate);
  }
  if (j.contains("agent")) {
    const json& a = j["agent"];
    read_if(a, "hidden", s.agent.hidden);
    read_if(a, "hidden_layers", s.agent.hidden_layers);
    read_if(a, "gamma", s.agent.gamma);
    read_if(a, "nu", s.agent.nu);
    read_if(a, "learning_rate", s.agent.learning_rate);
    read_if(a, "optimizer", s.agent.optimizer);
    read_if(a, "delta_fraction", s.agent.delta_fraction);
    read_if(a, "replay_capacity", s.agent.replay_capacity);
    read_if(a, "batch", s.agent.batch);
  }

  read_if(j, "allocator", s.allocator);
  read_if(j, "agg_tau", s.agg_tau);
  s.steps = j.at("steps").get<std::uint64_t>();
  s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  read_if(j, "demand_norm_mbps", s.demand_norm_mbps);
  return s;
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["radio"] = {{"carrier_mhz", s.radio.carrier_mhz},
                {"cell_radius_m", s.radio.cell_radius_m},
                {"total_rbs", s.radio.total_rbs},
                {"rb_bandwidth_hz", s.radio.rb_bandwidth_hz},
                {"tx_power_dbm", s.radio.tx_power_dbm},
                {"noise_density_dbm_hz", s.radio.noise_density_dbm_hz},
                {"shadowing_std_db", s.radio.shadowing_std_db},
                {"lambda_weight", s.radio.lambda_weight},
                {"mu_weight", s.radio.mu_weight},
                {"delay_cap_s", s.radio.delay_cap_s},
                {"reference_spectral_efficiency",
                 s.radio.reference_spectral_efficiency},
                {"kappa", s.radio.kappa}};
  j["slices"] = json::array();
  for (const SliceScenario& spec : s.slices) {
    j["slices"].push_back({{"id", spec.id},
                           {"kind", spec.kind},
                           {"r_min_mbps", spec.r_min_mbps},
                           {"tau_max_ms", spec.tau_max_ms},
                           {"phi", spec.phi},
                           {"device_count", spec.device_count},
                           {"lambda_pkts_s", spec.lambda_pkts_s},
                           {"packet_bits", spec.packet_bits}});
  }
  j["traffic"] = {{"base_load_mbps", s.traffic.base_load_mbps},
                  {"amplitude", s.traffic.amplitude},
                  {"noise_std", s.traffic.noise_std},
                  {"period", s.traffic.period},
                  {"random_phase", s.traffic.random_phase},
                  {"rho", s.traffic.rho},
                  {"scale_m", s.traffic.scale_m}};
  j["twin"] = {{"window", s.twin.window},
               {"conv_kernel", s.twin.conv_kernel},
               {"conv_hidden", s.twin.conv_hidden},
               {"features", s.twin.features},
               {"embed", s.twin.embed},
               {"graph_dim", s.twin.graph_dim},
               {"attn_dim", s.twin.attn_dim},
               {"out_dim", s.twin.out_dim},
               {"head_hidden", s.twin.head_hidden},
               {"beta", s.twin.beta},
               {"learning_rate", s.twin.learning_rate},
               {"optimizer", s.twin.optimizer},
               {"demand_scale_mbps", s.twin.demand_scale_mbps},
               {"federate", s.twin.federate}};
  j["agent"] = {{"hidden", s.agent.hidden},
                {"hidden_layers", s.agent.hidden_layers},
                {"gamma", s.agent.gamma},
                {"nu", s.agent.nu},
                {"learning_rate", s.agent.learning_rate},
                {"optimizer", s.agent.optimizer},
                {"delta_fraction", s.agent.delta_fraction},
                {"replay_capacity", s.agent.replay_capacity},
                {"batch", s.agent.batch}};
  j["allocator"] = s.allocator;
  j["agg_tau"] = s.agg_tau;
  j["steps"] = s.steps;
  j["seeds"] = s.seeds;
  j["demand_norm_mbps"] = s.demand_norm_mbps;
  return j;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({": cannot open scenario file '" + path + "'"});
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ScenarioError({std::string(": JSON parse error: ") + e.what()});
  }
  std::vector<std::string> errors = validate_scenario_json(j);
  if (!errors.empty()) throw ScenarioError(std::move(errors));
  return scenario_from_json(j);
}

Scenario with_device_count(Scenario s, std::size_t devices) {
  for (SliceScenario& spec : s.slices) spec.device_count = devices;
  return s;
}

radio::SliceSpec to_slice_spec(const SliceScenario& s) {
  radio::SliceSpec spec;
  spec.id = s.id;
  const bool delay = s.kind == "delay";
  spec.kind =
      delay ? radio::SliceKind::DelayConstrained : radio::SliceKind::RateConstrained;
  // Only the contract matching the kind survives; the other scenario field is
  // a dormant default. Steepness is stated per Mb/s (rate) or per ms (delay)
  // while the utility works in bps and seconds.
  spec.r_min_bps = delay ? 0.0 : s.r_min_mbps * 1e6;
  spec.tau_max_s = delay ? s.tau_max_ms / 1e3 : 0.0;
  spec.phi = delay ? s.phi * 1e3 : s.phi * 1e-6;
  spec.device_count = s.device_count;
  spec.lambda_pkts_s = s.lambda_pkts_s;
  spec.packet_bits = s.packet_bits;
  return spec;
}

twin::TwinConfig to_twin_config(const TwinParams& p, std::size_t nodes) {
  twin::TwinConfig cfg;
  cfg.nodes = nodes;
  cfg.window = p.window;
  cfg.conv_kernel = p.conv_kernel;
  cfg.conv_hidden = p.conv_hidden;
  cfg.features = p.features;
  cfg.embed = p.embed;
  cfg.graph_dim = p.graph_dim;
  cfg.attn_dim = p.attn_dim;
  cfg.out_dim = p.out_dim;
  cfg.head_hidden = p.head_hidden;
  cfg.beta = p.beta;
  cfg.learning_rate = p.learning_rate;
  cfg.optimizer = optimizer_kind(p.optimizer);
  return cfg;
}

marl::DdpgConfig to_ddpg_config(const AgentParams& p) {
  marl::DdpgConfig cfg;
  cfg.hidden = p.hidden;
  cfg.hidden_layers = p.hidden_layers;
  cfg.gamma = p.gamma;
  cfg.nu = p.nu;
  cfg.learning_rate = p.learning_rate;
  cfg.optimizer = optimizer_kind(p.optimizer);
  cfg.delta_fraction = p.delta_fraction;
  return cfg;
}

alloc::DqnConfig to_dqn_config(const AgentParams& p) {
  alloc::DqnConfig cfg;
  cfg.hidden = p.hidden;
  cfg.gamma = p.gamma;
  cfg.learning_rate = p.learning_rate;
  cfg.optimizer = optimizer_kind(p.optimizer);
  return cfg;
}

}  // namespace slicesim::exp
