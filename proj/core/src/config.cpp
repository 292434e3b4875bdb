#include "trustfed/config.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace trustfed {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix,
                    std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* name : allowed)
      if (it.key() == name) {
        known = true;
        break;
      }
    if (!known) bad(join(prefix, it.key()), "unknown key");
  }
}

const json* field(const json& obj, const char* key,
                  bool* was_null = nullptr) {
  if (!obj.contains(key)) return nullptr;
  const json& v = obj.at(key);
  if (v.is_null()) {
    if (was_null) *was_null = true;
    return nullptr;
  }
  return &v;
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, std::string("expected a number, got ") + v.type_name());
  return v.get<double>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i < 0) bad(path, "must not be negative");
    return static_cast<std::uint64_t>(i);
  }
  bad(path, std::string("expected an integer, got ") + v.type_name());
}

std::uint32_t as_u32(const json& v, const std::string& path) {
  const std::uint64_t wide = as_u64(v, path);
  if (wide > std::numeric_limits<std::uint32_t>::max())
    bad(path, "value is too large");
  return static_cast<std::uint32_t>(wide);
}

int as_positive_int(const json& v, const std::string& path) {
  const std::uint64_t wide = as_u64(v, path);
  if (wide == 0 || wide > std::numeric_limits<int>::max())
    bad(path, "must be a positive integer");
  return static_cast<int>(wide);
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, std::string("expected a string, got ") + v.type_name());
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean())
    bad(path, std::string("expected a boolean, got ") + v.type_name());
  return v.get<bool>();
}

TopologySpec topology_from_json(const json& obj) {
  const std::string prefix = "topology";
  if (!obj.is_object()) bad(prefix, "expected an object");
  reject_unknown(obj, prefix,
                 {"generator", "clients", "byzantine", "byzantine_ids",
                  "edges", "seed_labels"});
  TopologySpec spec;
  if (const json* v = field(obj, "generator")) {
    const std::string name = as_string(*v, "topology.generator");
    if (name == "complete")
      spec.generator = GraphKind::Complete;
    else if (name == "ring")
      spec.generator = GraphKind::Ring;
    else if (name == "custom")
      spec.generator = GraphKind::Custom;
    else
      bad("topology.generator", "unknown generator '" + name + "'");
  }
  if (const json* v = field(obj, "clients"))
    spec.num_clients = as_u32(*v, "topology.clients");
  if (const json* v = field(obj, "byzantine"))
    spec.num_byzantine = as_u32(*v, "topology.byzantine");
  if (const json* v = field(obj, "byzantine_ids")) {
    if (!v->is_array()) bad("topology.byzantine_ids", "expected an array");
    std::vector<ClientId> ids;
    ids.reserve(v->size());
    for (const json& e : *v) ids.push_back(as_u32(e, "topology.byzantine_ids"));
    spec.byzantine_ids = std::move(ids);
  }
  if (const json* v = field(obj, "edges")) {
    if (!v->is_array()) bad("topology.edges", "expected an array of pairs");
    for (const json& e : *v) {
      if (!e.is_array() || e.size() != 2)
        bad("topology.edges", "each edge must be a [from, to] pair");
      spec.edges.emplace_back(as_u32(e[0], "topology.edges"),
                              as_u32(e[1], "topology.edges"));
    }
  }
  if (const json* v = field(obj, "seed_labels")) {
    if (!v->is_array()) bad("topology.seed_labels", "expected an array");
    for (const json& e : *v)
      spec.seed_labels.push_back(as_u64(e, "topology.seed_labels"));
  }
  return spec;
}

json topology_to_json(const TopologySpec& spec) {
  json obj;
  switch (spec.generator) {
    case GraphKind::Complete: obj["generator"] = "complete"; break;
    case GraphKind::Ring: obj["generator"] = "ring"; break;
    case GraphKind::Custom: obj["generator"] = "custom"; break;
  }
  obj["clients"] = spec.num_clients;
  obj["byzantine"] = spec.num_byzantine;
  if (spec.byzantine_ids) obj["byzantine_ids"] = *spec.byzantine_ids;
  if (!spec.edges.empty()) {
    json edges = json::array();
    for (auto [a, b] : spec.edges) edges.push_back(json::array({a, b}));
    obj["edges"] = std::move(edges);
  }
  if (!spec.seed_labels.empty()) obj["seed_labels"] = spec.seed_labels;
  return obj;
}

}  // namespace

SimConfig default_config() { return SimConfig{}; }

SimConfig config_from_json(const json& j) {
  if (!j.is_object()) bad("", "the top level must be an object");
  reject_unknown(j, "",
                 {"topology", "trust", "task", "constraint", "algorithm",
                  "variant", "attack", "realizations", "seed", "workers",
                  "comparator"});

  SimConfig config;
  if (const json* v = field(j, "topology"))
    config.topology = topology_from_json(*v);

  if (const json* v = field(j, "trust")) {
    if (!v->is_object()) bad("trust", "expected an object");
    reject_unknown(*v, "trust", {"mean_honest", "mean_byzantine", "spread"});
    if (const json* f = field(*v, "mean_honest"))
      config.trust.mean_honest = as_double(*f, "trust.mean_honest");
    if (const json* f = field(*v, "mean_byzantine"))
      config.trust.mean_byzantine = as_double(*f, "trust.mean_byzantine");
    if (const json* f = field(*v, "spread"))
      config.trust.spread = as_double(*f, "trust.spread");
  }

  if (const json* v = field(j, "task")) {
    if (!v->is_object()) bad("task", "expected an object");
    reject_unknown(*v, "task",
                   {"dimension", "label_noise", "drift_rate", "heterogeneity"});
    if (const json* f = field(*v, "dimension"))
      config.task.dimension = as_positive_int(*f, "task.dimension");
    if (const json* f = field(*v, "label_noise"))
      config.task.label_noise = as_double(*f, "task.label_noise");
    if (const json* f = field(*v, "drift_rate"))
      config.task.drift_rate = as_double(*f, "task.drift_rate");
    if (const json* f = field(*v, "heterogeneity"))
      config.task.heterogeneity = as_double(*f, "task.heterogeneity");
  }

  if (const json* v = field(j, "constraint")) {
    if (!v->is_object()) bad("constraint", "expected an object");
    reject_unknown(*v, "constraint", {"kappa"});
    if (const json* f = field(*v, "kappa"))
      config.constraint.kappa = as_double(*f, "constraint.kappa");
  }

  if (const json* v = field(j, "algorithm")) {
    if (!v->is_object()) bad("algorithm", "expected an object");
    reject_unknown(*v, "algorithm",
                   {"horizon", "radius", "stepsize_scale", "eta", "delta",
                    "clip_inbox"});
    if (const json* f = field(*v, "horizon"))
      config.horizon = as_u32(*f, "algorithm.horizon");
    if (const json* f = field(*v, "radius"))
      config.radius = as_double(*f, "algorithm.radius");
    if (const json* f = field(*v, "stepsize_scale"))
      config.stepsize_scale = as_double(*f, "algorithm.stepsize_scale");
    if (const json* f = field(*v, "eta"))
      config.eta = as_double(*f, "algorithm.eta");
    if (const json* f = field(*v, "delta"))
      config.delta = as_double(*f, "algorithm.delta");
    if (const json* f = field(*v, "clip_inbox"))
      config.clip_inbox = as_bool(*f, "algorithm.clip_inbox");
  }

  if (const json* v = field(j, "variant"))
    config.variant = parse_variant(as_string(*v, "variant"));

  if (const json* v = field(j, "attack")) {
    if (!v->is_object()) bad("attack", "expected an object");
    reject_unknown(*v, "attack", {"kind", "magnitude"});
    if (const json* f = field(*v, "kind"))
      config.attack_kind = parse_attack_kind(as_string(*f, "attack.kind"));
    if (const json* f = field(*v, "magnitude"))
      config.attack_magnitude = as_double(*f, "attack.magnitude");
  }

  if (const json* v = field(j, "realizations"))
    config.realizations = as_u32(*v, "realizations");
  if (const json* v = field(j, "seed")) config.seed = as_u64(*v, "seed");
  if (const json* v = field(j, "workers"))
    config.workers = as_u32(*v, "workers");

  if (const json* v = field(j, "comparator")) {
    if (!v->is_object()) bad("comparator", "expected an object");
    reject_unknown(*v, "comparator", {"tolerance", "max_iterations"});
    if (const json* f = field(*v, "tolerance"))
      config.comparator.tolerance = as_double(*f, "comparator.tolerance");
    if (const json* f = field(*v, "max_iterations"))
      config.comparator.max_iterations =
          as_u64(*f, "comparator.max_iterations");
  }
  return config;
}

json config_to_json(const SimConfig& config) {
  json j;
  j["topology"] = topology_to_json(config.topology);
  j["trust"] = {{"mean_honest", config.trust.mean_honest},
                {"mean_byzantine", config.trust.mean_byzantine},
                {"spread", config.trust.spread}};
  j["task"] = {{"dimension", config.task.dimension},
               {"label_noise", config.task.label_noise},
               {"drift_rate", config.task.drift_rate},
               {"heterogeneity", config.task.heterogeneity}};
  j["constraint"] = {{"kappa", config.constraint.kappa}};
  json algorithm = {{"horizon", config.horizon},
                    {"radius", config.radius},
                    {"stepsize_scale", config.stepsize_scale},
                    {"clip_inbox", config.clip_inbox}};
  if (config.eta) algorithm["eta"] = *config.eta;
  if (config.delta) algorithm["delta"] = *config.delta;
  j["algorithm"] = std::move(algorithm);
  j["variant"] = to_string(config.variant);
  json attack = {{"kind", to_string(config.attack_kind)}};
  if (config.attack_magnitude) attack["magnitude"] = *config.attack_magnitude;
  j["attack"] = std::move(attack);
  j["realizations"] = config.realizations;
  j["seed"] = config.seed;
  j["workers"] = config.workers;
  j["comparator"] = {{"tolerance", config.comparator.tolerance},
                     {"max_iterations", config.comparator.max_iterations}};
  return j;
}

void apply_override(SimConfig& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override: expected key.path=value, got '" +
                                assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;  // bare strings need no quotes

  json j = config_to_json(config);
  json* node = &j;
  std::string walked;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot - start);
    if (part.empty())
      throw std::invalid_argument("override: malformed key path '" + path +
                                  "'");
    walked = join(walked, part);
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      break;
    }
    if (node->contains(part) && !(*node)[part].is_object())
      throw std::invalid_argument("override: '" + walked +
                                  "' is not an object");
    node = &(*node)[part];
    start = dot + 1;
  }
  config = config_from_json(j);
}

SimConfig parse_config(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("config: cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  bool blank = true;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) {
      blank = false;
      break;
    }

  SimConfig config;
  if (!blank) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded())
      throw std::invalid_argument("config: '" + path.string() +
                                  "' is not valid JSON");
    config = config_from_json(j);
  }
  for (const std::string& assignment : overrides)
    apply_override(config, assignment);
  config.validate();
  return config;
}

}  // namespace trustfed
