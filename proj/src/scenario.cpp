#include "deds/scenario.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "json.hpp"

namespace deds {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

std::size_t as_count(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return j.get<std::size_t>();
  throw ConfigError(path, "expected a non-negative integer");
}

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& item : j_.items())
      if (!ok.count(item.key())) throw ConfigError(join(path_, item.key()), "unknown key");
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string path(const char* key) const { return join(path_, key); }

  const json& at(const char* key) const {
    if (!j_.contains(key)) throw ConfigError(path(key), "missing required field");
    return j_.at(key);
  }

  Reader child(const char* key) const { return Reader(at(key), path(key)); }

  double number(const char* key) const { return as_number(at(key), path(key)); }
  double number(const char* key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::size_t count(const char* key) const { return as_count(at(key), path(key)); }
  std::size_t count(const char* key, std::size_t fallback) const {
    return has(key) ? count(key) : fallback;
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) throw ConfigError(path(key), "expected true or false");
    return at(key).get<bool>();
  }
  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_string()) throw ConfigError(path(key), "expected a string");
    return at(key).get<std::string>();
  }

 private:
  const json& j_;
  std::string path_;
};

std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], index_path(path, i)));
  return out;
}

UnitSlotArray unit_slot_array(const json& j, const std::string& path, std::size_t n,
                              std::size_t h) {
  if (!j.is_array() || j.size() != n)
    throw ConfigError(path, "expected " + std::to_string(n) + " rows (one per unit)");
  UnitSlotArray out(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = number_list(j[i], index_path(path, i));
    if (row.size() != h)
      throw ConfigError(index_path(path, i), "expected " + std::to_string(h) + " entries (one per slot)");
    for (std::size_t k = 0; k < h; ++k) out(i, k) = row[k];
  }
  return out;
}

QuadraticCost parse_cost(const json& j, const std::string& path) {
  Reader r(j, path);
  r.allow({"a", "b", "c"});
  return {r.number("a"), r.number("b"), r.number("c")};
}

template <class Enum>
Enum parse_enum(const Reader& r, const char* key, Enum fallback,
                std::initializer_list<std::pair<const char*, Enum>> names) {
  if (!r.has(key)) return fallback;
  const std::string s = r.string(key, "");
  std::string allowed;
  for (const auto& [name, value] : names) {
    if (s == name) return value;
    allowed += allowed.empty() ? name : std::string("|") + name;
  }
  throw ConfigError(r.path(key), "expected one of " + allowed + ", got \"" + s + "\"");
}

template <class Enum>
const char* enum_name(Enum value, std::initializer_list<std::pair<const char*, Enum>> names) {
  for (const auto& [name, v] : names)
    if (v == value) return name;
  return "?";
}

const std::initializer_list<std::pair<const char*, RunMode>> kModes = {
    {"monolithic", RunMode::monolithic},
    {"agents", RunMode::agents},
    {"oracle", RunMode::oracle},
    {"validate", RunMode::validate}};
const std::initializer_list<std::pair<const char*, StepMethod>> kMethods = {
    {"euler", StepMethod::euler}, {"rk4", StepMethod::rk4}};
const std::initializer_list<std::pair<const char*, ExecPolicy>> kPolicies = {
    {"serial", ExecPolicy::serial}, {"parallel", ExecPolicy::parallel}};

GraphSection parse_graph(const Reader& r) {
  r.allow({"vertices", "edges"});
  GraphSection g;
  g.vertices = r.count("vertices");
  const json& edges = r.at("edges");
  if (!edges.is_array()) throw ConfigError(r.path("edges"), "expected an array of [from, to, weight]");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string p = index_path(r.path("edges"), e);
    const json& item = edges[e];
    if (!item.is_array() || item.size() < 2 || item.size() > 3)
      throw ConfigError(p, "expected [from, to] or [from, to, weight]");
    Edge edge;
    edge.from = as_count(item[0], index_path(p, 0));
    edge.to = as_count(item[1], index_path(p, 1));
    edge.weight = item.size() == 3 ? as_number(item[2], index_path(p, 2)) : 1.0;
    g.edges.push_back(edge);
  }
  try {
    (void)build_digraph(g.vertices, g.edges);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.path("edges"), e.what());
  }
  return g;
}

InstanceSpec parse_instance(const Reader& r) {
  r.allow({"horizon", "anchor_unit", "external_load", "bus_loads", "units"});
  InstanceSpec spec;
  spec.horizon = r.count("horizon");
  if (spec.horizon == 0) throw ConfigError(r.path("horizon"), "must be at least 1");
  const std::size_t h = spec.horizon;

  const json& units = r.at("units");
  if (!units.is_array() || units.empty())
    throw ConfigError(r.path("units"), "expected a non-empty array of units");
  for (std::size_t i = 0; i < units.size(); ++i) {
    const std::string p = index_path(r.path("units"), i);
    Reader u(units[i], p);
    u.allow({"cost", "p_min", "p_max", "ramp_down", "ramp_up", "cap_min", "cap_max", "s_initial",
             "has_storage", "injection_min"});
    UnitProblem up;
    const json& cost = u.at("cost");
    if (cost.is_object()) {
      up.cost.assign(h, parse_cost(cost, u.path("cost")));
    } else if (cost.is_array()) {
      if (cost.size() != h) throw ConfigError(u.path("cost"), "expected one cost per slot");
      for (std::size_t k = 0; k < h; ++k) up.cost.push_back(parse_cost(cost[k], index_path(u.path("cost"), k)));
    } else {
      throw ConfigError(u.path("cost"), "expected {a, b, c} or an array of them");
    }
    up.p_min = u.number("p_min");
    up.p_max = u.number("p_max");
    up.ramp_down = u.number("ramp_down");
    up.ramp_up = u.number("ramp_up");
    up.has_storage = u.boolean("has_storage", true);
    if (up.has_storage) {
      up.cap_min = u.number("cap_min");
      up.cap_max = u.number("cap_max");
      up.s_initial = u.number("s_initial");
    } else {
      up.cap_min = u.number("cap_min", 0.0);
      up.cap_max = u.number("cap_max", 0.0);
      up.s_initial = u.number("s_initial", 0.0);
    }
    up.injection_min = u.number("injection_min", 0.0);
    spec.units.push_back(std::move(up));
  }
  const std::size_t n = spec.units.size();

  spec.external_load = number_list(r.at("external_load"), r.path("external_load"));
  if (spec.external_load.size() != h)
    throw ConfigError(r.path("external_load"), "expected one entry per slot");
  spec.bus_loads = r.has("bus_loads") ? unit_slot_array(r.at("bus_loads"), r.path("bus_loads"), n, h)
                                      : UnitSlotArray(n, h);
  const std::size_t anchor = r.count("anchor_unit", 1);
  if (anchor < 1 || anchor > n)
    throw ConfigError(r.path("anchor_unit"), "must be a unit id in 1.." + std::to_string(n));
  spec.anchor_unit = anchor - 1;
  return spec;
}

GainParameters parse_gains(const Reader& r) {
  r.allow({"alpha", "beta", "nu1", "nu2", "eps"});
  GainParameters g{r.number("alpha"), r.number("beta"), r.number("nu1"), r.number("nu2"),
                   r.number("eps")};
  auto positive = [&](const char* key, double x) {
    if (!(x > 0.0)) throw ConfigError(r.path(key), "must be positive (got " + std::to_string(x) + ")");
  };
  positive("alpha", g.alpha);
  positive("beta", g.beta);
  positive("nu1", g.nu1);
  positive("nu2", g.nu2);
  positive("eps", g.eps);
  return g;
}

InitialSpec parse_initial(const Reader& r, std::size_t n, std::size_t h) {
  r.allow({"injection_pattern", "injection", "storage", "z", "v"});
  InitialSpec s;
  if (r.has("injection_pattern")) {
    if (r.has("injection"))
      throw ConfigError(r.path("injection"), "give either injection or injection_pattern");
    const json& pat = r.at("injection_pattern");
    if (!pat.is_array() || pat.size() != h)
      throw ConfigError(r.path("injection_pattern"), "expected one of \"min\"/\"max\" per slot");
    std::vector<BoundChoice> choices;
    for (std::size_t k = 0; k < h; ++k) {
      const std::string p = index_path(r.path("injection_pattern"), k);
      if (pat[k] == "min") choices.push_back(BoundChoice::p_min);
      else if (pat[k] == "max") choices.push_back(BoundChoice::p_max);
      else throw ConfigError(p, "expected \"min\" or \"max\"");
    }
    s.injection_pattern = std::move(choices);
  }
  if (r.has("injection")) s.injection = unit_slot_array(r.at("injection"), r.path("injection"), n, h);
  if (r.has("storage")) s.storage = unit_slot_array(r.at("storage"), r.path("storage"), n, h);
  if (r.has("z")) s.z = unit_slot_array(r.at("z"), r.path("z"), n, h);
  if (r.has("v")) s.v = unit_slot_array(r.at("v"), r.path("v"), n, h);
  return s;
}

RunSection parse_run(const Reader& r, std::size_t n, std::size_t h) {
  r.allow({"mode", "method", "policy", "dt", "t_final", "sample_every", "output_dir", "initial",
           "anti_chatter", "override_gain_check", "emit_full_state", "use_stop_rule",
           "stop_tolerance", "stop_window", "slater_rho", "oracle_max_iters"});
  RunSection run;
  run.mode = parse_enum(r, "mode", run.mode, kModes);
  run.method = parse_enum(r, "method", run.method, kMethods);
  run.policy = parse_enum(r, "policy", run.policy, kPolicies);
  run.dt = r.number("dt", run.dt);
  run.t_final = r.number("t_final", run.t_final);
  run.sample_every = r.number("sample_every", run.sample_every);
  run.output_dir = r.string("output_dir", run.output_dir);
  if (r.has("initial")) run.initial = parse_initial(r.child("initial"), n, h);
  run.anti_chatter = r.boolean("anti_chatter", run.anti_chatter);
  run.override_gain_check = r.boolean("override_gain_check", run.override_gain_check);
  run.emit_full_state = r.boolean("emit_full_state", run.emit_full_state);
  run.use_stop_rule = r.boolean("use_stop_rule", run.use_stop_rule);
  run.stop_tolerance = r.number("stop_tolerance", run.stop_tolerance);
  run.stop_window = r.count("stop_window", run.stop_window);
  if (r.has("slater_rho")) run.slater_rho = r.number("slater_rho");
  run.oracle_max_iters = r.count("oracle_max_iters", run.oracle_max_iters);

  if (!(run.dt > 0.0)) throw ConfigError(r.path("dt"), "must be positive");
  if (!(run.t_final > 0.0)) throw ConfigError(r.path("t_final"), "must be positive");
  if (!(run.sample_every > 0.0)) throw ConfigError(r.path("sample_every"), "must be positive");
  if (!(run.stop_tolerance > 0.0)) throw ConfigError(r.path("stop_tolerance"), "must be positive");
  if (run.stop_window == 0) throw ConfigError(r.path("stop_window"), "must be at least 1");
  if (run.slater_rho && !(*run.slater_rho > 0.0))
    throw ConfigError(r.path("slater_rho"), "must be positive");
  if (run.output_dir.empty()) throw ConfigError(r.path("output_dir"), "must not be empty");
  return run;
}

ScenarioConfig from_json(const json& root) {
  if (root.is_null() || (root.is_object() && root.empty()))
    throw ConfigError("", "config is empty; required sections: graph, instance, gains (run is optional)");
  Reader r(root, "");
  r.allow({"name", "graph", "instance", "gains", "run"});
  for (const char* section : {"graph", "instance", "gains"})
    if (!r.has(section)) throw ConfigError(section, "missing required section (required: graph, instance, gains)");

  ScenarioConfig cfg;
  cfg.name = r.string("name", "");
  cfg.graph = parse_graph(r.child("graph"));
  cfg.instance = parse_instance(r.child("instance"));
  cfg.gains = parse_gains(r.child("gains"));
  const std::size_t n = cfg.instance.units.size();
  if (cfg.graph.vertices != n)
    throw ConfigError("graph.vertices", "must equal the number of units (" + std::to_string(n) + ")");
  try {
    (void)DedsInstance(cfg.instance);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("instance", e.what());
  }
  if (r.has("run")) cfg.run = parse_run(r.child("run"), n, cfg.instance.horizon);
  return cfg;
}

ojson array_json(const UnitSlotArray& a) {
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < a.units(); ++i) {
    ojson row = ojson::array();
    for (double x : a.row(i)) row.push_back(x);
    rows.push_back(std::move(row));
  }
  return rows;
}

ojson cost_json(const QuadraticCost& c) { return ojson{{"a", c.a}, {"b", c.b}, {"c", c.c}}; }

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = text.find_first_not_of(" \t\r\n") == std::string::npos ? json() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("JSON syntax error at byte ") + std::to_string(e.byte) + ": " +
                              e.what());
  }
  return from_json(root);
}

ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
  ojson root;
  root["name"] = cfg.name;

  ojson edges = ojson::array();
  for (const auto& e : cfg.graph.edges) edges.push_back(ojson::array({e.from, e.to, e.weight}));
  root["graph"] = ojson{{"vertices", cfg.graph.vertices}, {"edges", edges}};

  const InstanceSpec& s = cfg.instance;
  ojson units = ojson::array();
  for (const auto& u : s.units) {
    ojson ju;
    const bool constant = std::all_of(u.cost.begin(), u.cost.end(),
                                      [&](const QuadraticCost& c) { return c == u.cost.front(); });
    if (constant && !u.cost.empty()) {
      ju["cost"] = cost_json(u.cost.front());
    } else {
      ojson per_slot = ojson::array();
      for (const auto& c : u.cost) per_slot.push_back(cost_json(c));
      ju["cost"] = per_slot;
    }
    ju["p_min"] = u.p_min;
    ju["p_max"] = u.p_max;
    ju["ramp_down"] = u.ramp_down;
    ju["ramp_up"] = u.ramp_up;
    ju["cap_min"] = u.cap_min;
    ju["cap_max"] = u.cap_max;
    ju["s_initial"] = u.s_initial;
    ju["has_storage"] = u.has_storage;
    if (u.injection_min != 0.0) ju["injection_min"] = u.injection_min;
    units.push_back(std::move(ju));
  }
  root["instance"] = ojson{{"horizon", s.horizon},
                           {"anchor_unit", s.anchor_unit + 1},
                           {"external_load", s.external_load},
                           {"bus_loads", array_json(s.bus_loads)},
                           {"units", units}};

  const auto& g = cfg.gains;
  root["gains"] = ojson{{"alpha", g.alpha}, {"beta", g.beta}, {"nu1", g.nu1}, {"nu2", g.nu2}, {"eps", g.eps}};

  const RunSection& r = cfg.run;
  ojson run;
  run["mode"] = enum_name(r.mode, kModes);
  run["method"] = enum_name(r.method, kMethods);
  run["policy"] = enum_name(r.policy, kPolicies);
  run["dt"] = r.dt;
  run["t_final"] = r.t_final;
  run["sample_every"] = r.sample_every;
  run["output_dir"] = r.output_dir;
  ojson init = ojson::object();
  if (r.initial.injection_pattern) {
    ojson pat = ojson::array();
    for (auto c : *r.initial.injection_pattern) pat.push_back(c == BoundChoice::p_max ? "max" : "min");
    init["injection_pattern"] = pat;
  }
  if (r.initial.injection) init["injection"] = array_json(*r.initial.injection);
  if (r.initial.storage) init["storage"] = array_json(*r.initial.storage);
  if (r.initial.z) init["z"] = array_json(*r.initial.z);
  if (r.initial.v) init["v"] = array_json(*r.initial.v);
  run["initial"] = init;
  run["anti_chatter"] = r.anti_chatter;
  run["override_gain_check"] = r.override_gain_check;
  run["emit_full_state"] = r.emit_full_state;
  run["use_stop_rule"] = r.use_stop_rule;
  run["stop_tolerance"] = r.stop_tolerance;
  run["stop_window"] = r.stop_window;
  if (r.slater_rho) run["slater_rho"] = *r.slater_rho;
  run["oracle_max_iters"] = r.oracle_max_iters;
  root["run"] = run;
  return root.dump(2) + "\n";
}

std::vector<std::string> builtin_scenario_names() { return {"new-england-10"}; }

namespace {

struct TableRow {
  double a, b, c, p_min, p_max, ramp_down, ramp_up;
};

// 39-bus New England derived generator data.
constexpr TableRow kNewEngland[10] = {
    {240, 7.0, 0.0070, 0, 1040, 120, 80}, {200, 10.0, 0.0095, 0, 646, 90, 50},
    {220, 8.5, 0.0090, 0, 725, 100, 65},  {200, 11.0, 0.0090, 0, 652, 90, 50},
    {220, 10.5, 0.0080, 0, 508, 90, 50},  {190, 12.0, 0.0075, 0, 687, 90, 50},
    {200, 10.0, 0.0100, 0, 580, 120, 80}, {170, 9.0, 0.0090, 0, 564, 90, 50},
    {190, 11.0, 0.0072, 0, 865, 100, 65}, {220, 8.8, 0.0080, 0, 1100, 90, 50}};

ScenarioConfig new_england_10() {
  constexpr std::size_t n = 10;
  constexpr std::size_t h = 6;
  ScenarioConfig cfg;
  cfg.name = "new-england-10";

  cfg.graph.vertices = n;
  for (std::size_t i = 1; i <= n; ++i) cfg.graph.edges.push_back({i, i % n + 1, 1.0});
  for (std::size_t i = 1; i <= 4; ++i) {
    cfg.graph.edges.push_back({i, i + 4, 1.0});
    cfg.graph.edges.push_back({i + 4, i, 1.0});
  }

  InstanceSpec& s = cfg.instance;
  s.horizon = h;
  s.external_load = {1950, 1980, 2700, 2370, 1900, 1850};
  s.bus_loads = UnitSlotArray(n, h);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < h; ++k) s.bus_loads(i, k) = 10.0 * static_cast<double>(i + 1);
  s.anchor_unit = 0;
  for (const auto& row : kNewEngland) {
    UnitProblem u;
    u.cost.assign(h, {row.a, row.b, row.c});
    u.p_min = row.p_min;
    u.p_max = row.p_max;
    u.ramp_down = row.ramp_down;
    u.ramp_up = row.ramp_up;
    u.cap_min = 5.0;
    u.cap_max = 100.0;
    u.s_initial = 5.0;
    s.units.push_back(u);
  }

  cfg.gains = {4.0, 10.0, 0.65, 0.65, 0.007};

  RunSection& r = cfg.run;
  r.dt = 1e-3;
  r.t_final = 2000.0;
  r.sample_every = 1.0;
  r.output_dir = "new-england-10-out";
  using B = BoundChoice;
  r.initial.injection_pattern = std::vector<B>{B::p_max, B::p_max, B::p_min, B::p_min, B::p_max, B::p_min};
  r.slater_rho = 0.25;
  return cfg;
}

}  // namespace

ScenarioConfig builtin_scenario(const std::string& name) {
  if (name == "new-england-10") return new_england_10();
  std::string known;
  for (const auto& k : builtin_scenario_names()) known += (known.empty() ? "" : ", ") + k;
  throw ConfigError("", "unknown builtin scenario \"" + name + "\" (known: " + known + ")");
}

NetworkState initial_state(const ScenarioConfig& cfg, const DedsInstance& inst) {
  const InitialSpec& s = cfg.run.initial;
  NetworkState out(inst.units(), inst.horizon());
  if (s.injection_pattern) out = bound_pattern_state(inst, *s.injection_pattern);
  if (s.injection) out.injection = *s.injection;
  if (s.storage) out.storage = *s.storage;
  if (s.z) out.z = *s.z;
  if (s.v) out.v = *s.v;
  require_shape(inst, out);
  return out;
}

}  // namespace deds
