#include <algorithm>
#include <fstream>
#include <sstream>

#include "dps/cli.hpp"
#include "dps/errors.hpp"

namespace dps::cli {

using nlohmann::json;

namespace {

constexpr std::pair<Mode, std::string_view> kModeNames[] = {
    {Mode::Compare, "compare"},   {Mode::Metrics, "metrics"},
    {Mode::Simulate, "simulate"}, {Mode::Hte, "hte"},
    {Mode::ExactNe, "exact-ne"},  {Mode::ClassNe, "class-ne"},
    {Mode::ClassHte, "class-hte"}, {Mode::Limiting, "limiting"},
    {Mode::Network, "network"},   {Mode::DivergenceProbe, "divergence-probe"},
};

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw ConfigError("unknown key '" + item.key() + "' in " + std::string(where));
  }
}

SystemParams parse_system(const json& obj) {
  check_keys(obj, "system", {"arrival_rates", "cost_rates", "service_rate", "load", "alpha"});
  auto lambda = obj.at("arrival_rates").get<std::vector<double>>();
  auto cost = obj.at("cost_rates").get<std::vector<double>>();
  const double alpha = get_or(obj, "alpha", 1.0);
  const bool has_mu = obj.contains("service_rate");
  const bool has_rho = obj.contains("load");
  if (has_mu == has_rho) throw ConfigError("system needs exactly one of service_rate and load");
  if (has_mu) return SystemParams(std::move(lambda), std::move(cost), obj.at("service_rate").get<double>(), alpha);
  return SystemParams::with_load(std::move(lambda), std::move(cost), obj.at("load").get<double>(), alpha);
}

SamplingSpec parse_sampling(const json& obj) {
  check_keys(obj, "sampling",
             {"num_classes", "cost_offset", "arrival_offset", "cost_width", "arrival_width", "alpha",
              "load"});
  SamplingSpec s;
  s.num_classes = get_or(obj, "num_classes", s.num_classes);
  s.cost_offset = get_or(obj, "cost_offset", s.cost_offset);
  s.arrival_offset = get_or(obj, "arrival_offset", s.arrival_offset);
  s.cost_width = get_or(obj, "cost_width", s.cost_width);
  s.arrival_width = get_or(obj, "arrival_width", s.arrival_width);
  s.alpha = get_or(obj, "alpha", s.alpha);
  s.load = get_or(obj, "load", s.load);
  if (s.num_classes == 0) throw ConfigError("sampling.num_classes must be positive");
  if (!(s.cost_offset > 0.0) || !(s.arrival_offset > 0.0))
    throw ConfigError("sampling offsets must be positive");
  if (!(s.cost_width >= 0.0) || !(s.arrival_width >= 0.0))
    throw ConfigError("sampling widths must be non-negative");
  if (!(s.alpha > 0.0)) throw ConfigError("sampling.alpha must be positive");
  if (!(s.load > 0.0 && s.load < 1.0)) throw ConfigError("sampling.load must lie in (0, 1)");
  return s;
}

template <class T>
std::vector<T> axis(const json& obj, const char* key) {
  if (!obj.contains(key)) return {};
  auto values = obj.at(key).get<std::vector<T>>();
  if (values.empty()) throw ConfigError(std::string("sweep axis '") + key + "' is empty");
  return values;
}

SweepAxes parse_sweep(const json& obj) {
  check_keys(obj, "sweep", {"num_classes", "cost_offset", "arrival_offset", "alpha", "load"});
  return SweepAxes{axis<std::size_t>(obj, "num_classes"), axis<double>(obj, "cost_offset"),
                   axis<double>(obj, "arrival_offset"), axis<double>(obj, "alpha"),
                   axis<double>(obj, "load")};
}

SolverConfig parse_solver(const json& obj) {
  check_keys(obj, "solver",
             {"br_tolerance", "max_iterations", "bracket", "inner_tolerance", "damping",
              "multistart_count"});
  SolverConfig c;
  c.br_tolerance = get_or(obj, "br_tolerance", c.br_tolerance);
  c.max_iterations = get_or(obj, "max_iterations", c.max_iterations);
  if (obj.contains("bracket")) {
    const auto b = obj.at("bracket").get<std::vector<double>>();
    if (b.size() != 2) throw ConfigError("solver.bracket must have two entries");
    c.bracket_lo = b[0];
    c.bracket_hi = b[1];
  }
  c.inner_tolerance = get_or(obj, "inner_tolerance", c.inner_tolerance);
  c.damping = get_or(obj, "damping", c.damping);
  c.multistart_count = get_or(obj, "multistart_count", c.multistart_count);
  c.validate();
  return c;
}

SimConfig parse_sim(const json& obj) {
  check_keys(obj, "sim", {"warmup_time", "measurement_time", "replications", "policy"});
  SimConfig s;
  if (obj.contains("warmup_time")) s.warmup_time = obj.at("warmup_time").get<double>();
  if (obj.contains("measurement_time")) s.measurement_time = obj.at("measurement_time").get<double>();
  s.replications = get_or(obj, "replications", s.replications);
  if (obj.contains("policy")) s.policy = parse_policy(obj.at("policy").get<std::string>());
  return s;
}

Distribution parse_distribution(const json& obj, std::string_view where) {
  check_keys(obj, where, {"type", "value", "lower", "upper", "atoms"});
  const auto type = obj.at("type").get<std::string>();
  if (type == "point_mass") return Distribution::point_mass(obj.at("value").get<double>());
  if (type == "uniform")
    return Distribution::uniform(obj.at("lower").get<double>(), obj.at("upper").get<double>());
  if (type == "point_masses") {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& a : obj.at("atoms")) {
      const auto pair = a.get<std::vector<double>>();
      if (pair.size() != 2) throw ConfigError(std::string(where) + ": atoms are [value, probability]");
      atoms.emplace_back(pair[0], pair[1]);
    }
    return Distribution::point_masses(std::move(atoms));
  }
  throw ConfigError(std::string(where) + ": unknown distribution type '" + type + "'");
}

LimitingConfig parse_limiting(const json& obj) {
  check_keys(obj, "limiting",
             {"cost", "arrival", "service_rate", "priority_bounds", "alpha", "num_classes",
              "curve_points"});
  LimitingGameSpec spec{parse_distribution(obj.at("cost"), "limiting.cost"),
                        parse_distribution(obj.at("arrival"), "limiting.arrival"),
                        obj.at("service_rate").get<double>()};
  if (obj.contains("priority_bounds")) {
    const auto b = obj.at("priority_bounds").get<std::vector<double>>();
    if (b.size() != 2) throw ConfigError("limiting.priority_bounds must have two entries");
    spec.priority_lower = b[0];
    spec.priority_upper = b[1];
  }
  spec.validate();
  LimitingConfig cfg{std::move(spec)};
  cfg.alpha = get_or(obj, "alpha", cfg.alpha);
  if (!(cfg.alpha > 0.0)) throw ConfigError("limiting.alpha must be positive");
  if (obj.contains("num_classes")) cfg.num_classes = obj.at("num_classes").get<std::vector<std::size_t>>();
  cfg.curve_points = get_or(obj, "curve_points", cfg.curve_points);
  if (cfg.curve_points < 2) throw ConfigError("limiting.curve_points must be at least 2");
  return cfg;
}

NetworkSpec parse_network(const json& obj) {
  check_keys(obj, "network", {"service_rates", "classes"});
  std::vector<NetworkClass> classes;
  for (const auto& c : obj.at("classes")) {
    check_keys(c, "network class", {"arrival_rate", "cost_rate", "resources"});
    classes.push_back(NetworkClass{c.at("arrival_rate").get<double>(), c.at("cost_rate").get<double>(),
                                   c.at("resources").get<std::vector<std::size_t>>()});
  }
  return NetworkSpec(obj.at("service_rates").get<std::vector<double>>(), std::move(classes));
}

DivergenceConfig parse_divergence(const json& obj) {
  check_keys(obj, "divergence", {"ratios", "load", "alpha"});
  DivergenceConfig d;
  if (obj.contains("ratios")) d.ratios = obj.at("ratios").get<std::vector<double>>();
  d.load = get_or(obj, "load", d.load);
  d.alpha = get_or(obj, "alpha", d.alpha);
  if (d.ratios.empty()) throw ConfigError("divergence.ratios is empty");
  for (double r : d.ratios)
    if (!(r > 0.0)) throw ConfigError("divergence ratios must be positive");
  if (!(d.load > 0.0 && d.load < 1.0)) throw ConfigError("divergence.load must lie in (0, 1)");
  if (!(d.alpha > 0.0)) throw ConfigError("divergence.alpha must be positive");
  return d;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace

std::string_view to_string(Mode mode) {
  for (const auto& [m, name] : kModeNames)
    if (m == mode) return name;
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  for (const auto& [m, n] : kModeNames)
    if (n == name) return m;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

const std::vector<Mode>& all_modes() {
  static const std::vector<Mode> modes = [] {
    std::vector<Mode> out;
    for (const auto& entry : kModeNames) out.push_back(entry.first);
    return out;
  }();
  return modes;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Scenario parse_scenario(const json& config, const RunOptions& options) {
  try {
    check_keys(config, "config",
               {"mode", "seed", "threads", "system", "instances", "sampling", "sweep", "sample_count",
                "solver", "sim", "priorities", "tagged_priorities", "limiting", "network",
                "divergence"});
    Scenario s;
    s.config_hash = "fnv1a64:" + hex64(fnv1a64(config.dump()));
    if (config.contains("mode")) s.mode = parse_mode(config.at("mode").get<std::string>());
    s.seed = options.seed ? *options.seed : get_or<std::uint64_t>(config, "seed", 1);
    s.threads = options.threads ? *options.threads : get_or(config, "threads", 1u);
    if (s.threads == 0) throw ConfigError("threads must be positive");
    if (config.contains("system")) s.instances.push_back(parse_system(config.at("system")));
    if (config.contains("instances"))
      for (const auto& inst : config.at("instances")) s.instances.push_back(parse_system(inst));
    if (config.contains("sampling")) s.sampling = parse_sampling(config.at("sampling"));
    if (config.contains("sweep")) {
      s.sweep = parse_sweep(config.at("sweep"));
      if (!s.sampling) s.sampling = SamplingSpec{};
    }
    s.sample_count = get_or(config, "sample_count", s.sample_count);
    if (config.contains("solver")) s.solver = parse_solver(config.at("solver"));
    if (config.contains("sim")) s.sim = parse_sim(config.at("sim"));
    s.sim.rng_seed = s.seed;
    s.sim.threads = s.threads;
    s.sim.validate();
    if (config.contains("priorities")) s.priorities = config.at("priorities").get<std::vector<double>>();
    if (config.contains("tagged_priorities"))
      s.tagged_priorities = config.at("tagged_priorities").get<std::vector<double>>();
    for (double b : s.tagged_priorities)
      if (!(b > 0.0)) throw ConfigError("tagged priorities must be positive");
    if (config.contains("limiting")) s.limiting = parse_limiting(config.at("limiting"));
    if (config.contains("network")) s.network = parse_network(config.at("network"));
    if (config.contains("divergence")) s.divergence = parse_divergence(config.at("divergence"));
    return s;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

Scenario load_scenario(const std::string& path, const RunOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json config;
  try {
    config = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_scenario(config, options);
}

}  // namespace dps::cli
