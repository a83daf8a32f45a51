#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dps/equilibrium.hpp"
#include "dps/heavy_traffic.hpp"
#include "dps/network.hpp"
#include "dps/params.hpp"
#include "dps/simulator.hpp"

namespace dps::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// Malformed or inconsistent scenario configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode {
  Compare,
  Metrics,
  Simulate,
  Hte,
  ExactNe,
  ClassNe,
  ClassHte,
  Limiting,
  Network,
  DivergenceProbe,
};

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);
const std::vector<Mode>& all_modes();

/// Random instance family: c_i ~ U[0, cost_width] + cost_offset, likewise for lambda_i.
struct SamplingSpec {
  std::size_t num_classes = 10;
  double cost_offset = 1.0;
  double arrival_offset = 1.0;
  double cost_width = 10.0;
  double arrival_width = 10.0;
  double alpha = 1.0;
  double load = 0.9;
};

/// Each axis overrides the matching SamplingSpec field; the sweep is their product.
struct SweepAxes {
  std::vector<std::size_t> num_classes;
  std::vector<double> cost_offset;
  std::vector<double> arrival_offset;
  std::vector<double> alpha;
  std::vector<double> load;
};

struct LimitingConfig {
  LimitingGameSpec spec;
  double alpha = 1.0;
  std::vector<std::size_t> num_classes{10, 100, 1000};
  std::size_t curve_points = 11;
};

struct DivergenceConfig {
  std::vector<double> ratios{1.0, 10.0, 100.0, 1000.0};
  double load = 0.9;
  double alpha = 1.0;
};

struct Scenario {
  std::optional<Mode> mode;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::vector<SystemParams> instances;  // explicit "system" / "instances"
  std::optional<SamplingSpec> sampling;
  SweepAxes sweep;
  std::size_t sample_count = 100;
  SolverConfig solver;
  SimConfig sim;
  std::optional<std::vector<double>> priorities;  // caller's class order
  std::vector<double> tagged_priorities;          // probe betas for simulate (dps)
  std::optional<LimitingConfig> limiting;
  std::optional<NetworkSpec> network;
  DivergenceConfig divergence;
  std::string config_hash;  // FNV-1a 64 of the compact JSON dump
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

/// Builds a scenario from JSON, applying command-line overrides. Throws ConfigError.
Scenario parse_scenario(const nlohmann::json& config, const RunOptions& options = {});
Scenario load_scenario(const std::string& path, const RunOptions& options = {});

/// A CSV body: header plus string-formatted rows.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header; throws std::out_of_range.
  std::size_t column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

/// One sweep point with its sampled instances.
struct SweepPoint {
  SamplingSpec spec;
  std::vector<SystemParams> samples;
};

/// Expands sampling x sweep axes; sample s of every point uses RNG stream s.
std::vector<SweepPoint> expand_sweep(const Scenario& scenario);
SystemParams sample_instance(const SamplingSpec& spec, std::uint64_t seed, std::uint64_t stream);

/// Instances for per-instance modes: explicit ones, else every sampled instance.
std::vector<SystemParams> scenario_instances(const Scenario& scenario);

Table run_compare(const Scenario& scenario);
Table run_metrics(const Scenario& scenario);
Table run_simulate(const Scenario& scenario);
Table run_hte(const Scenario& scenario);
Table run_exact_ne(const Scenario& scenario);
Table run_class_ne(const Scenario& scenario);
Table run_class_hte(const Scenario& scenario);
Table run_limiting(const Scenario& scenario);
Table run_network(const Scenario& scenario);
Table run_divergence_probe(const Scenario& scenario);

Table run_mode(Mode mode, const Scenario& scenario);

/// Full CSV document: '#' metadata lines followed by the RFC-4180 table.
std::string render_csv(Mode mode, const Scenario& scenario, const Table& table);

// Formatting helpers shared with the tests.
std::string format_double(double value);
std::string join_doubles(const std::vector<double>& values);
std::string csv_escape(std::string_view field);
std::uint64_t fnv1a64(std::string_view bytes);
/// Linear-interpolation quantile (type 7) of unsorted data, p in [0, 1].
double quantile(std::vector<double> values, double p);

/// Entry point behind main(); returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace dps::cli
