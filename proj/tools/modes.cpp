#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "dps/cli.hpp"
#include "dps/errors.hpp"
#include "dps/exact.hpp"
#include "dps/metrics.hpp"
#include "dps/parallel.hpp"

namespace dps::cli {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ';';
    out += format_double(values[i]);
  }
  return out;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::size_t Table::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

const std::string& Table::cell(std::size_t row, std::string_view name) const {
  return rows.at(row).at(column(name));
}

double Table::number(std::size_t row, std::string_view name) const {
  return std::stod(cell(row, name));
}

namespace {

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

/// Row builder that checks every row against the header width.
class RowSink {
 public:
  explicit RowSink(std::vector<std::string> header) { table_.header = std::move(header); }

  void add(std::vector<std::string> row) {
    if (row.size() != table_.header.size())
      throw std::logic_error("row width does not match header");
    table_.rows.push_back(std::move(row));
  }
  Table take() { return std::move(table_); }

 private:
  Table table_;
};

std::vector<double> to_vector(const PriorityVector& p) {
  return std::vector<double>(p.values().begin(), p.values().end());
}

std::string describe_error(const std::exception& e) { return std::string("error: ") + e.what(); }

// Caller-order priorities mapped onto canonical classes.
PriorityVector canonical_priorities(const SystemParams& params, const std::vector<double>& given) {
  const auto map = params.original_to_canonical();
  if (given.size() != map.size())
    throw ConfigError("priorities has " + std::to_string(given.size()) + " entries for " +
                      std::to_string(map.size()) + " classes");
  std::vector<double> out(params.num_classes(), 0.0);
  for (std::size_t i = 0; i < given.size(); ++i) {
    double& slot = out[map[i]];
    if (slot != 0.0 && slot != given[i])
      throw ConfigError("classes merged by equal cost were given different priorities");
    slot = given[i];
  }
  try {
    return PriorityVector(std::move(out));
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

PriorityVector priorities_for(const Scenario& scenario, const SystemParams& params) {
  if (scenario.priorities) return canonical_priorities(params, *scenario.priorities);
  return hte_job_level(params).priorities;
}

}  // namespace

SystemParams sample_instance(const SamplingSpec& spec, std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  std::vector<std::pair<double, double>> classes(spec.num_classes);  // (cost, arrival)
  for (auto& c : classes) c.first = rng.uniform(0.0, spec.cost_width) + spec.cost_offset;
  for (auto& c : classes) c.second = rng.uniform(0.0, spec.arrival_width) + spec.arrival_offset;
  std::stable_sort(classes.begin(), classes.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 1; i < classes.size(); ++i)
    while (!(classes[i].first < classes[i - 1].first))
      classes[i].first = classes[i - 1].first - (rng.uniform() + 0x1.0p-53) * 1e-9;
  std::vector<double> cost;
  std::vector<double> lambda;
  for (const auto& c : classes) {
    cost.push_back(c.first);
    lambda.push_back(c.second);
  }
  return SystemParams::with_load(std::move(lambda), std::move(cost), spec.load, spec.alpha);
}

std::vector<SweepPoint> expand_sweep(const Scenario& scenario) {
  std::vector<SweepPoint> points;
  if (!scenario.sampling) return points;
  const SamplingSpec base = *scenario.sampling;
  const auto& ax = scenario.sweep;
  auto or_base = [](const auto& values, auto fallback) {
    using T = typename std::decay_t<decltype(values)>::value_type;
    return values.empty() ? std::vector<T>{static_cast<T>(fallback)} : values;
  };
  for (std::size_t k : or_base(ax.num_classes, base.num_classes))
    for (double c0 : or_base(ax.cost_offset, base.cost_offset))
      for (double l0 : or_base(ax.arrival_offset, base.arrival_offset))
        for (double a : or_base(ax.alpha, base.alpha))
          for (double rho : or_base(ax.load, base.load)) {
            SamplingSpec spec = base;
            spec.num_classes = k;
            spec.cost_offset = c0;
            spec.arrival_offset = l0;
            spec.alpha = a;
            spec.load = rho;
            SweepPoint point{spec, {}};
            try {
              for (std::size_t s = 0; s < scenario.sample_count; ++s)
                point.samples.push_back(sample_instance(spec, scenario.seed, s));
            } catch (const std::exception& e) {
              throw ConfigError(std::string("invalid sweep point: ") + e.what());
            }
            points.push_back(std::move(point));
          }
  return points;
}

std::vector<SystemParams> scenario_instances(const Scenario& scenario) {
  if (!scenario.instances.empty()) return scenario.instances;
  std::vector<SystemParams> out;
  for (auto& point : expand_sweep(scenario))
    for (auto& p : point.samples) out.push_back(std::move(p));
  return out;
}

Table run_compare(const Scenario& scenario) {
  RowSink sink({"row_type", "point", "sample", "num_classes", "cost_offset", "arrival_offset",
                "alpha", "load", "status", "converged", "iterations", "residual", "relative_error",
                "count", "min", "q1", "median", "q3", "max", "beta_hte", "beta_ne"});
  const auto points = expand_sweep(scenario);
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const auto& point = points[pi];
    const auto& spec = point.spec;
    const std::vector<std::string> prefix{fmt(pi), "", fmt(spec.num_classes), fmt(spec.cost_offset),
                                          fmt(spec.arrival_offset), fmt(spec.alpha), fmt(spec.load)};
    struct Outcome {
      std::string status = "ok";
      EquilibriumResult hte;
      EquilibriumResult ne;
      double error = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<Outcome> outcomes(point.samples.size());
    parallel_for(outcomes.size(), scenario.threads, [&](std::size_t s) {
      auto& o = outcomes[s];
      const auto& params = point.samples[s];
      try {
        o.hte = hte_job_level(params);
        o.ne = solve_job_ne(params, scenario.solver, o.hte.priorities);
        o.error = relative_error(o.hte.priorities, o.ne.priorities);
        if (!o.ne.converged) o.status = "not-converged";
      } catch (const Error& e) {
        o.status = describe_error(e);
      }
    });

    std::vector<double> errors;
    for (std::size_t s = 0; s < outcomes.size(); ++s) {
      const auto& o = outcomes[s];
      const bool ok = o.status == "ok";
      if (ok) errors.push_back(o.error);
      std::vector<std::string> row{"sample"};
      row.insert(row.end(), prefix.begin(), prefix.end());
      row[2] = fmt(s);
      const bool solved = o.ne.priorities.size() > 0;
      row.insert(row.end(),
                 {o.status, fmt(ok), solved ? fmt(o.ne.iterations) : "",
                  solved ? fmt(o.ne.residual) : "", fmt(o.error), "", "", "", "", "", "",
                  o.hte.priorities.size() > 0 ? join_doubles(to_vector(o.hte.priorities)) : "",
                  solved ? join_doubles(to_vector(o.ne.priorities)) : ""});
      sink.add(std::move(row));
    }
    std::vector<std::string> summary{"summary"};
    summary.insert(summary.end(), prefix.begin(), prefix.end());
    const bool all = errors.size() == outcomes.size();
    summary.insert(summary.end(),
                   {all ? "ok" : "incomplete", fmt(all), "", "", "", fmt(errors.size()),
                    fmt(quantile(errors, 0.0)), fmt(quantile(errors, 0.25)), fmt(quantile(errors, 0.5)),
                    fmt(quantile(errors, 0.75)), fmt(quantile(errors, 1.0)), "", ""});
    sink.add(std::move(summary));
  }
  return sink.take();
}

Table run_metrics(const Scenario& scenario) {
  RowSink sink({"instance", "num_classes", "alpha", "load", "system_cost", "revenue",
                "optimal_cost", "poa", "poa_bound_tight", "poa_bound_loose", "identity_gap"});
  const auto instances = scenario_instances(scenario);
  for (std::size_t n = 0; n < instances.size(); ++n) {
    const auto& p = instances[n];
    const auto r = poa_report(p);
    sink.add({fmt(n), fmt(p.num_classes()), fmt(p.alpha()), fmt(p.load()), fmt(r.system_cost),
              fmt(r.revenue), fmt(r.optimal_cost), fmt(r.poa), fmt(r.poa_bound_tight),
              fmt(r.poa_bound_loose), fmt(r.system_cost - p.alpha() * r.revenue)});
  }
  return sink.take();
}

Table run_hte(const Scenario& scenario) {
  RowSink sink({"instance", "class", "cost_rate", "arrival_rate", "alpha", "load", "priority",
                "foc_residual", "v_ht"});
  const auto instances = scenario_instances(scenario);
  for (std::size_t n = 0; n < instances.size(); ++n) {
    const auto& p = instances[n];
    const auto beta = hte_job_level(p).priorities;
    for (std::size_t i = 0; i < p.num_classes(); ++i)
      sink.add({fmt(n), fmt(i + 1), fmt(p.cost_rate(i)), fmt(p.arrival_rate(i)), fmt(p.alpha()),
                fmt(p.load()), fmt(beta[i]), fmt(hte_foc_residual(p, beta, i)),
                fmt(v_ht(p, beta, beta[i]))});
  }
  return sink.take();
}

namespace {

template <class Solve, class Extra>
Table run_equilibrium(const Scenario& scenario, std::vector<std::string> extra_columns,
                      Solve&& solve, Extra&& extra) {
  std::vector<std::string> header{"instance", "class", "cost_rate", "arrival_rate", "alpha",
                                  "load", "status", "converged", "iterations", "residual",
                                  "pinned", "heuristic", "priority", "priority_hte"};
  header.insert(header.end(), extra_columns.begin(), extra_columns.end());
  RowSink sink(std::move(header));
  const auto instances = scenario_instances(scenario);
  struct Outcome {
    std::string status = "ok";
    EquilibriumResult result;
    std::vector<std::vector<std::string>> extra;
  };
  std::vector<Outcome> outcomes(instances.size());
  parallel_for(instances.size(), scenario.threads, [&](std::size_t n) {
    auto& o = outcomes[n];
    try {
      o.result = solve(instances[n]);
      if (!o.result.converged) o.status = "not-converged";
      o.extra = extra(instances[n], o.result);
    } catch (const Error& e) {
      o.status = describe_error(e);
    }
  });
  for (std::size_t n = 0; n < instances.size(); ++n) {
    const auto& p = instances[n];
    const auto& o = outcomes[n];
    const auto hte = hte_job_level(p).priorities;
    const bool solved = o.result.priorities.size() == p.num_classes();
    for (std::size_t i = 0; i < p.num_classes(); ++i) {
      std::vector<std::string> row{fmt(n), fmt(i + 1), fmt(p.cost_rate(i)), fmt(p.arrival_rate(i)),
                                   fmt(p.alpha()), fmt(p.load()), o.status, fmt(o.status == "ok"),
                                   solved ? fmt(o.result.iterations) : "",
                                   solved ? fmt(o.result.residual) : "",
                                   solved ? fmt(o.result.bracket_pinned) : "",
                                   solved ? fmt(o.result.heuristic) : "",
                                   solved ? fmt(o.result.priorities[i]) : "", fmt(hte[i])};
      for (std::size_t c = 0; c < extra_columns.size(); ++c)
        row.push_back(solved && i < o.extra.size() ? o.extra[i][c] : "");
      sink.add(std::move(row));
    }
  }
  return sink.take();
}

}  // namespace

Table run_exact_ne(const Scenario& scenario) {
  return run_equilibrium(
      scenario, {"verification_gap", "sojourn"},
      [&](const SystemParams& p) { return solve_job_ne(p, scenario.solver); },
      [&](const SystemParams& p, const EquilibriumResult& r) {
        const double gap = job_ne_verification_gap(p, r.priorities, scenario.solver);
        const auto w = solve_waiting_times(p, r.priorities);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < p.num_classes(); ++i) rows.push_back({fmt(gap), fmt(w.sojourn[i])});
        return rows;
      });
}

Table run_class_ne(const Scenario& scenario) {
  return run_equilibrium(
      scenario, {"sojourn"},
      [&](const SystemParams& p) { return solve_class_ne(p, scenario.solver); },
      [&](const SystemParams& p, const EquilibriumResult& r) {
        const auto w = solve_waiting_times(p, r.priorities);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < p.num_classes(); ++i) rows.push_back({fmt(w.sojourn[i])});
        return rows;
      });
}

Table run_class_hte(const Scenario& scenario) {
  return run_equilibrium(
      scenario, {"foc_residual", "w_ht"},
      [&](const SystemParams& p) { return solve_class_hte(p, scenario.solver); },
      [&](const SystemParams& p, const EquilibriumResult& r) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < p.num_classes(); ++i)
          rows.push_back({fmt(class_hte_foc_residual(p, r.priorities, i)),
                          fmt(w_ht_class(p, r.priorities, i))});
        return rows;
      });
}

Table run_limiting(const Scenario& scenario) {
  if (!scenario.limiting) throw ConfigError("mode 'limiting' needs a 'limiting' section");
  const auto& cfg = *scenario.limiting;
  const auto& spec = cfg.spec;
  RowSink sink({"row_type", "num_classes", "cost", "priority", "foc_residual", "s2", "gamma",
                "load", "max_gap_job_hte", "max_gap_class_hte", "class_hte_converged"});
  const auto strategy = limiting_hte(spec, cfg.alpha);
  sink.add({"strategy", "", "", "", "", fmt(strategy.s2), fmt(strategy.gamma), fmt(spec.load()), "",
            "", ""});
  const double lo = spec.cost.lower();
  const double hi = spec.cost.upper();
  const std::size_t points = hi > lo ? cfg.curve_points : 1;
  for (std::size_t k = 0; k < points; ++k) {
    const double c = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    sink.add({"curve", "", fmt(c), fmt(strategy(c)), fmt(limiting_foc_residual(spec, strategy, c)), "",
              "", "", "", "", ""});
  }
  for (std::size_t n = 0; n < cfg.num_classes.size(); ++n) {
    const std::size_t k_count = cfg.num_classes[n];
    Rng rng(scenario.seed, n);
    const auto game = sample_finite_game(spec, k_count, cfg.alpha, rng);
    const auto job = hte_job_level(game).priorities;
    const auto cls = solve_class_hte(game, scenario.solver);
    double gap_job = 0.0;
    double gap_class = 0.0;
    for (std::size_t i = 0; i < game.num_classes(); ++i) {
      const double target = strategy(game.cost_rate(i));
      gap_job = std::max(gap_job, std::abs(job[i] - target));
      gap_class = std::max(gap_class, std::abs(cls.priorities[i] - target));
    }
    sink.add({"convergence", fmt(k_count), "", "", "", "", "", fmt(game.load()), fmt(gap_job),
              fmt(gap_class), fmt(cls.converged)});
  }
  return sink.take();
}

Table run_network(const Scenario& scenario) {
  if (!scenario.network) throw ConfigError("mode 'network' needs a 'network' section");
  const auto& spec = *scenario.network;
  const auto report = solve_network_hte(spec, scenario.solver);
  RowSink sink({"row_type", "class", "resource", "bid", "wait", "slope", "equalized_wait",
                "slope_sum_gap", "iterations", "converged", "residual", "poa_bound"});
  for (std::size_t i = 0; i < spec.num_classes(); ++i) {
    const auto& cls = spec.network_class(i);
    double slope_sum = 0.0;
    for (std::size_t k = 0; k < cls.resources.size(); ++k) {
      const std::size_t j = cls.resources[k];
      slope_sum += -report.slopes[i][k];
      sink.add({"bid", fmt(i + 1), fmt(j + 1), fmt(report.bids.at(i, j)), fmt(report.waits[i][k]),
                fmt(report.slopes[i][k]), fmt(report.equalized_wait[i]), "", "", "", "", ""});
    }
    sink.add({"class", fmt(i + 1), "", "", "", "", fmt(report.equalized_wait[i]),
              fmt(slope_sum - cls.cost_rate), "", "", "", ""});
  }
  sink.add({"summary", "", "", "", "", "", "", "", fmt(report.iterations), fmt(report.converged),
            fmt(report.residual), report.poa_bound ? fmt(*report.poa_bound) : ""});
  return sink.take();
}

Table run_simulate(const Scenario& scenario) {
  RowSink sink({"instance", "policy", "quantity", "class", "beta", "analytic", "mean", "std_error",
                "z_score", "replications"});
  const auto instances = scenario_instances(scenario);
  const SimConfig& sim = scenario.sim;
  const std::string policy(to_string(sim.policy));
  for (std::size_t n = 0; n < instances.size(); ++n) {
    const auto& p = instances[n];
    auto emit = [&](const std::string& quantity, const std::string& cls, const std::string& beta,
                    double analytic, const SimEstimate& e) {
      sink.add({fmt(n), policy, quantity, cls, beta, fmt(analytic), fmt(e.mean), fmt(e.std_error),
                fmt(e.z_score(analytic)), fmt(e.replications)});
    };
    switch (sim.policy) {
      case Policy::Dps: {
        const auto beta = priorities_for(scenario, p);
        const auto exact = solve_waiting_times(p, beta);
        const auto est = simulate_dps(p, beta, sim);
        for (std::size_t i = 0; i < p.num_classes(); ++i) {
          emit("W", fmt(i + 1), fmt(beta[i]), exact.sojourn[i], est.sojourn[i]);
          emit("N", fmt(i + 1), fmt(beta[i]), exact.occupancy[i], est.occupancy[i]);
          emit("little_gap", fmt(i + 1), fmt(beta[i]), 0.0, est.little_gap[i]);
        }
        emit("N_total", "", "", p.load() / (1.0 - p.load()), est.total_occupancy);
        for (double b : scenario.tagged_priorities)
          emit("V", "", fmt(b), tagged_sojourn(p, beta, exact, b), simulate_tagged(p, beta, b, sim));
        break;
      }
      case Policy::StrictPriority: {
        const auto est = simulate_strict_priority(p, sim);
        const auto n_opt = optimal_occupancy_cmu(p);
        emit("C_opt", "", "", optimal_cost_cmu(p), est.optimal_cost);
        for (std::size_t i = 0; i < p.num_classes(); ++i)
          emit("N", fmt(i + 1), "", n_opt[i], est.occupancy[i]);
        emit("N_total", "", "", p.load() / (1.0 - p.load()), est.total_occupancy);
        break;
      }
      case Policy::Ros: {
        const auto beta = priorities_for(scenario, p);
        const auto est = simulate_ros(p, beta, sim);
        for (std::size_t i = 0; i < p.num_classes(); ++i)
          emit("W_ht", fmt(i + 1), fmt(beta[i]), w_ht_class(p, beta, i), est.sojourn[i]);
        emit("N_total", "", "", p.load() / (1.0 - p.load()), est.total_occupancy);
        break;
      }
    }
  }
  return sink.take();
}

Table run_divergence_probe(const Scenario& scenario) {
  const auto& d = scenario.divergence;
  RowSink sink({"row_type", "step", "cost_ratio", "arrival_ratio", "status", "converged",
                "iterations", "relative_error", "increasing"});
  double previous = -std::numeric_limits<double>::infinity();
  bool monotone = true;
  std::size_t failures = 0;
  for (std::size_t step = 0; step < d.ratios.size(); ++step) {
    const double r = d.ratios[step];
    const auto params = SystemParams::with_load({r, 1.0}, {r, 1.0}, d.load, d.alpha);
    std::string status = "ok";
    EquilibriumResult ne;
    double error = std::numeric_limits<double>::quiet_NaN();
    try {
      const auto hte = hte_job_level(params);
      ne = solve_job_ne(params, scenario.solver, hte.priorities);
      error = relative_error(hte.priorities, ne.priorities);
      if (!ne.converged) status = "not-converged";
    } catch (const BracketExhaustedError& e) {
      // A best response on the search floor means the exact equilibrium has a class
      // buying (almost) no priority, so the relative error is unbounded.
      if (e.location() <= scenario.solver.bracket_lo * (1.0 + 1e-9)) {
        status = "corner";
        error = std::numeric_limits<double>::infinity();
      } else {
        status = describe_error(e);
      }
    } catch (const Error& e) {
      status = describe_error(e);
    }
    const bool ok = status == "ok" || status == "corner";
    std::string increasing;
    if (ok) {
      if (step > 0) {
        increasing = fmt(error > previous);
        monotone = monotone && error > previous;
      }
      previous = error;
    } else {
      ++failures;
    }
    sink.add({"step", fmt(step), fmt(r), fmt(r), status, fmt(status == "ok"),
              ne.priorities.size() > 0 ? fmt(ne.iterations) : "", fmt(error), increasing});
  }
  sink.add({"summary", "", "", "", failures == 0 ? "ok" : "incomplete", fmt(failures == 0), "", "",
            fmt(monotone)});
  return sink.take();
}

Table run_mode(Mode mode, const Scenario& scenario) {
  switch (mode) {
    case Mode::Compare: return run_compare(scenario);
    case Mode::Metrics: return run_metrics(scenario);
    case Mode::Simulate: return run_simulate(scenario);
    case Mode::Hte: return run_hte(scenario);
    case Mode::ExactNe: return run_exact_ne(scenario);
    case Mode::ClassNe: return run_class_ne(scenario);
    case Mode::ClassHte: return run_class_hte(scenario);
    case Mode::Limiting: return run_limiting(scenario);
    case Mode::Network: return run_network(scenario);
    case Mode::DivergenceProbe: return run_divergence_probe(scenario);
  }
  throw std::logic_error("unhandled mode");
}

std::string render_csv(Mode mode, const Scenario& scenario, const Table& table) {
  std::ostringstream out;
  out << "# tool=dps version=" << kToolVersion << '\n';
  out << "# mode=" << to_string(mode) << '\n';
  out << "# config_hash=" << scenario.config_hash << '\n';
  out << "# seed=" << scenario.seed << '\n';
  out << "# rng=" << Rng::kAlgorithm << '\n';
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out << ',';
      out << csv_escape(fields[i]);
    }
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  return out.str();
}

}  // namespace dps::cli
