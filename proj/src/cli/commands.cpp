#include "pdmp/cli/commands.hpp"

#include <cmath>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "pdmp/diagnostics/stats.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/exact.hpp"
#include "pdmp/parallel.hpp"

namespace pdmp::cli {

namespace {

std::vector<std::string> state_header(const PdmpSpec& spec) {
  std::vector<std::string> h;
  for (int i = 0; i < spec.dim_x; ++i) h.push_back(spec.dim_x == 1 ? "x" : "x" + std::to_string(i + 1));
  for (int i = 0; i < spec.dim_v; ++i) h.push_back(spec.dim_v == 1 ? "v" : "v" + std::to_string(i + 1));
  return h;
}

void append_state(std::vector<double>& row, const State& z) {
  for (Eigen::Index i = 0; i < z.x.size(); ++i) row.push_back(z.x(i));
  for (Eigen::Index i = 0; i < z.v.size(); ++i) row.push_back(z.v(i));
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void require_scheme(const ExperimentConfig& c, const char* command) {
  if (c.scheme.exact) throw ConfigError("scheme.kind", 0, std::string(command) + " needs an approximation scheme");
  if (c.scheme.name == "subsampling" && std::string_view(command) != "couple") {
    throw ConfigError("scheme.kind", 0, std::string(command) + " does not support the subsampling scheme");
  }
}

ReplicaPlan plan_of(const ExperimentConfig& c) { return {c.run.replicas, c.run.seed, c.run.workers}; }

/// Rows appended in replica order (blocks merge in order).
struct Rows {
  std::vector<std::vector<double>> rows;
  void merge(const Rows& o) { rows.insert(rows.end(), o.rows.begin(), o.rows.end()); }
};

void write_exact_path(const PdmpSpec& spec, const SkeletonPath& path, const std::filesystem::path& file) {
  CsvWriter csv(file, concat(concat({"t"}, state_header(spec)), {"event_flag", "kernel"}));
  std::vector<double> row{0.0};
  append_state(row, path.initial);
  row.insert(row.end(), {0.0, -1.0});
  csv.row(row);
  for (std::size_t k = 0; k < path.size(); ++k) {
    row = {path.event_times[k]};
    append_state(row, path.post_jump[k]);
    row.insert(row.end(), {1.0, static_cast<double>(path.kernels[k])});
    csv.row(row);
  }
  row = {path.terminal_time};
  append_state(row, path.terminal);
  row.insert(row.end(), {0.0, -1.0});
  csv.row(row);
}

/// Mesh rows of one scheme path: n, t, state, events in the step, last kernel
/// (and the datum for subsampling).
std::vector<std::vector<double>> scheme_rows(const ExperimentConfig& c, const State& z0, StreamSet& rng) {
  std::vector<std::vector<double>> rows;
  const Mesh& mesh = c.scheme.config.mesh;
  auto push = [&](std::size_t n, double t, const State& z, double events, double kernel, double datum) {
    std::vector<double> row{static_cast<double>(n), t};
    append_state(row, z);
    row.insert(row.end(), {events, kernel});
    if (c.scheme.name == "subsampling") row.push_back(datum);
    rows.push_back(std::move(row));
  };
  if (c.scheme.name == "subsampling") {
    State z = z0;
    double t = 0.0;
    push(0, 0.0, z, 0.0, -1.0, -1.0);
    for (std::size_t n = 0; n < mesh.size(); ++n) {
      const SubsamplingRecord r = subsampling_step(*c.model.subsampling, z, mesh.steps[n], rng, c.scheme.update);
      t += mesh.steps[n];
      push(n + 1, t, z, r.tau ? 1.0 : 0.0, r.kernel, r.datum);
    }
    return rows;
  }
  const DiscretePath path = simulate_scheme(c.scheme.config, c.model.spec, z0, rng);
  push(0, 0.0, path.states[0], 0.0, -1.0, -1.0);
  for (std::size_t n = 0; n < path.events.size(); ++n) {
    const auto& ev = path.events[n];
    push(n + 1, path.times[n + 1], path.states[n + 1], static_cast<double>(ev.size()),
         ev.empty() ? -1.0 : static_cast<double>(ev.back().kernel), -1.0);
  }
  return rows;
}

std::vector<std::string> scheme_header(const ExperimentConfig& c) {
  auto h = concat(concat({"n", "t"}, state_header(c.model.spec)), {"events", "kernel"});
  if (c.scheme.name == "subsampling") h.push_back("datum");
  return h;
}

}  // namespace

int cmd_simulate(const ExperimentConfig& c, RunOutput& out, std::ostream& log) {
  const PdmpSpec& spec = c.model.spec;
  const double T = c.scheme.horizon;
  if (c.run.replicas == 1) {
    StreamSet rng(c.run.seed, 0);
    const State z0 = c.initial(rng(Stream::Initial));
    if (c.scheme.exact) {
      const SkeletonPath path = simulate_exact(spec, z0, T, rng);
      write_exact_path(spec, path, out.file("trajectory.csv"));
      log << "exact path on [0, " << T << "]: " << path.size() << " events\n";
    } else {
      CsvWriter csv(out.file("trajectory.csv"), scheme_header(c));
      const auto rows = scheme_rows(c, z0, rng);
      for (const auto& r : rows) csv.row(r);
      log << c.scheme.name << " path: " << rows.size() - 1 << " steps\n";
    }
    return kSuccess;
  }

  // Several replicas: terminal states in one table, trajectories on request.
  std::vector<std::filesystem::path> traj_files;
  if (c.output.trajectories) {
    for (std::size_t r = 0; r < c.run.replicas; ++r) {
      char name[64];
      std::snprintf(name, sizeof name, "trajectories/replica_%06zu.csv", r);
      traj_files.push_back(out.file(name));
    }
  }
  const Rows rows = parallel_replicas(c.run.replicas, c.run.workers, Rows{}, [&](std::size_t r, Rows& acc) {
    StreamSet rng(c.run.seed, r);
    const State z0 = c.initial(rng(Stream::Initial));
    std::vector<double> row{static_cast<double>(r)};
    if (c.scheme.exact) {
      const SkeletonPath path = simulate_exact(spec, z0, T, rng);
      if (c.output.trajectories) write_exact_path(spec, path, traj_files[r]);
      append_state(row, path.terminal);
      row.push_back(static_cast<double>(path.size()));
    } else {
      const auto srows = scheme_rows(c, z0, rng);
      if (c.output.trajectories) {
        CsvWriter csv(traj_files[r], scheme_header(c));
        for (const auto& s : srows) csv.row(s);
      }
      double events = 0.0;
      for (const auto& s : srows) events += s[2 + spec.dim_x + spec.dim_v];
      const std::size_t off = 2;
      row.insert(row.end(), srows.back().begin() + off, srows.back().begin() + off + spec.dim_x + spec.dim_v);
      row.push_back(events);
    }
    acc.rows.push_back(std::move(row));
  });
  CsvWriter csv(out.file("samples.csv"), concat(concat({"replica"}, state_header(spec)), {"events"}));
  RunningStats events;
  for (const auto& r : rows.rows) {
    csv.row(r);
    events.add(r.back());
  }
  log << c.run.replicas << " replicas to T = " << T << ", mean events " << events.mean() << "\n";
  return kSuccess;
}

int cmd_couple(const ExperimentConfig& c, RunOutput& out, std::ostream& log) {
  require_scheme(c, "couple");
  const std::string& kind = c.coupling.name;
  const SchemeConfig& cfg = c.scheme.config;
  if (kind == "subsampling" || c.scheme.name == "subsampling") {
    if (kind != "subsampling" || c.scheme.name != "subsampling") {
      throw ConfigError("coupling.kind", 0, "the subsampling coupling pairs with scheme.kind = subsampling");
    }
    struct Acc {
      StatsVector dist, neq;
      void merge(const Acc& o) {
        dist.merge(o.dist);
        neq.merge(o.neq);
      }
    };
    const std::size_t points = cfg.mesh.size() + 1;
    const Acc acc = parallel_replicas(c.run.replicas, c.run.workers, Acc{StatsVector(points), StatsVector(points)},
                                      [&](std::size_t r, Acc& a) {
                                        StreamSet rng(c.run.seed, r);
                                        const State z0 = c.initial(rng(Stream::Initial));
                                        const CoupledRun run = run_coupled_subsampling(*c.model.subsampling, cfg.mesh,
                                                                                       z0, rng, c.coupling.norm);
                                        for (std::size_t n = 0; n < points; ++n) {
                                          a.dist[n].add(run.distance[n]);
                                          a.neq[n].add(run.equal[n] ? 0.0 : 1.0);
                                        }
                                      });
    CsvWriter csv(out.file("coupling.csv"), {"t", "mean_dist", "stderr", "p_neq", "stderr_neq"});
    const auto times = cfg.mesh.times();
    for (std::size_t n = 0; n < points; ++n) {
      csv.row({times[n], acc.dist[n].mean(), acc.dist[n].sem(), acc.neq[n].mean(), acc.neq[n].sem()});
    }
    log << "subsampling coupling: final mean distance " << acc.dist[points - 1].mean() << ", P(neq) "
        << acc.neq[points - 1].mean() << "\n";
    return kSuccess;
  }

  if (kind == "wasserstein") {
    const Trace tr = wasserstein_proxy_curve(c.model.spec, cfg, c.initial, plan_of(c), c.coupling.norm);
    CsvWriter csv(out.file("coupling.csv"), {"t", "mean_dist", "stderr"});
    for (std::size_t n = 0; n < tr.times.size(); ++n) csv.row({tr.times[n], tr.value[n], tr.se[n]});
    log << "wasserstein coupling: final mean distance " << tr.value.back() << " (se " << tr.se.back() << ")\n";
    return kSuccess;
  }
  if (kind == "higher_order" && c.scheme.name != "order_p") {
    throw ConfigError("coupling.kind", 0, "higher_order coupling needs scheme.kind = order_p");
  }
  try {
    require_tv_applicable(cfg);
  } catch (const InvalidConfig& e) {
    throw ConfigError("coupling.kind", 0, e.what());
  }
  const Trace tr = tv_indicator_curve(c.model.spec, cfg, c.initial, plan_of(c));
  CsvWriter csv(out.file("coupling.csv"), {"t", "p_neq", "stderr"});
  for (std::size_t n = 0; n < tr.times.size(); ++n) csv.row({tr.times[n], tr.value[n], tr.se[n]});
  log << kind << " coupling: final P(Z != Zbar) " << tr.value.back() << " (se " << tr.se.back() << ")\n";
  return kSuccess;
}

int cmd_order_sweep(const ExperimentConfig& c, RunOutput& out, std::ostream& log) {
  require_scheme(c, "order-sweep");
  if (c.scheme.deltas.size() < 3) throw ConfigError("scheme.deltas", 0, "an order sweep needs at least 3 step sizes");
  const SweepResult r = weak_error_sweep(c.model.spec, c.scheme.config, c.scheme.deltas, c.scheme.horizon, c.sweep.g,
                                         c.sweep.reference, c.initial, plan_of(c), c.sweep.estimator,
                                         c.sweep.replicas_per_delta);
  {
    CsvWriter csv(out.file("sweep.csv"), {"delta", "error", "stderr"});
    for (std::size_t k = 0; k < r.deltas.size(); ++k) csv.row({r.deltas[k], r.errors[k], r.stderrs[k]});
    if (r.fit) csv.row("slope", {r.fit->slope, r.fit->slope_se});
  }
  log << "reference: " << r.reference << "\n";
  for (std::size_t k = 0; k < r.deltas.size(); ++k) {
    log << "  delta " << r.deltas[k] << "  error " << r.signed_errors[k] << "  se " << r.stderrs[k] << "\n";
  }
  if (!r.fit) {
    log << "no slope: " << r.fit_error << "\n";
    return kToleranceFailure;
  }
  const double lo = c.sweep.expected_slope - c.sweep.tolerance;
  const double hi = c.sweep.expected_slope + c.sweep.tolerance;
  const bool ok = r.fit->slope >= lo && r.fit->slope <= hi;
  log << "slope " << r.fit->slope << " (95% CI " << r.fit->ci_low << " .. " << r.fit->ci_high << "), expected "
      << c.sweep.expected_slope << " +- " << c.sweep.tolerance << ": " << (ok ? "within" : "OUTSIDE") << " tolerance\n";
  return ok ? kSuccess : kToleranceFailure;
}

int cmd_moments(const ExperimentConfig& c, RunOutput& out, std::ostream& log) {
  require_scheme(c, "moments");
  if (!c.moments) throw ConfigError("moments", 0, "missing [moments] table");
  const MomentTrace m = lyapunov_moment_trace(c.model.spec, c.scheme.config, c.moments->G, c.initial, plan_of(c),
                                              c.moments->pairing);
  CsvWriter csv(out.file("moments.csv"), {"t", "G_exact", "se_exact", "G_scheme", "se_scheme"});
  for (std::size_t n = 0; n < m.times.size(); ++n) {
    csv.row({m.times[n], m.exact[n], m.exact_se[n], m.scheme[n], m.scheme_se[n]});
  }
  log << "sup E[G]: exact " << m.sup_exact << ", scheme " << m.sup_scheme << "\n";
  return kSuccess;
}

int cmd_bias(const ExperimentConfig& c, RunOutput& out, std::ostream& log) {
  require_scheme(c, "bias");
  if (!c.bias.truth) throw ConfigError("bias.truth", 0, "required when the target is not Gaussian");
  const BiasTrace b = stationary_bias_curve(c.model.spec, c.scheme.config, c.bias.f, *c.bias.truth, c.initial,
                                            plan_of(c), c.bias.burn_in);
  const std::string& s = c.bias.statistic;
  CsvWriter csv(out.file("bias.csv"), {"t", s + "_bias_exact", "se_exact", s + "_bias_scheme", "se_scheme"});
  for (std::size_t n = 0; n < b.times.size(); ++n) {
    csv.row({b.times[n], b.exact[n], b.exact_se[n], b.scheme[n], b.scheme_se[n]});
  }
  log << s << " (truth " << b.truth << ") final bias: exact " << b.exact.back() << ", scheme " << b.scheme.back()
      << "\n";
  return kSuccess;
}

int run_command(std::string_view command, const ExperimentConfig& c, std::ostream& log, std::ostream& err) {
  int code = kRuntimeError;
  std::optional<RunOutput> out;
  try {
    out.emplace(c.output.dir, std::string(command));
    out->write_resolved_config(c.resolved);
    if (command == "simulate") {
      code = cmd_simulate(c, *out, log);
    } else if (command == "couple") {
      code = cmd_couple(c, *out, log);
    } else if (command == "order-sweep") {
      code = cmd_order_sweep(c, *out, log);
    } else if (command == "moments") {
      code = cmd_moments(c, *out, log);
    } else if (command == "bias") {
      code = cmd_bias(c, *out, log);
    } else {
      err << "unknown command '" << command << "'\n";
      code = kConfigError;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    code = kConfigError;
  } catch (const InvalidConfig& e) {
    err << "config error: " << e.what() << "\n";
    code = kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = kRuntimeError;
  }
  if (out) out->write_manifest(c.run.seed, c.run.replicas, c.run.workers, code);
  return code;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Simulation and discretisation diagnostics for piecewise deterministic Markov processes"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "exact or scheme trajectories"},
      {"couple", "coupled distance or inequality traces"},
      {"order-sweep", "weak error against step size with a fitted order"},
      {"moments", "Lyapunov moment traces"},
      {"bias", "time-average bias against the stationary truth"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "TOML experiment configuration")->required();
    sub->add_option("--seed", seed, "master seed (overrides run.seed)");
    sub->add_option("--workers", workers, "worker threads (overrides run.workers and PDMP_WORKERS)");
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  ExperimentConfig c;
  try {
    c = load_config(config_path, Overrides{seed, workers, out_dir});
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << config_path << ": " << e.what() << "\n";
    return kConfigError;
  }
  std::cout << std::setprecision(6);
  return run_command(command, c, std::cout, std::cerr);
}

}  // namespace pdmp::cli
