#include "linsys/cli/commands.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "linsys/cli/ensemble.hpp"
#include "linsys/cli/identities.hpp"
#include "linsys/cli/report.hpp"
#include "linsys/errors.hpp"

namespace linsys::cli {

namespace {

EnsembleSpec spec_from(const RunConfig& c) {
  EnsembleSpec s;
  s.horizon = Horizon{c.run.t_max, c.run.max_events};
  s.sample_times = c.run.sample_times;
  s.master_seed = c.run.seed;
  s.runs = c.run.runs;
  s.workers = c.options.workers;
  s.dynamics = c.options.dynamics;
  s.prune_threshold = c.options.prune_threshold;
  return s;
}

void require_run(const RunConfig& c) {
  if (!c.run.present) throw ConfigError("/run", "required field missing");
}

void emit(const std::optional<std::string>& path, const std::string& content, std::ostream& out) {
  if (path) write_file_atomic(*path, content);
  else out << content;
}

void maybe_plot(const RunConfig& c, std::ostream& err) {
  if (!c.output.plot_path) return;
  if (!c.output.csv_path) {
    err << "note: plot_path ignored without csv_path\n";
    return;
  }
  write_file_atomic(*c.output.plot_path, gnuplot_script(*c.output.csv_path));
}

}  // namespace

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_run(c);
  if (c.run.runs != 1) {
    err << "error: /run/runs: simulate needs runs = 1 (use ensemble)\n";
    return exit_validation;
  }
  EnsembleSpec spec = spec_from(c);
  spec.workers = 1;
  const std::vector<TrajectoryRecord> recs = run_ensemble(c.kernel, spec);
  std::ostringstream csv;
  write_csv_header(csv);
  write_csv_rows(csv, 0, recs[0]);
  emit(c.output.csv_path, csv.str(), out);
  maybe_plot(c, err);
  if (recs[0].stop == StopReason::event_limit)
    err << fmt::format("note: event limit {} reached at t = {}; later samples not emitted\n", c.run.max_events,
                       format_real(recs[0].final.time));
  return exit_ok;
}

int cmd_ensemble(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_run(c);
  if (c.run.runs < 2) {
    err << "error: /run/runs: ensemble needs runs >= 2 (use simulate)\n";
    return exit_validation;
  }
  const std::vector<TrajectoryRecord> recs = run_ensemble(c.kernel, spec_from(c));
  const EnsembleSummary summary = summarize(recs, c.run.sample_times, c.run.seed);
  const std::string report = to_json(summary).dump(2) + "\n";
  if (c.output.csv_path) {
    std::ostringstream csv;
    write_csv_header(csv);
    for (std::size_t i = 0; i < recs.size(); ++i) write_csv_rows(csv, i, recs[i]);
    write_file_atomic(*c.output.csv_path, csv.str());
  }
  try {
    emit(c.output.report_path, report, out);
    maybe_plot(c, err);
  } catch (...) {
    if (c.output.csv_path) std::remove(c.output.csv_path->c_str());
    throw;
  }
  if (summary.event_capped > 0)
    err << fmt::format("note: {} of {} runs stopped at the event limit\n", summary.event_capped, summary.runs);
  return exit_ok;
}

int cmd_phase(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const PhaseReport r = localization_statistic(c.kernel, c.phase);
  emit(c.output.report_path, to_json(r).dump(2) + "\n", out);
  (c.output.report_path ? out : err) << describe(r) << '\n';
  return exit_ok;
}

int cmd_identities(const std::optional<RunConfig>& c, bool corrupt_beta, std::ostream& out, std::ostream&) {
  const KernelDistribution dist = c ? c->kernel : make_bcpp(3, 1.0);
  IdentityOptions opt;
  opt.corrupt_beta = corrupt_beta;
  if (c) opt.seed = c->run.seed;
  const bool ok = print_identities(out, run_identities(dist, opt));
  out << (ok ? "identities: all checks passed\n" : "identities: FAILED\n");
  return ok ? exit_ok : exit_identity;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and analysis of linear systems with random update kernels"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool corrupt_beta = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "Run configuration (JSON)");
    if (config_required) opt->required();
    sub->add_option("--seed", seed, "Overrides run.seed");
  };
  CLI::App* sim = app.add_subcommand("simulate", "Run one trajectory and write its CSV");
  CLI::App* ens = app.add_subcommand("ensemble", "Run an ensemble and write per-run CSV plus a summary");
  CLI::App* phase = app.add_subcommand("phase", "Classify the kernel and report the localization statistic");
  CLI::App* ids = app.add_subcommand("identities", "Run the identity battery");
  add_common(sim, true);
  add_common(ens, true);
  add_common(phase, true);
  add_common(ids, false);
  ids->add_flag("--corrupt-beta", corrupt_beta, "Test mode: perturb beta in the U-term closed form");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_validation;
  }

  try {
    std::optional<RunConfig> config;
    if (!config_path.empty()) {
      config.emplace(parse_config(read_file(config_path)));
      if (seed) config->run.seed = *seed;
    }
    if (*sim) return cmd_simulate(*config, out, err);
    if (*ens) return cmd_ensemble(*config, out, err);
    if (*phase) return cmd_phase(*config, out, err);
    return cmd_identities(config, corrupt_beta, out, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return exit_io;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_validation;
  } catch (const AssumptionViolation& e) {
    err << "assumption violated (" << e.assumption() << "): " << e.what() << '\n';
    return exit_validation;
  } catch (const std::invalid_argument& e) {
    err << "invalid parameter: " << e.what() << '\n';
    return exit_validation;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_validation;
  }
}

}  // namespace linsys::cli
