#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <nmfem/errors.hpp>

#include "commands.hpp"

namespace nmfem::cli {
namespace {

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Expands "--config FILE" into ordinary flags placed before the user's own,
// skipping keys the user already passed so the command line wins.
std::vector<std::string> expand_config(CLI::App& sub, std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file '" + path + "'");
  std::vector<std::string> injected;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    if (opt == nullptr || key == "config" || key == "help") {
      throw UsageError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (given(args, flag)) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes") injected.push_back(flag);
      else if (value != "false" && value != "0" && value != "no") {
        throw UsageError(path + ":" + std::to_string(line_no) + ": '" + key + "' takes true or false");
      }
    } else {
      injected.push_back(flag);
      injected.push_back(value);
    }
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

nlohmann::json resolved_config(const CLI::App& sub) {
  nlohmann::json config = nlohmann::json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    if (opt->get_expected_max() == 0) {
      config[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      config[name] = opt->results().back();
    } else {
      config[name] = opt->get_default_str();
    }
  }
  return config;
}

void add_fit_flags(CLI::App& sub, FitFlags& f) {
  sub.add_option("--restarts", f.restarts, "Random restarts; the best log-likelihood wins");
  sub.add_option("--epsilon", f.epsilon, "Stop when the log-likelihood changes by less");
  sub.add_option("--max-iters", f.max_iters, "Maximum outer EM iterations");
  sub.add_option("--inner-epsilon", f.inner_epsilon, "Inner factorization tolerance");
  sub.add_option("--max-inner-iters", f.max_inner_iters, "Maximum inner iterations per M-step");
  sub.add_option("--seed", f.seed, "Root seed for every random stream");
  sub.add_option("--threads", f.threads, "Worker threads, 0 for all cores");
  sub.add_option("--init", f.init, "Inner-loop start: warm or random");
  sub.add_option("--start", f.start, "First restart: dirichlet or kmeans");
  sub.add_option("--inner-normalization", f.inner_normalization,
                 "Inner renormalization: compensated or printed");
  sub.add_flag("--verbose", f.verbose, "Per-iteration trace on stderr");
}

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->option_defaults()->always_capture_default();
  sub->add_option("--config", "Flat key=value file mirroring the flags; flags win");
  return sub;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clustering of count profiles with NMF-EM mixtures"};
  app.set_help_flag("--help", "Show help");
  app.set_version_flag("--version", std::string(NMFEM_VERSION));
  app.require_subcommand(1);

  IngestOptions ingest;
  CLI::App* ingest_cmd = add_command(app, "ingest", "Build weekly profiles from validation events");
  ingest_cmd->add_option("--input", ingest.input, "Events CSV, optionally gzip-compressed")->required();
  ingest_cmd->add_option("--output-dir", ingest.output_dir, "Output directory")->required();
  ingest_cmd->add_option("--min-active-days", ingest.min_active_days, "Minimum distinct travel days");
  ingest_cmd->add_option("--home-threshold", ingest.home_threshold,
                         "Share of active days starting at the home station");
  ingest_cmd->add_option("--cutoff-hour", ingest.cutoff_hour,
                         "Earlier taps never count as a first boarding");
  ingest_cmd->add_option("--bad-row-budget", ingest.bad_row_budget,
                         "Tolerated share of malformed rows");

  FitOptions fit;
  CLI::App* fit_cmd = add_command(app, "fit", "Fit an NMF-EM mixture");
  fit_cmd->add_option("--input", fit.input, "Profile matrix CSV")->required();
  fit_cmd->add_option("--output-dir", fit.output_dir, "Output directory")->required();
  fit_cmd->add_option("--k", fit.k, "Number of clusters")->required();
  fit_cmd->add_option("--h", fit.h, "Number of words")->required();
  add_fit_flags(*fit_cmd, fit.fit);

  SweepOptions sweep;
  CLI::App* sweep_cmd = add_command(app, "sweep", "Sweep K or H and apply the slope heuristic");
  sweep_cmd->add_option("--input", sweep.input, "Profile matrix CSV");
  sweep_cmd->add_option("--output-dir", sweep.output_dir, "Output directory")->required();
  sweep_cmd->add_option("--k-range", sweep.k_range, "Cluster counts, e.g. 1:15 or 2,4,8");
  sweep_cmd->add_option("--h-range", sweep.h_range, "Word counts at fixed --k");
  sweep_cmd->add_option("--k", sweep.k, "Fixed cluster count for --h-range");
  sweep_cmd->add_option("--table", sweep.table, "Select from an existing sweep.csv instead");
  sweep_cmd->add_option("--axis", sweep.axis, "K or H; inferred from the range when sweeping");
  add_fit_flags(*sweep_cmd, sweep.fit);

  BenchOptions bench;
  CLI::App* bench_cmd = add_command(app, "bench", "Misclassification benchmark on simulated data");
  bench_cmd->add_option("--output-dir", bench.output_dir, "Output directory")->required();
  bench_cmd->add_option("--alpha", bench.alpha, "Dirichlet concentration(s), comma separated");
  bench_cmd->add_option("--h0", bench.h0, "True number of words");
  bench_cmd->add_option("--k", bench.k, "Number of clusters");
  bench_cmd->add_option("--h-fit", bench.h_fit, "Words used by NMF-EM");
  bench_cmd->add_option("--replications", bench.replications, "Replications per alpha");
  bench_cmd->add_option("--m", bench.m, "Feature dimension");
  bench_cmd->add_option("--n", bench.n, "Individuals per dataset");
  bench_cmd->add_option("--trials", bench.trials, "Counts per individual");
  bench_cmd->add_option("--words", bench.words, "Word draws: dirichlet or uniform");
  bench_cmd->add_option("--methods", bench.methods, "Comma list of nmf-em, em, kmeans");
  add_fit_flags(*bench_cmd, bench.fit);

  ReportOptions report;
  CLI::App* report_cmd = add_command(app, "report", "Decompose a fitted model and assign rows");
  report_cmd->add_option("--model", report.model, "model.json from fit")->required();
  report_cmd->add_option("--input", report.input, "Profile matrix CSV")->required();
  report_cmd->add_option("--output-dir", report.output_dir, "Output directory")->required();

  try {
    std::vector<std::string> args = raw_args;
    if (!args.empty()) {
      if (CLI::App* sub = app.get_subcommand_no_throw(args[0])) args = expand_config(*sub, args);
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kUsage;
    }

    Invocation inv;
    inv.arguments = raw_args;
    inv.out = &out;
    inv.err = &err;
    CLI::App* chosen = app.get_subcommands().front();
    inv.command = chosen->get_name();
    inv.config = resolved_config(*chosen);
    if (chosen == ingest_cmd) return cmd_ingest(ingest, inv);
    if (chosen == fit_cmd) return cmd_fit(fit, inv);
    if (chosen == sweep_cmd) return cmd_sweep(sweep, inv);
    if (chosen == bench_cmd) return cmd_bench(bench, inv);
    return cmd_report(report, inv);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const EmptyInputError& e) {
    err << "error: " << e.what() << '\n';
    return kEmptyInput;
  } catch (const InsufficientDataError& e) {
    err << "error: " << e.what() << '\n';
    return kInsufficientData;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const nlohmann::json::exception& e) {
    err << "error: invalid JSON: " << e.what() << '\n';
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace nmfem::cli
