#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nmfem/nmfem.hpp>

#include "cli.hpp"
#include "output.hpp"

namespace nmfem::cli {
namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, sep)) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    out.push_back(item);
  }
  return out;
}

int to_int(const std::string& text) {
  int v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) throw UsageError("not an integer: '" + text + "'");
  return v;
}

FitConfig make_fit_config(const FitFlags& f) {
  FitConfig cfg;
  cfg.n_restarts = f.restarts;
  cfg.epsilon_outer = f.epsilon;
  cfg.max_outer_iters = f.max_iters;
  cfg.epsilon_inner = f.inner_epsilon;
  cfg.max_inner_iters = f.max_inner_iters;
  cfg.seed = f.seed;
  cfg.threads = f.threads;
  if (f.init == "warm") {
    cfg.init_strategy = InitStrategy::kWarmStart;
  } else if (f.init == "random") {
    cfg.init_strategy = InitStrategy::kRandomDirichlet;
  } else {
    throw UsageError("--init must be 'warm' or 'random'");
  }
  if (f.start == "dirichlet") {
    cfg.start = StartStrategy::kDirichlet;
  } else if (f.start == "kmeans") {
    cfg.start = StartStrategy::kKMeans;
  } else {
    throw UsageError("--start must be 'dirichlet' or 'kmeans'");
  }
  if (f.inner_normalization == "compensated") {
    cfg.normalization = InnerNormalization::kCompensated;
  } else if (f.inner_normalization == "printed") {
    cfg.normalization = InnerNormalization::kPrintedRows;
  } else {
    throw UsageError("--inner-normalization must be 'compensated' or 'printed'");
  }
  cfg.validate();
  return cfg;
}

TraceSink verbose_sink(const FitFlags& f, std::ostream& err, std::string prefix = {}) {
  if (!f.verbose) return {};
  return [&err, prefix = std::move(prefix)](const IterationRecord& r) {
    err << prefix << "restart=" << r.restart << " iteration=" << r.iteration
        << " loglik=" << format_double(r.loglik) << " inner=" << r.inner_iterations << '\n';
  };
}

CountDataset load_profiles(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return read_profiles_csv(in);
}

template <class Writer>
std::string render(Writer&& write) {
  std::ostringstream s;
  write(s);
  return s.str();
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::vector<int> parse_int_range(const std::string& text) {
  std::vector<int> out;
  const auto colon = text.find(':');
  const auto dots = text.find("..");
  if (colon != std::string::npos || dots != std::string::npos) {
    const auto cut = colon != std::string::npos ? colon : dots;
    const int lo = to_int(text.substr(0, cut));
    const int hi = to_int(text.substr(cut + (colon != std::string::npos ? 1 : 2)));
    if (hi < lo) throw UsageError("empty range '" + text + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  } else {
    for (const auto& item : split(text, ',')) out.push_back(to_int(item));
  }
  if (out.empty()) throw UsageError("empty range");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw UsageError("range must be strictly ascending: '" + text + "'");
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    double v = 0.0;
    const auto* end = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(item.data(), end, v);
    if (item.empty() || ec != std::errc() || ptr != end) throw UsageError("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

int cmd_ingest(const IngestOptions& o, const Invocation& inv) {
  ProfileBuildConfig cfg;
  cfg.min_active_days = o.min_active_days;
  cfg.home_station_threshold = o.home_threshold;
  cfg.first_boarding_cutoff_hour = o.cutoff_hour;
  cfg.bad_row_budget = o.bad_row_budget;
  cfg.validate();

  const ProfileSet profiles = ingest_file(o.input, cfg);
  OutputSet outputs(o.output_dir, inv.command, inv.arguments, inv.config);
  outputs.add_input(o.input);
  outputs.emit("profiles.csv", render([&](std::ostream& s) { write_profiles_csv(s, profiles.data); }));
  outputs.emit("home_stations.csv", render([&](std::ostream& s) {
    s << "card_id,home_station\n";
    for (std::size_t i = 0; i < profiles.card_index.size(); ++i) {
      s << profiles.card_index[i] << ',' << profiles.home_stations[i] << '\n';
    }
  }));
  outputs.emit("ingest_summary.json", dump({{"cards_seen", profiles.cards_seen},
                                            {"cards_kept", profiles.card_index.size()},
                                            {"events_used", profiles.events_used}}));
  outputs.finish(std::nullopt, kOk);
  *inv.out << "kept " << profiles.card_index.size() << " of " << profiles.cards_seen
           << " cards\n";
  return kOk;
}

int cmd_fit(const FitOptions& o, const Invocation& inv) {
  if (o.k < 1 || o.h < 1) throw UsageError("--k and --h must be positive");
  if (o.h > o.k) throw UsageError("--h must not exceed --k");
  const FitConfig cfg = make_fit_config(o.fit);
  const CountDataset data = load_profiles(o.input);

  const FitReport report = fit(data, o.k, o.h, cfg, verbose_sink(o.fit, *inv.err));
  OutputSet outputs(o.output_dir, inv.command, inv.arguments, inv.config);
  outputs.add_input(o.input);
  outputs.emit("model.json", dump(model_to_json(report.model, data.feature_labels())));
  outputs.emit("fit_report.json", dump(fit_report_to_json(report)));
  outputs.emit("trace.csv", render([&](std::ostream& s) { write_trace_csv(s, report); }));
  for (const auto& f : report.failed_restarts) outputs.warn(f);
  const int code = report.converged ? kOk : kNotConverged;
  if (!report.converged) {
    outputs.warn("stopped at --max-iters before the log-likelihood change fell below --epsilon");
  }
  outputs.finish(cfg.seed, code);
  *inv.out << "loglik " << format_double(report.loglik) << " after " << report.outer_iterations
           << " iterations" << (report.converged ? "" : " (not converged)") << '\n';
  return code;
}

int cmd_sweep(const SweepOptions& o, const Invocation& inv) {
  if (!o.table.empty()) {
    if (!o.k_range.empty() || !o.h_range.empty() || !o.input.empty()) {
      throw UsageError("--table cannot be combined with --input, --k-range or --h-range");
    }
    const std::string axis_name = o.axis.empty() ? "K" : o.axis;
    if (axis_name != "K" && axis_name != "H") throw UsageError("--axis must be K or H");
    const SweepAxis axis = axis_name == "K" ? SweepAxis::kK : SweepAxis::kH;
    std::ifstream in(o.table, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + o.table + "'");
    const SweepTable table = read_sweep_csv(in);
    const SlopeSelection selection = slope_select(table, axis);
    OutputSet outputs(o.output_dir, inv.command, inv.arguments, inv.config);
    outputs.add_input(o.table);
    outputs.emit("selection.json", dump(slope_selection_to_json(selection, axis)));
    outputs.finish(std::nullopt, kOk);
    *inv.out << "selected " << axis_name << "=" << selection.chosen << '\n';
    return kOk;
  }

  if (o.input.empty()) throw UsageError("sweep needs --input or --table");
  if (o.k_range.empty() == o.h_range.empty()) {
    throw UsageError("give exactly one of --k-range or --h-range");
  }
  const bool by_k = !o.k_range.empty();
  if (!o.axis.empty() && o.axis != (by_k ? "K" : "H")) {
    throw UsageError("--axis disagrees with the swept range");
  }
  if (!by_k && o.k < 1) throw UsageError("--h-range needs --k");
  const std::vector<int> values = parse_int_range(by_k ? o.k_range : o.h_range);
  if (values.size() < 4) {
    throw InsufficientDataError("slope selection needs at least 4 swept values, got " +
                                std::to_string(values.size()));
  }
  const FitConfig cfg = make_fit_config(o.fit);
  const CountDataset data = load_profiles(o.input);

  const SweepTable table = by_k ? sweep_K(data, values, cfg, cfg.threads)
                                : sweep_H(data, o.k, values, cfg, cfg.threads);
  OutputSet outputs(o.output_dir, inv.command, inv.arguments, inv.config);
  outputs.add_input(o.input);
  outputs.emit("sweep.csv", render([&](std::ostream& s) { write_sweep_csv(s, table); }));
  for (const auto& f : table.failures) {
    outputs.warn("K=" + std::to_string(f.K) + " H=" + std::to_string(f.H) + ": " + f.message);
    *inv.err << "warning: K=" << f.K << " H=" << f.H << " failed: " << f.message << '\n';
  }
  if (o.fit.verbose) {
    for (const auto& r : table.records) {
      *inv.err << "K=" << r.K << " H=" << r.H << " loglik=" << format_double(r.loglik)
               << " dof=" << r.dof << '\n';
    }
  }
  const SweepAxis axis = by_k ? SweepAxis::kK : SweepAxis::kH;
  try {
    const SlopeSelection selection = slope_select(table, axis);
    outputs.emit("selection.json", dump(slope_selection_to_json(selection, axis)));
    outputs.finish(cfg.seed, kOk);
    *inv.out << "selected " << (by_k ? "K" : "H") << "=" << selection.chosen << '\n';
    return kOk;
  } catch (const InsufficientDataError& e) {
    outputs.warn(e.what());
    outputs.finish(cfg.seed, kInsufficientData);
    throw;
  }
}

int cmd_bench(const BenchOptions& o, const Invocation& inv) {
  std::vector<Method> methods;
  for (const auto& name : split(o.methods, ',')) {
    Method m;
    try {
      m = parse_method(name);
    } catch (const InvalidArgument&) {
      throw UsageError("unknown method '" + name + "' (expected nmf-em, em or kmeans)");
    }
    if (std::find(methods.begin(), methods.end(), m) != methods.end()) {
      throw UsageError("method '" + name + "' listed twice");
    }
    methods.push_back(m);
  }
  if (methods.empty()) throw UsageError("--methods is empty");
  if (o.words != "dirichlet" && o.words != "uniform") {
    throw UsageError("--words must be 'dirichlet' or 'uniform'");
  }
  const std::vector<double> alphas = parse_double_list(o.alpha);
  const FitConfig cfg = make_fit_config(o.fit);

  BenchmarkResult all;
  for (double alpha : alphas) {
    SimulationSpec spec;
    spec.m = o.m;
    spec.n = o.n;
    spec.per_individual_trials = o.trials;
    spec.K = o.k;
    spec.H0 = o.h0;
    spec.alpha = alpha;
    spec.seed = cfg.seed;
    spec.words = o.words == "uniform" ? WordDistribution::kNormalizedUniform
                                      : WordDistribution::kDirichletOne;
    spec.validate();
    if (o.h_fit < 1 || o.h_fit > o.k) throw UsageError("--h-fit must lie in 1..K");
    if (o.replications < 1) throw UsageError("--replications must be positive");
    BenchmarkResult cell =
        run_benchmark(spec, o.h_fit, o.replications, cfg, methods, cfg.threads);
    if (o.fit.verbose) {
      for (const auto& s : cell.summary) {
        *inv.err << "alpha=" << format_double(alpha) << ' ' << s.method
                 << " mean_rate=" << format_double(s.mean_rate) << '\n';
      }
    }
    all.rows.insert(all.rows.end(), cell.rows.begin(), cell.rows.end());
    all.summary.insert(all.summary.end(), cell.summary.begin(), cell.summary.end());
    for (auto& f : cell.failures) all.failures.push_back("alpha=" + format_double(alpha) + ": " + f);
  }

  OutputSet outputs(o.output_dir, inv.command, inv.arguments, inv.config);
  outputs.emit("bench.csv", render([&](std::ostream& s) { write_benchmark_csv(s, all); }));
  outputs.emit("bench_summary.csv",
               render([&](std::ostream& s) { write_benchmark_summary_csv(s, all); }));
  for (const auto& f : all.failures) {
    outputs.warn(f);
    *inv.err << "warning: excluded replication, " << f << '\n';
  }
  outputs.finish(cfg.seed, kOk);
  for (const auto& s : all.summary) {
    *inv.out << "alpha=" << format_double(s.alpha) << ' ' << s.method << ' '
             << format_double(s.mean_rate) << " over " << s.replications << " replications\n";
  }
  return kOk;
}

int cmd_report(const ReportOptions& o, const Invocation& inv) {
  const LabeledModel labeled = model_from_json(nlohmann::json::parse(read_file(o.model)));
  const CountDataset data = load_profiles(o.input);
  const FactoredMixture& model = labeled.model;
  if (model.M() != data.M()) {
    throw UsageError("model has " + std::to_string(model.M()) + " features but the profiles have " +
                     std::to_string(data.M()));
  }
  if (!labeled.feature_labels.empty() && labeled.feature_labels != data.feature_labels()) {
    throw UsageError("model feature labels differ from the profile columns");
  }

  const Responsibilities resp = e_step(data, model);
  const HardAssignment hard = assign(resp);
  const DecompositionReport report = decomposition_report(model, data.feature_labels());

  std::vector<std::int64_t> sizes(static_cast<std::size_t>(model.K()), 0);
  for (int z : hard.labels) ++sizes[static_cast<std::size_t>(z)];
  nlohmann::json j = decomposition_to_json(report);
  j["loglik"] = log_likelihood(data, model);
  j["n"] = data.n();
  j["cluster_sizes"] = sizes;

  OutputSet outputs(o.output_dir, inv.command, inv.arguments, inv.config);
  outputs.add_input(o.model);
  outputs.add_input(o.input);
  outputs.emit("report.json", dump(j));
  outputs.emit("heatmap.csv", render([&](std::ostream& s) { write_decomposition_csv(s, report); }));
  outputs.emit("assignments.csv",
               render([&](std::ostream& s) { write_assignments_csv(s, data, hard, resp); }));
  outputs.finish(std::nullopt, kOk);
  *inv.out << "assigned " << data.n() << " rows to " << model.K() << " clusters\n";
  return kOk;
}

}  // namespace nmfem::cli
