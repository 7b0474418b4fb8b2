#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nmfem::cli {

// Bad flag values or combinations the parser cannot catch on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Invocation {
  std::string command;
  std::vector<std::string> arguments;
  nlohmann::json config;  // resolved option values
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

struct FitFlags {
  int restarts = 5;
  double epsilon = 1e-4;
  int max_iters = 500;
  double inner_epsilon = 1e-6;
  int max_inner_iters = 200;
  std::uint64_t seed = 0;
  int threads = 0;  // all cores
  std::string init = "warm";
  std::string start = "dirichlet";
  std::string inner_normalization = "compensated";
  bool verbose = false;
};

struct IngestOptions {
  std::string input;
  std::string output_dir;
  int min_active_days = 4;
  double home_threshold = 0.5;
  int cutoff_hour = 4;
  double bad_row_budget = 0.01;
};

struct FitOptions {
  std::string input;
  std::string output_dir;
  int k = 0;
  int h = 0;
  FitFlags fit;
};

struct SweepOptions {
  std::string input;
  std::string output_dir;
  std::string k_range;
  std::string h_range;
  int k = 0;
  std::string table;
  std::string axis;
  FitFlags fit;
};

struct BenchOptions {
  std::string output_dir;
  std::string alpha = "0.2";
  int h0 = 4;
  int k = 10;
  int h_fit = 4;
  int replications = 10;
  int m = 100;
  int n = 1500;
  int trials = 150;
  std::string words = "dirichlet";
  std::string methods = "nmf-em,em,kmeans";
  FitFlags fit;
};

struct ReportOptions {
  std::string model;
  std::string input;
  std::string output_dir;
};

int cmd_ingest(const IngestOptions& o, const Invocation& inv);
int cmd_fit(const FitOptions& o, const Invocation& inv);
int cmd_sweep(const SweepOptions& o, const Invocation& inv);
int cmd_bench(const BenchOptions& o, const Invocation& inv);
int cmd_report(const ReportOptions& o, const Invocation& inv);

// "3", "1:12", "1..12" or "2,4,8"; ascending, no duplicates.
std::vector<int> parse_int_range(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace nmfem::cli
