#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nmfem/model.hpp"
#include "nmfem/nmf_em.hpp"

namespace nmfem {

enum class WordDistribution {
  // Uniform on the simplex, i.e. Dirichlet(1).
  kDirichletOne,
  // i.i.d. Uniform(0,1) coordinates, then normalized to the simplex. Words
  // drawn this way are all close to the flat profile.
  kNormalizedUniform,
};

struct SimulationSpec {
  int m = 100;                      // features
  int n = 1500;                     // individuals
  int per_individual_trials = 150;  // N_i for every row
  int K = 10;
  int H0 = 4;  // true number of words
  double alpha = 0.2;
  std::uint64_t seed = 0;
  WordDistribution words = WordDistribution::kDirichletOne;

  void validate() const;
};

struct SimulatedData {
  CountDataset data;
  std::vector<int> truth;  // 0-based component of each row
  FactoredMixture true_model;
};

// Draws H0 words, K Dirichlet(alpha) loading columns, uniform labels and
// multinomial counts. Fully determined by spec.seed.
SimulatedData generate(const SimulationSpec& spec);

enum class Method { kNmfEm, kPlainEm, kKMeans };

std::string_view method_name(Method m);
// Accepts "nmf-em", "em", "kmeans"; throws InvalidArgument otherwise.
Method parse_method(std::string_view name);
std::vector<Method> all_methods();

struct BenchmarkRow {
  std::string method;
  double alpha = 0.0;
  int H0 = 0;
  int H_fit = 0;
  int replication = 0;
  double rate = 0.0;
};

struct BenchmarkSummary {
  std::string method;
  double alpha = 0.0;
  double mean_rate = 0.0;
  int replications = 0;  // successful replications averaged
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;  // ordered by replication, then method
  std::vector<BenchmarkSummary> summary;
  std::vector<std::string> failures;  // one per excluded replication
};

// For each replication: generate, fit every requested method with K = spec.K,
// and score against the truth. Replication r uses seeds derived from
// (spec.seed, r); a replication where any method fails is excluded.
BenchmarkResult run_benchmark(const SimulationSpec& spec, int H_fit, int replications,
                              const FitConfig& cfg,
                              const std::vector<Method>& methods = all_methods(),
                              int threads = 1);

}  // namespace nmfem
