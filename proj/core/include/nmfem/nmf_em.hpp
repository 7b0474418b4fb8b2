#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nmfem/model.hpp"
#include "nmfem/random.hpp"

namespace nmfem {

// How the inner factorization loop is started at each outer iteration.
enum class InitStrategy {
  // Start from the previous outer iterate; guarantees monotone likelihood.
  kWarmStart,
  // Fresh Dirichlet(1) factors every outer iteration.
  kRandomDirichlet,
};

// Renormalization applied inside the inner multiplicative loop.
enum class InnerNormalization {
  // Each dictionary column is rescaled to sum one and the matching loading row
  // absorbs the factor, leaving the product untouched. The divergence is then
  // non-increasing at every step.
  kCompensated,
  // Loading rows normalized over clusters and dictionary rows normalized over
  // words after every update. Does not preserve the product and may increase
  // the divergence; kept for comparison runs.
  kPrintedRows,
};

// Where restart 0 starts; the remaining restarts always use Dirichlet(1) draws.
enum class StartStrategy {
  kDirichlet,
  // Cluster centers from k-means on the row proportions, lightly smoothed.
  kKMeans,
};

struct FitConfig {
  double epsilon_outer = 1e-4;  // absolute change in log-likelihood
  double epsilon_inner = 1e-6;  // absolute change in the inner objective
  int max_outer_iters = 500;
  int max_inner_iters = 200;
  int n_restarts = 5;
  std::uint64_t seed = 0;
  InitStrategy init_strategy = InitStrategy::kWarmStart;
  StartStrategy start = StartStrategy::kDirichlet;
  InnerNormalization normalization = InnerNormalization::kCompensated;
  double zero_floor = 1e-12;
  // Hold the loadings at their starting value and update only the dictionary.
  // With H = K and identity loadings this reproduces unrestricted EM.
  bool fix_loadings = false;
  // Worker threads for restarts; <= 0 means all cores. Results do not depend on it.
  int threads = 1;

  void validate() const;
};

// M x K matrix of expected counts: values(j, k) = sum_i Y_ij t_ik.
struct WeightedCounts {
  Matrix values;
};

struct IterationRecord {
  int iteration = 0;
  double loglik = 0.0;
  int inner_iterations = 0;
  int restart = 0;
};

using TraceSink = std::function<void(const IterationRecord&)>;

struct FitReport {
  FactoredMixture model;
  double loglik = 0.0;
  std::vector<double> loglik_trace;  // entry 0 is the starting point
  std::vector<int> inner_iterations;  // one per outer iteration
  int outer_iterations = 0;
  bool converged = false;
  std::int64_t dof = 0;
  double aic = 0.0;
  double bic = 0.0;
  std::uint64_t seed = 0;  // root seed of the fit
  int best_restart = 0;
  int restarts_tried = 0;
  std::vector<std::string> failed_restarts;
};

struct MStepResult {
  Matrix dictionary;  // M x H, columns on the simplex
  Matrix loadings;    // H x K, columns on the simplex
  int iterations = 0;
  bool converged = false;
  // D(values || dictionary * loadings) of the working pair; entry 0 is the
  // starting pair, then one entry per inner iteration.
  std::vector<double> divergence_trace;
};

// Posterior membership probabilities by log-sum-exp over components.
// Throws DegenerateObservationError if a row is impossible under all components.
Responsibilities e_step(const CountDataset& data, const FactoredMixture& model);

struct EStepResult {
  Responsibilities responsibilities;
  double loglik;
};

// E-step plus the log-likelihood of the current model, sharing one pass.
EStepResult e_step_with_loglik(const CountDataset& data, const FactoredMixture& model);

// Column means of the responsibilities.
Vector update_weights(const Responsibilities& resp);

WeightedCounts weighted_counts(const CountDataset& data, const Responsibilities& resp);

// Generalized Kullback-Leibler divergence
// D(V || P) = sum_jk [ -V_jk log P_jk + P_jk ], with 0 log(.) = 0.
double kl_divergence(const Matrix& target, const Matrix& product);

// sum_jk V_jk log theta_jk where theta is product with columns normalized.
double expected_complete_objective(const Matrix& target, const Matrix& product);

// Nested multiplicative updates decreasing D(mc || dictionary * loadings).
// phi0 (M x H) and lambda0 (H x K) must be strictly positive and
// column-stochastic. The returned factors are column-stochastic.
MStepResult multiplicative_m_step(const WeightedCounts& mc, const Matrix& phi0,
                                  const Matrix& lambda0, const FitConfig& cfg);

// Uniform weights, Dirichlet(1) dictionary and loading columns.
FactoredMixture random_initial_model(Rng& rng, Eigen::Index M, Eigen::Index H,
                                     Eigen::Index K);

// NMF-EM with cfg.n_restarts seeded restarts; returns the best run.
FitReport fit(const CountDataset& data, int K, int H, const FitConfig& cfg,
              const TraceSink& sink = {});

// One NMF-EM run from a fixed starting model.
FitReport fit_from(const CountDataset& data, const FactoredMixture& start,
                   const FitConfig& cfg, const TraceSink& sink = {});

}  // namespace nmfem
