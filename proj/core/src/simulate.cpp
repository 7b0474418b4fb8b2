#include "nmfem/simulate.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <utility>

#include "nmfem/baselines.hpp"
#include "nmfem/errors.hpp"
#include "nmfem/evaluation.hpp"
#include "nmfem/parallel.hpp"

namespace nmfem {

void SimulationSpec::validate() const {
  if (m < 2 || n < 1 || per_individual_trials < 1 || K < 1 || H0 < 1) {
    throw InvalidArgument("simulation sizes must be positive (m >= 2)");
  }
  if (H0 > K) throw InvalidArgument("simulation requires H0 <= K");
  if (!(alpha > 0.0)) throw InvalidArgument("simulation requires alpha > 0");
}

namespace {

// Multinomial draw by sequential conditional binomials.
void draw_multinomial(Rng& rng, const Eigen::Ref<const Vector>& probs, int trials,
                      Eigen::Ref<Eigen::Matrix<std::int64_t, 1, Eigen::Dynamic>> out) {
  int left = trials;
  double mass = 1.0;
  for (Eigen::Index j = 0; j < probs.size(); ++j) {
    if (left == 0) {
      out[j] = 0;
      continue;
    }
    if (j == probs.size() - 1 || mass <= 0.0) {
      out[j] = left;
      left = 0;
      continue;
    }
    const double p = std::clamp(probs[j] / mass, 0.0, 1.0);
    std::binomial_distribution<int> binom(left, p);
    const int draw = binom(rng);
    out[j] = draw;
    left -= draw;
    mass -= probs[j];
  }
}

}  // namespace

SimulatedData generate(const SimulationSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  Matrix words(spec.m, spec.H0);
  if (spec.words == WordDistribution::kNormalizedUniform) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index h = 0; h < words.cols(); ++h) {
      for (Eigen::Index j = 0; j < words.rows(); ++j) words(j, h) = unif(rng);
    }
    normalize_columns(words);
  } else {
    words = sample_dirichlet_columns(rng, spec.m, spec.H0, 1.0);
  }
  Matrix loadings = sample_dirichlet_columns(rng, spec.H0, spec.K, spec.alpha);
  FactoredMixture truth_model(Vector::Constant(spec.K, 1.0 / spec.K), std::move(words),
                              std::move(loadings));

  std::uniform_int_distribution<int> pick(0, spec.K - 1);
  std::vector<int> labels(static_cast<std::size_t>(spec.n));
  CountMatrix counts(spec.n, spec.m);
  for (int i = 0; i < spec.n; ++i) {
    const int k = pick(rng);
    labels[static_cast<std::size_t>(i)] = k;
    draw_multinomial(rng, truth_model.theta().col(k), spec.per_individual_trials, counts.row(i));
  }
  return {CountDataset(std::move(counts)), std::move(labels), std::move(truth_model)};
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kNmfEm:
      return "nmf-em";
    case Method::kPlainEm:
      return "em";
    case Method::kKMeans:
      return "kmeans";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (method_name(m) == name) return m;
  }
  throw InvalidArgument("unknown method '" + std::string(name) +
                        "' (expected nmf-em, em or kmeans)");
}

std::vector<Method> all_methods() { return {Method::kNmfEm, Method::kPlainEm, Method::kKMeans}; }

BenchmarkResult run_benchmark(const SimulationSpec& spec, int H_fit, int replications,
                              const FitConfig& cfg, const std::vector<Method>& methods,
                              int threads) {
  spec.validate();
  cfg.validate();
  if (replications < 1) throw InvalidArgument("benchmark needs at least one replication");
  if (H_fit < 1 || H_fit > spec.K) throw InvalidArgument("benchmark requires 1 <= H_fit <= K");
  if (methods.empty()) throw InvalidArgument("benchmark needs at least one method");

  struct Outcome {
    std::vector<double> rates;
    std::string error;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(replications));

  parallel_for(outcomes.size(), threads, [&](std::size_t r) {
    SimulationSpec rep = spec;
    rep.seed = derive_seed(spec.seed, "bench/data", r);
    FitConfig rep_cfg = cfg;
    rep_cfg.threads = 1;
    rep_cfg.seed = derive_seed(spec.seed, "bench/fit", r);
    try {
      const SimulatedData sim = generate(rep);
      for (Method m : methods) {
        std::vector<int> predicted;
        switch (m) {
          case Method::kNmfEm: {
            const FitReport f = fit(sim.data, spec.K, H_fit, rep_cfg);
            predicted = assign(e_step(sim.data, f.model)).labels;
            break;
          }
          case Method::kPlainEm: {
            const FitReport f = fit_plain_em(sim.data, spec.K, rep_cfg);
            predicted = assign(e_step(sim.data, f.model)).labels;
            break;
          }
          case Method::kKMeans: {
            predicted = fit_kmeans(sim.data, spec.K, derive_seed(spec.seed, "bench/kmeans", r),
                                   cfg.n_restarts)
                            .labels;
            break;
          }
        }
        outcomes[r].rates.push_back(pairwise_misclassification(sim.truth, predicted));
      }
    } catch (const Error& e) {
      outcomes[r].rates.clear();
      outcomes[r].error = "replication " + std::to_string(r) + ": " + e.what();
    }
  });

  BenchmarkResult result;
  std::vector<double> sums(methods.size(), 0.0);
  int ok = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    if (!outcomes[r].error.empty()) {
      result.failures.push_back(outcomes[r].error);
      continue;
    }
    ++ok;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      result.rows.push_back({std::string(method_name(methods[mi])), spec.alpha, spec.H0, H_fit,
                             static_cast<int>(r), outcomes[r].rates[mi]});
      sums[mi] += outcomes[r].rates[mi];
    }
  }
  if (ok == 0) {
    throw NumericalFailure("every benchmark replication failed; first: " + result.failures.front(),
                           0);
  }
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    result.summary.push_back(
        {std::string(method_name(methods[mi])), spec.alpha, sums[mi] / ok, ok});
  }
  return result;
}

}  // namespace nmfem
