#include "nmfem/nmf_em.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "em_loop.hpp"
#include "nmfem/baselines.hpp"
#include "nmfem/errors.hpp"
#include "nmfem/likelihood.hpp"
#include "nmfem/selection.hpp"

namespace nmfem {

void FitConfig::validate() const {
  if (!(epsilon_outer > 0.0) || !(epsilon_inner > 0.0)) {
    throw InvalidArgument("tolerances must be positive");
  }
  if (max_outer_iters < 1 || max_inner_iters < 1) {
    throw InvalidArgument("iteration caps must be positive");
  }
  if (n_restarts < 1) throw InvalidArgument("n_restarts must be positive");
  if (!(zero_floor >= 0.0)) throw InvalidArgument("zero_floor must be nonnegative");
}

namespace detail {

Responsibilities softmax_rows(const Matrix& scores) {
  Matrix t(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double peak = scores.row(i).maxCoeff();
    if (peak == -std::numeric_limits<double>::infinity() || std::isnan(peak)) {
      throw DegenerateObservationError(static_cast<std::size_t>(i));
    }
    t.row(i) = (scores.row(i).array() - peak).exp();
    t.row(i) /= t.row(i).sum();
  }
  return Responsibilities(std::move(t));
}

}  // namespace detail

Responsibilities e_step(const CountDataset& data, const FactoredMixture& model) {
  return detail::softmax_rows(component_log_scores(data, model));
}

EStepResult e_step_with_loglik(const CountDataset& data, const FactoredMixture& model) {
  const Matrix scores = component_log_scores(data, model);
  return {detail::softmax_rows(scores), log_likelihood_from_scores(data, scores)};
}

Vector update_weights(const Responsibilities& resp) {
  Vector p = resp.values().colwise().sum().transpose();
  p /= p.sum();
  return p;
}

WeightedCounts weighted_counts(const CountDataset& data, const Responsibilities& resp) {
  if (data.n() != resp.n()) {
    throw DimensionError("dataset has " + std::to_string(data.n()) +
                         " rows but responsibilities have " + std::to_string(resp.n()));
  }
  return {data.counts_real().transpose() * resp.values()};
}

double kl_divergence(const Matrix& target, const Matrix& product) {
  double d = 0.0;
  for (Eigen::Index k = 0; k < target.cols(); ++k) {
    for (Eigen::Index j = 0; j < target.rows(); ++j) {
      const double v = target(j, k);
      const double p = product(j, k);
      if (v > 0.0) d -= v * std::log(p);
      d += p;
    }
  }
  return d;
}

double expected_complete_objective(const Matrix& target, const Matrix& product) {
  double q = 0.0;
  for (Eigen::Index k = 0; k < target.cols(); ++k) {
    const double log_norm = std::log(product.col(k).sum());
    for (Eigen::Index j = 0; j < target.rows(); ++j) {
      const double v = target(j, k);
      if (v > 0.0) q += v * (std::log(product(j, k)) - log_norm);
    }
  }
  return q;
}

namespace {

// target ./ product with 0 where the target is 0.
Matrix ratio(const Matrix& target, const Matrix& product) {
  return (target.array() > 0.0).select(target.array() / product.array(), 0.0);
}

void apply_floor(Matrix& m, double floor) {
  if (floor > 0.0) m = m.cwiseMax(floor);
}

void check_finite(const Matrix& m, const char* what, int iteration) {
  if (!m.allFinite()) throw NumericalFailure(std::string("non-finite ") + what, iteration);
}

void normalize_rows(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double s = m.row(r).sum();
    if (s > 0.0) m.row(r) /= s;
  }
}

// Scales dictionary columns to one, pushing the factors into the loading rows.
void compensate_dictionary(Matrix& phi, Matrix& lambda) {
  const Eigen::RowVectorXd s = phi.colwise().sum();
  for (Eigen::Index h = 0; h < phi.cols(); ++h) {
    phi.col(h) /= s[h];
    lambda.row(h) *= s[h];
  }
}

void require_positive_stochastic(const Matrix& m, const char* what) {
  if (!m.allFinite() || (m.array() <= 0.0).any()) {
    throw InvalidArgument(std::string(what) + " must be strictly positive");
  }
  if (!columns_on_simplex(m, kDerivedTolerance)) {
    throw InvalidArgument(std::string(what) + " columns must sum to one");
  }
}

}  // namespace

MStepResult multiplicative_m_step(const WeightedCounts& mc, const Matrix& phi0,
                                  const Matrix& lambda0, const FitConfig& cfg) {
  const Matrix& target = mc.values;
  if (phi0.rows() != target.rows() || lambda0.cols() != target.cols() ||
      phi0.cols() != lambda0.rows()) {
    throw DimensionError("factor shapes do not match the weighted-count matrix");
  }
  if ((target.array() < 0.0).any() || !target.allFinite()) {
    throw InvalidArgument("weighted counts must be nonnegative and finite");
  }
  require_positive_stochastic(phi0, "initial dictionary");
  if (cfg.fix_loadings) {
    // Fixed loadings are never multiplied, so zeros are harmless.
    if (!columns_on_simplex(lambda0, kDerivedTolerance)) {
      throw InvalidArgument("fixed loadings columns must sum to one");
    }
  } else {
    require_positive_stochastic(lambda0, "initial loadings");
  }

  const bool printed = cfg.normalization == InnerNormalization::kPrintedRows;
  Matrix phi = phi0;
  Matrix lambda = lambda0;
  Matrix product = phi * lambda;

  MStepResult out;
  out.divergence_trace.push_back(kl_divergence(target, product));
  double q = expected_complete_objective(target, product);

  for (int it = 1; it <= cfg.max_inner_iters; ++it) {
    if (!cfg.fix_loadings) {
      const Matrix num = phi.transpose() * ratio(target, product);
      const Vector den = phi.colwise().sum().transpose();
      lambda = lambda.cwiseProduct(num).array().colwise() / den.array();
      apply_floor(lambda, cfg.zero_floor);
      if (printed) normalize_rows(lambda);
      check_finite(lambda, "loadings", it);
      product = phi * lambda;
    }

    const Matrix num = ratio(target, product) * lambda.transpose();
    const Eigen::RowVectorXd den = lambda.rowwise().sum().transpose();
    phi = phi.cwiseProduct(num).array().rowwise() / den.array();
    apply_floor(phi, cfg.zero_floor);
    if (printed) {
      normalize_rows(phi);
    } else if (!cfg.fix_loadings) {
      compensate_dictionary(phi, lambda);
    }
    check_finite(phi, "dictionary", it);
    product = phi * lambda;

    out.iterations = it;
    out.divergence_trace.push_back(kl_divergence(target, product));
    const double q_next = expected_complete_objective(target, product);
    if (!std::isfinite(q_next)) throw NumericalFailure("non-finite inner objective", it);
    if (std::abs(q_next - q) < cfg.epsilon_inner) {
      out.converged = true;
      break;
    }
    q = q_next;
  }

  if (cfg.fix_loadings) {
    normalize_columns(phi);
  } else {
    compensate_dictionary(phi, lambda);
    normalize_columns(lambda);
  }
  out.dictionary = std::move(phi);
  out.loadings = std::move(lambda);
  return out;
}

FactoredMixture random_initial_model(Rng& rng, Eigen::Index M, Eigen::Index H, Eigen::Index K) {
  Matrix phi = sample_dirichlet_columns(rng, M, H, 1.0);
  Matrix lambda = sample_dirichlet_columns(rng, H, K, 1.0);
  return FactoredMixture(Vector::Constant(K, 1.0 / static_cast<double>(K)), std::move(phi),
                         std::move(lambda));
}

namespace {

detail::RunOutcome run_nmf_em(const CountDataset& data, FactoredMixture start,
                              const FitConfig& cfg, const TraceSink& sink, Rng& inner_rng) {
  const Eigen::Index M = start.M(), H = start.H(), K = start.K();
  return detail::run_em(
      data, std::move(start), cfg, sink,
      [&](const Responsibilities&, Vector weights, const WeightedCounts& mc,
          const FactoredMixture& current, int iteration) {
        Matrix phi0 = current.dictionary();
        Matrix lambda0 = current.loadings();
        if (cfg.init_strategy == InitStrategy::kRandomDirichlet && !cfg.fix_loadings) {
          phi0 = sample_dirichlet_columns(inner_rng, M, H, 1.0);
          lambda0 = sample_dirichlet_columns(inner_rng, H, K, 1.0);
        }
        MStepResult step;
        try {
          step = multiplicative_m_step(mc, phi0, lambda0, cfg);
        } catch (const InvalidArgument& e) {
          throw NumericalFailure(std::string("m-step rejected its start: ") + e.what(),
                                 iteration);
        }
        return std::pair{FactoredMixture(std::move(weights), std::move(step.dictionary),
                                         std::move(step.loadings)),
                         step.iterations};
      });
}

void fill_criteria(FitReport& report, const CountDataset& data) {
  report.dof = degrees_of_freedom(report.model.M(), report.model.H(), report.model.K());
  const Criteria c = criteria_from_dof(report.loglik, report.dof, data.total());
  report.aic = c.aic;
  report.bic = c.bic;
}

}  // namespace

namespace {

// Factorizes the smoothed k-means centers, weighted by cluster share, starting
// from the random draw so that both factors stay strictly positive.
FactoredMixture kmeans_factored_start(const CountDataset& data, const FactoredMixture& random,
                                      const FitConfig& cfg) {
  const Eigen::Index K = random.K();
  KMeansStart s = kmeans_start(data, static_cast<int>(K), cfg.seed);
  WeightedCounts target{s.theta * s.weights.asDiagonal() * static_cast<double>(data.total())};
  FitConfig inner = cfg;
  inner.normalization = InnerNormalization::kCompensated;
  inner.fix_loadings = false;
  MStepResult m = multiplicative_m_step(target, random.dictionary(), random.loadings(), inner);
  return FactoredMixture(std::move(s.weights), std::move(m.dictionary), std::move(m.loadings));
}

}  // namespace

FitReport fit(const CountDataset& data, int K, int H, const FitConfig& cfg,
              const TraceSink& sink) {
  cfg.validate();
  if (K < 1 || H < 1 || H > K) throw InvalidArgument("fit requires 1 <= H <= K");
  if (K > data.n()) throw InvalidArgument("fit requires K <= n");
  std::mutex sink_lock;
  FitReport report = detail::best_of_restarts(cfg.n_restarts, cfg.threads, [&](int r) {
    Rng init_rng = make_rng(cfg.seed, "nmf-em/init", static_cast<std::uint64_t>(r));
    Rng inner_rng = make_rng(cfg.seed, "nmf-em/inner", static_cast<std::uint64_t>(r));
    FactoredMixture start = random_initial_model(init_rng, data.M(), H, K);
    if (r == 0 && cfg.start == StartStrategy::kKMeans) start = kmeans_factored_start(data, start, cfg);
    return run_nmf_em(data, std::move(start), cfg, detail::tagged_sink(sink, r, sink_lock), inner_rng);
  });
  report.seed = cfg.seed;
  fill_criteria(report, data);
  return report;
}

FitReport fit_from(const CountDataset& data, const FactoredMixture& start, const FitConfig& cfg,
                   const TraceSink& sink) {
  cfg.validate();
  if (start.M() != data.M()) throw DimensionError("starting model does not match the data");
  FitReport report = detail::best_of_restarts(1, 1, [&](int) {
    Rng inner_rng = make_rng(cfg.seed, "nmf-em/inner", 0);
    return run_nmf_em(data, start, cfg, sink, inner_rng);
  });
  report.seed = cfg.seed;
  fill_criteria(report, data);
  return report;
}

}  // namespace nmfem
