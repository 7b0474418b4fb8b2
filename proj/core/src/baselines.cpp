#include "nmfem/baselines.hpp"

#include <limits>
#include <random>
#include <string>
#include <utility>

#include "em_loop.hpp"
#include "nmfem/errors.hpp"
#include "nmfem/likelihood.hpp"
#include "nmfem/selection.hpp"

namespace nmfem {
namespace {

detail::RunOutcome run_plain_em(const CountDataset& data, FactoredMixture start,
                                const FitConfig& cfg, const TraceSink& sink) {
  return detail::run_em(data, std::move(start), cfg, sink,
                        [](const Responsibilities&, Vector weights, const WeightedCounts& mc,
                           const FactoredMixture& current, int) {
                          Matrix theta = mc.values;
                          for (Eigen::Index k = 0; k < theta.cols(); ++k) {
                            const double s = theta.col(k).sum();
                            if (s > 0.0) {
                              theta.col(k) /= s;
                            } else {
                              // Empty component keeps its parameter.
                              theta.col(k) = current.theta().col(k);
                            }
                          }
                          return std::pair{FactoredMixture::unrestricted(std::move(weights),
                                                                         std::move(theta)),
                                           1};
                        });
}

void fill_unrestricted_criteria(FitReport& report, const CountDataset& data) {
  report.dof = unrestricted_degrees_of_freedom(report.model.M(), report.model.K());
  const Criteria c = criteria_from_dof(report.loglik, report.dof, data.total());
  report.aic = c.aic;
  report.bic = c.bic;
}

double squared_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                        const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  return (a - b).squaredNorm();
}

// k-means++ seeding: first center uniform, then proportional to D^2.
Matrix seed_centers(const Matrix& points, int K, Rng& rng) {
  const Eigen::Index n = points.rows();
  Matrix centers(K, points.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = points.row(pick(rng));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), centers.row(0));
  for (int c = 1; c < K; ++c) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0 && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(c) = points.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), centers.row(c)));
    }
  }
  return centers;
}

KMeansResult lloyd(const Matrix& points, Matrix centers, int max_iterations) {
  const Eigen::Index n = points.rows();
  const int K = static_cast<int>(centers.rows());
  KMeansResult out;
  out.labels.assign(static_cast<std::size_t>(n), -1);
  Vector dist(n);

  for (int it = 1; it <= max_iterations; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < K; ++c) {
        const double d = squared_distance(points.row(i), centers.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      auto& label = out.labels[static_cast<std::size_t>(i)];
      if (label != best) changed = true;
      label = best;
      dist[i] = best_d;
      inertia += best_d;
    }
    out.inertia = inertia;
    out.inertia_trace.push_back(inertia);
    out.iterations = it;
    if (!changed) break;

    Matrix sums = Matrix::Zero(K, points.cols());
    std::vector<int> sizes(static_cast<std::size_t>(K), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = out.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++sizes[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < K; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / sizes[static_cast<std::size_t>(c)];
        continue;
      }
      // Empty cluster: move it onto the point farthest from its center.
      Eigen::Index far = 0;
      dist.maxCoeff(&far);
      centers.row(c) = points.row(far);
      dist[far] = 0.0;
    }
  }
  out.centers = std::move(centers);
  return out;
}

}  // namespace

FitReport fit_plain_em(const CountDataset& data, int K, const FitConfig& cfg,
                       const TraceSink& sink) {
  cfg.validate();
  if (K < 1 || K > data.n()) throw InvalidArgument("fit_plain_em requires 1 <= K <= n");
  std::mutex sink_lock;
  FitReport report = detail::best_of_restarts(cfg.n_restarts, cfg.threads, [&](int r) {
    if (r == 0 && cfg.start == StartStrategy::kKMeans) {
      KMeansStart s = kmeans_start(data, K, cfg.seed);
      return run_plain_em(data, FactoredMixture::unrestricted(std::move(s.weights), std::move(s.theta)),
                          cfg, detail::tagged_sink(sink, r, sink_lock));
    }
    Rng rng = make_rng(cfg.seed, "plain-em/init", static_cast<std::uint64_t>(r));
    Matrix theta = sample_dirichlet_columns(rng, data.M(), K, 1.0);
    Vector weights = Vector::Constant(K, 1.0 / K);
    return run_plain_em(data, FactoredMixture::unrestricted(std::move(weights), std::move(theta)),
                        cfg, detail::tagged_sink(sink, r, sink_lock));
  });
  report.seed = cfg.seed;
  fill_unrestricted_criteria(report, data);
  return report;
}

FitReport fit_plain_em_from(const CountDataset& data, const Vector& weights, const Matrix& theta,
                            const FitConfig& cfg, const TraceSink& sink) {
  cfg.validate();
  if (theta.rows() != data.M()) throw DimensionError("theta does not match the data");
  FitReport report = detail::best_of_restarts(1, 1, [&](int) {
    return run_plain_em(data, FactoredMixture::unrestricted(weights, theta), cfg, sink);
  });
  report.seed = cfg.seed;
  fill_unrestricted_criteria(report, data);
  return report;
}

KMeansStart kmeans_start(const CountDataset& data, int K, std::uint64_t seed) {
  constexpr double kSmoothing = 1e-3;
  constexpr int kRestarts = 50;
  const KMeansResult km = fit_kmeans(data, K, derive_seed(seed, "kmeans-start", 0), kRestarts);
  KMeansStart s;
  s.theta = km.centers.transpose().array() + kSmoothing;
  for (Eigen::Index k = 0; k < s.theta.cols(); ++k) s.theta.col(k) /= s.theta.col(k).sum();
  s.weights = Vector::Ones(K);
  for (int label : km.labels) s.weights(label) += 1.0;
  s.weights /= s.weights.sum();
  return s;
}

KMeansResult fit_kmeans_points(const Matrix& points, int K, std::uint64_t seed, int n_restarts,
                               int max_iterations) {
  if (K < 1) throw InvalidArgument("k-means requires K >= 1");
  if (K > points.rows()) {
    throw InvalidArgument("k-means requires K <= n (K = " + std::to_string(K) +
                          ", n = " + std::to_string(points.rows()) + ")");
  }
  if (n_restarts < 1) throw InvalidArgument("k-means requires at least one restart");
  KMeansResult best;
  bool have = false;
  for (int r = 0; r < n_restarts; ++r) {
    Rng rng = make_rng(seed, "kmeans", static_cast<std::uint64_t>(r));
    KMeansResult run = lloyd(points, seed_centers(points, K, rng), max_iterations);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

KMeansResult fit_kmeans(const CountDataset& data, int K, std::uint64_t seed, int n_restarts) {
  const Matrix proportions =
      data.counts_real().array().colwise() / data.row_totals().cast<double>().array();
  return fit_kmeans_points(proportions, K, seed, n_restarts);
}

}  // namespace nmfem
