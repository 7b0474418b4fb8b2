#pragma once

// Outer EM loop and restart driver shared by NMF-EM and unrestricted EM.

#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nmfem/errors.hpp"
#include "nmfem/likelihood.hpp"
#include "nmfem/nmf_em.hpp"
#include "nmfem/parallel.hpp"

namespace nmfem::detail {

struct RunOutcome {
  FactoredMixture model;
  std::vector<double> trace;
  std::vector<int> inner;
  bool converged = false;
};

// Responsibilities from precomputed component scores.
Responsibilities softmax_rows(const Matrix& scores);

// update(resp, weights, counts, current, iteration) returns the next model and
// the number of inner iterations it used.
template <class Update>
RunOutcome run_em(const CountDataset& data, FactoredMixture start, const FitConfig& cfg,
                  const TraceSink& sink, Update&& update) {
  RunOutcome out{std::move(start), {}, {}, false};
  for (int c = 0;; ++c) {
    const Matrix scores = component_log_scores(data, out.model);
    const double ll = log_likelihood_from_scores(data, scores);
    if (!std::isfinite(ll)) throw NumericalFailure("non-finite log-likelihood", c);
    out.trace.push_back(ll);
    if (sink) sink({c, ll, c == 0 ? 0 : out.inner.back()});
    if (c > 0 && std::abs(ll - out.trace[out.trace.size() - 2]) < cfg.epsilon_outer) {
      out.converged = true;
      break;
    }
    if (c == cfg.max_outer_iters) break;

    const Responsibilities resp = softmax_rows(scores);
    Vector weights = update_weights(resp);
    const WeightedCounts mc = weighted_counts(data, resp);
    auto [next, inner] = update(resp, std::move(weights), mc, out.model, c + 1);
    out.model = std::move(next);
    out.inner.push_back(inner);
  }
  return out;
}

// Wraps a sink so that concurrent restarts report under their own index and
// never call it at the same time.
inline TraceSink tagged_sink(const TraceSink& sink, int restart, std::mutex& lock) {
  if (!sink) return {};
  return [&sink, &lock, restart](const IterationRecord& record) {
    IterationRecord tagged = record;
    tagged.restart = restart;
    std::lock_guard guard(lock);
    sink(tagged);
  };
}

// Runs attempt(r) for each restart r, keeping the best final log-likelihood
// (lowest index on ties). Restarts may run concurrently; the choice never
// depends on the thread count. Numerical and degenerate-row failures discard the
// restart; the fit fails only when every restart does.
template <class Attempt>
FitReport best_of_restarts(int n_restarts, int threads, Attempt&& attempt) {
  std::vector<std::optional<RunOutcome>> runs(static_cast<std::size_t>(n_restarts));
  std::vector<std::string> errors(static_cast<std::size_t>(n_restarts));
  parallel_for(runs.size(), threads, [&](std::size_t r) {
    try {
      runs[r] = attempt(static_cast<int>(r));
    } catch (const NumericalFailure& e) {
      errors[r] = e.what();
    } catch (const DegenerateObservationError& e) {
      errors[r] = e.what();
    }
  });
  std::optional<RunOutcome> best;
  int best_index = 0;
  std::vector<std::string> failures;
  for (int r = 0; r < n_restarts; ++r) {
    auto& run = runs[static_cast<std::size_t>(r)];
    if (!run) {
      failures.push_back("restart " + std::to_string(r) + ": " + errors[static_cast<std::size_t>(r)]);
    } else if (!best || run->trace.back() > best->trace.back()) {
      best = std::move(run);
      best_index = r;
    }
  }
  if (!best) {
    throw NumericalFailure("all " + std::to_string(n_restarts) + " restarts failed; first: " +
                               (failures.empty() ? std::string("none") : failures.front()),
                           0);
  }
  FitReport report{std::move(best->model), 0.0, {}, {}, 0, false, 0, 0.0, 0.0, 0, 0, 0, {}};
  report.loglik = best->trace.back();
  report.loglik_trace = std::move(best->trace);
  report.inner_iterations = std::move(best->inner);
  report.outer_iterations = static_cast<int>(report.inner_iterations.size());
  report.converged = best->converged;
  report.best_restart = best_index;
  report.restarts_tried = n_restarts;
  report.failed_restarts = std::move(failures);
  return report;
}

}  // namespace nmfem::detail
