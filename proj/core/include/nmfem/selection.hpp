#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nmfem/model.hpp"
#include "nmfem/nmf_em.hpp"

namespace nmfem {

struct Criteria {
  double aic = 0.0;
  double bic = 0.0;
};

// aic = loglik - dof/2, bic = loglik - dof log(N)/2, N the total count.
Criteria criteria_from_dof(double loglik, std::int64_t dof, std::int64_t total_count);

// Criteria with dof = H(M-1) + K(H-1) + K-1.
Criteria criteria(double loglik, std::int64_t M, std::int64_t H, std::int64_t K,
                  std::int64_t total_count);

struct SweepRecord {
  int K = 0;
  int H = 0;
  double loglik = 0.0;
  std::int64_t dof = 0;
  double aic = 0.0;
  double bic = 0.0;
  std::uint64_t seed = 0;
};

struct SweepFailure {
  int K = 0;
  int H = 0;
  std::string message;
};

struct SweepTable {
  std::vector<SweepRecord> records;  // ordered by (K, H)
  std::vector<SweepFailure> failures;
};

enum class SweepAxis { kK, kH };

struct SlopeSelection {
  int chosen = 0;
  double slope = 0.0;
  double intercept = 0.0;
  int linear_region_start = 0;
  std::vector<int> axis_values;
  std::vector<double> penalized_values;
};

// Unrestricted EM (H = K) for each K; dof uses the unrestricted count.
// Cells run on up to `threads` worker threads; results do not depend on it.
SweepTable sweep_K(const CountDataset& data, const std::vector<int>& k_range,
                   const FitConfig& cfg, int threads = 1);

// NMF-EM at fixed K for each H.
SweepTable sweep_H(const CountDataset& data, int K, const std::vector<int>& h_range,
                   const FitConfig& cfg, int threads = 1);

// Slope heuristic: regresses loglik on dof over the suffix (length >= 4) with
// the smallest residual standard error, preferring the longest suffix on ties,
// then maximizes loglik - 2 * slope * dof.
SlopeSelection slope_select(const SweepTable& table, SweepAxis axis);

}  // namespace nmfem
