#pragma once

#include <cstdint>
#include <vector>

#include "nmfem/model.hpp"
#include "nmfem/nmf_em.hpp"

namespace nmfem {

// Unrestricted multinomial-mixture EM (H = K, loadings = identity) with the
// closed-form M-step theta_k = normalized column k of the weighted counts.
// The report records H = K and the unrestricted dof K(M-1) + K-1.
FitReport fit_plain_em(const CountDataset& data, int K, const FitConfig& cfg,
                       const TraceSink& sink = {});

// One unrestricted EM run from the given weights and M x K theta.
FitReport fit_plain_em_from(const CountDataset& data, const Vector& weights, const Matrix& theta,
                            const FitConfig& cfg, const TraceSink& sink = {});

struct KMeansResult {
  Matrix centers;           // K x M
  std::vector<int> labels;  // 0-based
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> inertia_trace;  // after each assignment step
};

inline constexpr int kKMeansMaxIterations = 300;

// Lloyd's algorithm with k-means++ seeding on the row proportions Y_i / N_i.
KMeansResult fit_kmeans(const CountDataset& data, int K, std::uint64_t seed, int n_restarts);

// Same on arbitrary points (one per row).
KMeansResult fit_kmeans_points(const Matrix& points, int K, std::uint64_t seed, int n_restarts,
                               int max_iterations = kKMeansMaxIterations);

struct KMeansStart {
  Vector weights;  // smoothed cluster shares
  Matrix theta;    // M x K smoothed centers, strictly positive
};

// Starting point for the mixture fits derived from k-means on the proportions.
KMeansStart kmeans_start(const CountDataset& data, int K, std::uint64_t seed);

}  // namespace nmfem
