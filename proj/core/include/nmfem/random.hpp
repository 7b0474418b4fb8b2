#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace nmfem {

using Rng = std::mt19937_64;

// Derives an independent seed for a named stream. Streams are addressed by
// (root, name, index) so that adding a new stream never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view stream,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

// Draws from a symmetric Dirichlet(alpha) on the simplex of size dim.
// Sampling is done in log space so that tiny concentrations (alpha << 1)
// do not underflow to an all-zero vector.
Eigen::VectorXd sample_dirichlet(Rng& rng, Eigen::Index dim, double alpha);

// Returns a rows x cols matrix whose columns are independent Dirichlet(alpha)
// draws.
Eigen::MatrixXd sample_dirichlet_columns(Rng& rng, Eigen::Index rows,
                                         Eigen::Index cols, double alpha);

}  // namespace nmfem
