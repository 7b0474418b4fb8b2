#pragma once

#include <cstdint>

#include "nmfem/model.hpp"

namespace nmfem {

// n x K matrix with entries log p_k + sum_j Y_ij log theta_jk. Entries are
// -infinity where theta_jk = 0 for some j with Y_ij > 0. Multinomial
// coefficients are omitted since they cancel in posteriors.
Matrix component_log_scores(const CountDataset& data, const FactoredMixture& model);

// Full mixture log-likelihood including multinomial coefficients. Returns
// -infinity (never throws) when an observation is impossible under every
// component.
double log_likelihood(const CountDataset& data, const FactoredMixture& model);

// Same as log_likelihood but from precomputed component_log_scores.
double log_likelihood_from_scores(const CountDataset& data, const Matrix& scores);

// Free parameters of the factored mixture: H(M-1) + K(H-1) + K-1.
std::int64_t degrees_of_freedom(std::int64_t M, std::int64_t H, std::int64_t K);

// Free parameters of an unrestricted K-component multinomial mixture:
// K(M-1) + K-1.
std::int64_t unrestricted_degrees_of_freedom(std::int64_t M, std::int64_t K);

// log sum_k exp(v_k), stable; -infinity if every entry is -infinity.
double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v);

}  // namespace nmfem
