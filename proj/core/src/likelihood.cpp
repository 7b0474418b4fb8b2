#include "nmfem/likelihood.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nmfem/errors.hpp"

namespace nmfem {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

Matrix component_log_scores(const CountDataset& data, const FactoredMixture& model) {
  if (data.M() != model.M()) {
    throw DimensionError("dataset has " + std::to_string(data.M()) +
                         " features but model has " + std::to_string(model.M()));
  }
  const Matrix& theta = model.theta();
  const bool has_zero = (theta.array() <= 0.0).any();

  // log(0) would turn 0 * log(0) into NaN inside the product; substitute 1 and
  // patch the impossible entries afterwards.
  const Matrix log_theta = has_zero ? Matrix((theta.array() > 0.0).select(theta.array().log(), 0.0))
                                    : Matrix(theta.array().log());
  Matrix scores = data.counts_real() * log_theta;

  for (Eigen::Index k = 0; k < model.K(); ++k) {
    const double w = model.weights()[k];
    const double log_w = w > 0.0 ? std::log(w) : kNegInf;
    scores.col(k).array() += log_w;
  }

  if (has_zero) {
    const Matrix zero_mask = (theta.array() <= 0.0).cast<double>();
    const Matrix positive = (data.counts_real().array() > 0.0).cast<double>();
    const Matrix hits = positive * zero_mask;
    scores = (hits.array() > 0.0).select(kNegInf, scores);
  }
  return scores;
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double peak = v.maxCoeff();
  if (peak == kNegInf) return kNegInf;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) acc += std::exp(v[k] - peak);
  return peak + std::log(acc);
}

double log_likelihood_from_scores(const CountDataset& data, const Matrix& scores) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double row = log_sum_exp(scores.row(i));
    if (row == kNegInf) return kNegInf;
    total += row + data.log_multinomial_coefficients()[i];
  }
  return total;
}

double log_likelihood(const CountDataset& data, const FactoredMixture& model) {
  return log_likelihood_from_scores(data, component_log_scores(data, model));
}

std::int64_t degrees_of_freedom(std::int64_t M, std::int64_t H, std::int64_t K) {
  if (M < 2 || H < 1 || K < 1) {
    throw InvalidArgument("degrees_of_freedom requires M >= 2, H >= 1, K >= 1");
  }
  if (H > K) throw InvalidArgument("degrees_of_freedom requires H <= K");
  return H * (M - 1) + K * (H - 1) + K - 1;
}

std::int64_t unrestricted_degrees_of_freedom(std::int64_t M, std::int64_t K) {
  if (M < 2 || K < 1) {
    throw InvalidArgument("unrestricted_degrees_of_freedom requires M >= 2, K >= 1");
  }
  return K * (M - 1) + K - 1;
}

}  // namespace nmfem
