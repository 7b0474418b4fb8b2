#include "nmfem/model.hpp"

#include <cmath>
#include <utility>

#include "nmfem/errors.hpp"

namespace nmfem {

CountDataset::CountDataset(CountMatrix counts, std::vector<std::string> feature_labels,
                           std::vector<std::string> row_keys)
    : counts_(std::move(counts)),
      feature_labels_(std::move(feature_labels)),
      row_keys_(std::move(row_keys)) {
  if (counts_.rows() < 1) throw InvalidArgument("dataset needs at least one row");
  if (counts_.cols() < 2) throw InvalidArgument("dataset needs at least two columns");
  if ((counts_.array() < 0).any()) throw InvalidArgument("counts must be nonnegative");

  if (feature_labels_.empty()) {
    feature_labels_.reserve(static_cast<std::size_t>(M()));
    for (Eigen::Index j = 0; j < M(); ++j) feature_labels_.push_back("f" + std::to_string(j + 1));
  } else if (static_cast<Eigen::Index>(feature_labels_.size()) != M()) {
    throw DimensionError("feature label count " + std::to_string(feature_labels_.size()) +
                         " does not match " + std::to_string(M()) + " columns");
  }
  if (!row_keys_.empty() && static_cast<Eigen::Index>(row_keys_.size()) != n()) {
    throw DimensionError("row key count does not match row count");
  }

  row_totals_ = counts_.rowwise().sum();
  for (Eigen::Index i = 0; i < n(); ++i) {
    if (row_totals_[i] <= 0) {
      throw InvalidArgument("row " + std::to_string(i) + " has no positive count");
    }
  }
  total_ = row_totals_.sum();
  counts_real_ = counts_.cast<double>();

  log_coefficients_.resize(n());
  for (Eigen::Index i = 0; i < n(); ++i) {
    double c = std::lgamma(static_cast<double>(row_totals_[i]) + 1.0);
    for (Eigen::Index j = 0; j < M(); ++j) {
      if (counts_(i, j) > 1) c -= std::lgamma(static_cast<double>(counts_(i, j)) + 1.0);
    }
    log_coefficients_[i] = c;
  }
}

FactoredMixture::FactoredMixture(Vector weights, Matrix dictionary, Matrix loadings)
    : weights_(std::move(weights)),
      dictionary_(std::move(dictionary)),
      loadings_(std::move(loadings)) {
  if (weights_.size() < 1 || dictionary_.cols() < 1 || dictionary_.rows() < 2) {
    throw InvalidArgument("mixture needs K >= 1, H >= 1, M >= 2");
  }
  if (loadings_.rows() != dictionary_.cols() || loadings_.cols() != weights_.size()) {
    throw DimensionError("loadings must be H x K (" + std::to_string(dictionary_.cols()) +
                         " x " + std::to_string(weights_.size()) + "), got " +
                         std::to_string(loadings_.rows()) + " x " +
                         std::to_string(loadings_.cols()));
  }
  if (!on_simplex(weights_, kSimplexTolerance)) {
    throw InvalidArgument("mixture weights are not on the simplex");
  }
  if (!columns_on_simplex(dictionary_, kSimplexTolerance)) {
    throw InvalidArgument("dictionary columns are not on the simplex");
  }
  if (!columns_on_simplex(loadings_, kSimplexTolerance)) {
    throw InvalidArgument("loading columns are not on the simplex");
  }
  theta_ = dictionary_ * loadings_;
}

FactoredMixture FactoredMixture::unrestricted(Vector weights, Matrix theta) {
  const Eigen::Index k = theta.cols();
  return FactoredMixture(std::move(weights), std::move(theta), Matrix::Identity(k, k));
}

Responsibilities::Responsibilities(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw InvalidArgument("responsibilities must be non-empty");
  }
  if ((values_.array() < 0.0).any() || (values_.array() > 1.0).any() ||
      !values_.allFinite()) {
    throw InvalidArgument("responsibilities must lie in [0, 1]");
  }
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    if (std::abs(values_.row(i).sum() - 1.0) > kSimplexTolerance) {
      throw InvalidArgument("responsibility row " + std::to_string(i) + " does not sum to 1");
    }
  }
}

void normalize_to_simplex(Eigen::Ref<Vector> v) {
  const double s = v.sum();
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("cannot normalize a non-positive vector");
  v /= s;
}

void normalize_columns(Eigen::Ref<Matrix> m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double s = m.col(c).sum();
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidArgument("cannot normalize column " + std::to_string(c));
    }
    m.col(c) /= s;
  }
}

bool on_simplex(const Eigen::Ref<const Vector>& v, double tolerance) {
  if (!v.allFinite() || (v.array() < 0.0).any()) return false;
  return std::abs(v.sum() - 1.0) <= tolerance;
}

bool columns_on_simplex(const Eigen::Ref<const Matrix>& m, double tolerance) {
  if (!m.allFinite() || (m.array() < 0.0).any()) return false;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (std::abs(m.col(c).sum() - 1.0) > tolerance) return false;
  }
  return true;
}

}  // namespace nmfem
