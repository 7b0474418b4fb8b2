#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace nmfem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CountMatrix =
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

// Tolerance on simplex sums of stored parameters.
inline constexpr double kSimplexTolerance = 1e-10;
// Tolerance on sums of derived products such as theta = dictionary * loadings.
inline constexpr double kDerivedTolerance = 1e-8;

// n x M matrix of nonnegative integer counts, one row per individual.
// Row i holds Y_i; row_totals()[i] is N_i and total() is N.
class CountDataset {
 public:
  // feature_labels defaults to "f1".."fM"; row_keys may be empty.
  explicit CountDataset(CountMatrix counts,
                        std::vector<std::string> feature_labels = {},
                        std::vector<std::string> row_keys = {});

  Eigen::Index n() const { return counts_.rows(); }
  Eigen::Index M() const { return counts_.cols(); }

  const CountMatrix& counts() const { return counts_; }
  // Same values as counts(), as doubles.
  const Matrix& counts_real() const { return counts_real_; }
  const CountVector& row_totals() const { return row_totals_; }
  std::int64_t total() const { return total_; }

  const std::vector<std::string>& feature_labels() const { return feature_labels_; }
  const std::vector<std::string>& row_keys() const { return row_keys_; }

  // log N_i! - sum_j log Y_ij!, cached per row.
  const Vector& log_multinomial_coefficients() const { return log_coefficients_; }

 private:
  CountMatrix counts_;
  Matrix counts_real_;
  CountVector row_totals_;
  std::int64_t total_ = 0;
  std::vector<std::string> feature_labels_;
  std::vector<std::string> row_keys_;
  Vector log_coefficients_;
};

// Mixture of K multinomials on M cells whose parameter matrix factorizes as
// theta = dictionary (M x H) * loadings (H x K). Weights lie on S_K and the
// columns of both factors are stochastic, so every column of theta is on S_M.
class FactoredMixture {
 public:
  FactoredMixture(Vector weights, Matrix dictionary, Matrix loadings);

  // Unrestricted mixture: dictionary = theta, loadings = identity.
  static FactoredMixture unrestricted(Vector weights, Matrix theta);

  Eigen::Index K() const { return weights_.size(); }
  Eigen::Index H() const { return dictionary_.cols(); }
  Eigen::Index M() const { return dictionary_.rows(); }

  const Vector& weights() const { return weights_; }
  const Matrix& dictionary() const { return dictionary_; }
  const Matrix& loadings() const { return loadings_; }
  // M x K component parameters.
  const Matrix& theta() const { return theta_; }

 private:
  Vector weights_;
  Matrix dictionary_;
  Matrix loadings_;
  Matrix theta_;
};

// n x K posterior membership probabilities; rows on the simplex.
class Responsibilities {
 public:
  explicit Responsibilities(Matrix values);

  Eigen::Index n() const { return values_.rows(); }
  Eigen::Index K() const { return values_.cols(); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

// MAP cluster labels. Labels are 0-based in memory; files use 1-based ids.
struct HardAssignment {
  std::vector<int> labels;
  int K = 0;
};

// Rescales v to sum to one. Requires a positive finite sum.
void normalize_to_simplex(Eigen::Ref<Vector> v);
// Rescales each column of m to sum to one.
void normalize_columns(Eigen::Ref<Matrix> m);

bool on_simplex(const Eigen::Ref<const Vector>& v, double tolerance);
bool columns_on_simplex(const Eigen::Ref<const Matrix>& m, double tolerance);

}  // namespace nmfem
