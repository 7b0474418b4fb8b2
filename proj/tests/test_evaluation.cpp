#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include <nmfem/errors.hpp>
#include <nmfem/evaluation.hpp>

#include "test_support.hpp"

namespace nmfem {
namespace {

std::vector<int> random_labels(Rng& rng, std::size_t n, int k) {
  std::uniform_int_distribution<int> u(0, k - 1);
  std::vector<int> out(n);
  for (auto& v : out) v = u(rng);
  return out;
}

TEST(Pairwise, Examples) {
  EXPECT_EQ(pairwise_misclassification({0, 0, 1, 2}, {0, 0, 1, 2}), 0.0);
  EXPECT_EQ(pairwise_misclassification({1, 1, 2, 2}, {1, 1, 1, 1}), 4.0 / 6.0);
  EXPECT_EQ(pairwise_misclassification({0, 1}, {5, 5}), 1.0);
}

TEST(Pairwise, MatchesDefinitionExactly) {
  Rng rng(1);
  std::uniform_int_distribution<std::size_t> size(2, 200);
  std::uniform_int_distribution<int> groups(1, 12);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = trial < 50 ? 8 : size(rng);
    const auto a = random_labels(rng, n, groups(rng));
    const auto b = random_labels(rng, n, groups(rng));
    ASSERT_EQ(pairwise_misclassification(a, b), testing::brute_force_pairwise(a, b)) << "trial " << trial;
  }
}

TEST(Pairwise, SymmetricAndRelabelInvariant) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_labels(rng, 60, 5);
    const auto b = random_labels(rng, 60, 4);
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> relabeled(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) relabeled[i] = perm[static_cast<std::size_t>(a[i])] * 7 + 3;
    EXPECT_EQ(pairwise_misclassification(a, a), 0.0);
    EXPECT_EQ(pairwise_misclassification(a, b), pairwise_misclassification(b, a));
    EXPECT_EQ(pairwise_misclassification(a, b), pairwise_misclassification(relabeled, b));
  }
}

TEST(Pairwise, RejectsBadInput) {
  EXPECT_THROW(pairwise_misclassification({0}, {0}), InvalidArgument);
  EXPECT_THROW(pairwise_misclassification({0, 1}, {0, 1, 2}), DimensionError);
}

TEST(Assign, ArgmaxWithLowestIndexOnTies) {
  Matrix t(3, 2);
  t << 1, 0, 0, 1, 0.5, 0.5;
  const auto h = assign(Responsibilities(t));
  EXPECT_EQ(h.labels, (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(h.K, 2);
}

TEST(Assign, MatchesNaiveScan) {
  Rng rng(3);
  const Matrix t = testing::random_stochastic(rng, 5, 40).transpose();
  const auto h = assign(Responsibilities(t));
  for (Eigen::Index i = 0; i < 40; ++i) {
    int best = 0;
    for (int k = 1; k < 5; ++k) {
      if (t(i, k) > t(i, best)) best = k;
    }
    EXPECT_EQ(h.labels[static_cast<std::size_t>(i)], best);
  }
}

std::vector<std::string> labels_for(Eigen::Index M) {
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < M; ++j) out.push_back("b" + std::to_string(j));
  return out;
}

TEST(Decomposition, SingleWordExplainsEverything) {
  Rng rng(4);
  const auto model = testing::random_model(rng, 6, 1, 3);
  const auto r = decomposition_report(model, labels_for(6));
  ASSERT_EQ(r.words.size(), 1u);
  EXPECT_NEAR(r.words[0].loading_mass, 3.0, 1e-15);
  for (const auto& c : r.clusters) EXPECT_EQ(c.loadings[0], 1.0);
}

TEST(Decomposition, ReportsConvexCombination) {
  Rng rng(5);
  const Matrix phi = testing::random_stochastic(rng, 8, 5);
  Matrix lambda(5, 2);
  lambda.col(0) << 0, 0.4, 0, 0.6, 0;
  lambda.col(1) << 0.2, 0.2, 0.2, 0.2, 0.2;
  Vector p(2);
  p << 0.3, 0.7;
  const auto r = decomposition_report(FactoredMixture(p, phi, lambda), labels_for(8));
  ASSERT_EQ(r.clusters.size(), 2u);
  EXPECT_EQ(r.clusters[0].cluster, 1);
  EXPECT_EQ(r.clusters[1].cluster, 0);
  const auto& c = r.clusters[1];
  EXPECT_EQ(c.weight, 0.3);
  EXPECT_EQ(c.loadings[1], 0.4);
  EXPECT_EQ(c.loadings[3], 0.6);
  EXPECT_EQ(c.loadings[0] + c.loadings[2] + c.loadings[4], 0.0);
  EXPECT_EQ(r.words[0].word, 3);
  EXPECT_EQ(r.words[1].word, 1);
  for (std::size_t i = 1; i < r.words.size(); ++i) {
    EXPECT_GE(r.words[i - 1].loading_mass, r.words[i].loading_mass);
  }
}

TEST(Decomposition, ThetaIsDictionaryTimesLoadings) {
  Rng rng(6);
  const auto model = testing::random_model(rng, 10, 3, 4);
  const auto r = decomposition_report(model, labels_for(10));
  EXPECT_EQ(r.feature_labels, labels_for(10));
  for (const auto& c : r.clusters) {
    for (Eigen::Index j = 0; j < 10; ++j) {
      double s = 0.0;
      for (Eigen::Index h = 0; h < 3; ++h) s += model.dictionary()(j, h) * model.loadings()(h, c.cluster);
      EXPECT_NEAR(c.theta[j], s, 1e-12);
    }
    EXPECT_TRUE(on_simplex(c.loadings, kSimplexTolerance));
  }
  for (std::size_t i = 1; i < r.clusters.size(); ++i) EXPECT_GE(r.clusters[i - 1].weight, r.clusters[i].weight);
}

TEST(Decomposition, RejectsWrongLabelCount) {
  Rng rng(7);
  EXPECT_THROW(decomposition_report(testing::random_model(rng, 4, 2, 2), labels_for(3)), DimensionError);
}

}  // namespace
}  // namespace nmfem
