#include <cmath>

#include <gtest/gtest.h>

#include <nmfem/errors.hpp>
#include <nmfem/evaluation.hpp>
#include <nmfem/nmf_em.hpp>
#include <nmfem/random.hpp>
#include <nmfem/simulate.hpp>

namespace nmfem {
namespace {

SimulationSpec small_spec() {
  SimulationSpec spec;
  spec.m = 30;
  spec.n = 200;
  spec.per_individual_trials = 50;
  spec.K = 5;
  spec.H0 = 3;
  spec.seed = 11;
  return spec;
}

TEST(Generate, IsReproducible) {
  const auto a = generate(small_spec());
  const auto b = generate(small_spec());
  EXPECT_EQ(a.data.counts(), b.data.counts());
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.true_model.theta(), b.true_model.theta());

  auto other = small_spec();
  other.seed = 12;
  EXPECT_NE(generate(other).data.counts(), a.data.counts());
}

TEST(Generate, ShapesTotalsAndInvariants) {
  for (auto words : {WordDistribution::kDirichletOne, WordDistribution::kNormalizedUniform}) {
    auto spec = small_spec();
    spec.words = words;
    const auto sim = generate(spec);
    EXPECT_EQ(sim.data.n(), 200);
    EXPECT_EQ(sim.data.M(), 30);
    EXPECT_TRUE((sim.data.row_totals().array() == 50).all());
    ASSERT_EQ(sim.truth.size(), 200u);
    for (int z : sim.truth) EXPECT_TRUE(z >= 0 && z < 5);
    EXPECT_EQ(sim.true_model.H(), 3);
    EXPECT_EQ(sim.true_model.K(), 5);
    EXPECT_TRUE(sim.true_model.weights().isApprox(Vector::Constant(5, 0.2)));
    EXPECT_TRUE(columns_on_simplex(sim.true_model.theta(), kDerivedTolerance));
  }
}

TEST(Generate, SingleWordMakesComponentsIdentical) {
  auto spec = small_spec();
  spec.H0 = 1;
  const auto sim = generate(spec);
  for (int k = 1; k < 5; ++k) EXPECT_EQ(sim.true_model.theta().col(k), sim.true_model.theta().col(0));
}

TEST(Generate, LargeConcentrationGivesUniformLoadings) {
  auto spec = small_spec();
  spec.alpha = 1e6;
  const auto sim = generate(spec);
  EXPECT_LT((sim.true_model.loadings().array() - 1.0 / 3.0).abs().maxCoeff(), 1e-2);
}

TEST(Generate, SmallConcentrationStaysFinite) {
  auto spec = small_spec();
  spec.alpha = 0.001;
  const auto sim = generate(spec);
  EXPECT_TRUE(columns_on_simplex(sim.true_model.loadings(), kSimplexTolerance));
}

TEST(Generate, RejectsInvalidSpec) {
  auto spec = small_spec();
  spec.H0 = 6;
  EXPECT_THROW(generate(spec), InvalidArgument);
  spec = small_spec();
  spec.alpha = 0.0;
  EXPECT_THROW(generate(spec), InvalidArgument);
  spec = small_spec();
  spec.n = 0;
  EXPECT_THROW(generate(spec), InvalidArgument);
}

TEST(Methods, NamesRoundTrip) {
  for (auto m : all_methods()) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_EQ(all_methods().size(), 3u);
  EXPECT_THROW(parse_method("spectral"), InvalidArgument);
}

TEST(Benchmark, SeparableDataIsEasyForEveryone) {
  // Near-vertex loadings only separate the components when no two clusters
  // land on the same word, so pick the first seed where the true model
  // classifies almost perfectly.
  SimulationSpec spec;
  spec.n = 300;
  spec.K = 3;
  spec.H0 = 3;
  spec.alpha = 0.01;
  for (spec.seed = 1;; ++spec.seed) {
    ASSERT_LT(spec.seed, 200u);
    auto rep = spec;
    rep.seed = derive_seed(spec.seed, "bench/data", 0);
    const auto sim = generate(rep);
    if (pairwise_misclassification(sim.truth, assign(e_step(sim.data, sim.true_model)).labels) < 0.01) break;
  }
  FitConfig cfg;
  const auto r = run_benchmark(spec, 3, 1, cfg);
  ASSERT_EQ(r.summary.size(), 3u);
  for (const auto& s : r.summary) EXPECT_LT(s.mean_rate, 0.15) << s.method;
}

TEST(Benchmark, SummaryIsMeanOfRows) {
  auto spec = small_spec();
  FitConfig cfg;
  cfg.n_restarts = 2;
  const auto r = run_benchmark(spec, 3, 3, cfg);
  ASSERT_EQ(r.rows.size(), 9u);
  EXPECT_TRUE(r.failures.empty());
  std::vector<std::string> names;
  for (const auto& s : r.summary) {
    names.push_back(s.method);
    double sum = 0.0;
    int count = 0;
    for (const auto& row : r.rows) {
      if (row.method == s.method) sum += row.rate, ++count;
    }
    EXPECT_EQ(count, 3);
    EXPECT_EQ(s.replications, 3);
    EXPECT_NEAR(s.mean_rate, sum / 3.0, 1e-15);
  }
  EXPECT_EQ(names, (std::vector<std::string>{"nmf-em", "em", "kmeans"}));
}

TEST(Benchmark, ThreadCountDoesNotChangeResults) {
  auto spec = small_spec();
  FitConfig cfg;
  cfg.n_restarts = 2;
  const auto a = run_benchmark(spec, 3, 2, cfg, all_methods(), 1);
  const auto b = run_benchmark(spec, 3, 2, cfg, all_methods(), 2);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].rate, b.rows[i].rate);
}

TEST(Benchmark, HarderWithFlatterLoadings) {
  SimulationSpec spec;
  spec.n = 600;
  spec.seed = 21;
  FitConfig cfg;
  cfg.n_restarts = 3;
  spec.alpha = 0.2;
  const auto easy = run_benchmark(spec, 4, 10, cfg, {Method::kNmfEm});
  spec.alpha = 1.3;
  const auto hard = run_benchmark(spec, 4, 10, cfg, {Method::kNmfEm});
  EXPECT_GE(hard.summary[0].mean_rate, easy.summary[0].mean_rate);
}

}  // namespace
}  // namespace nmfem
