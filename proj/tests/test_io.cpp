#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include <nmfem/errors.hpp>
#include <nmfem/evaluation.hpp>
#include <nmfem/io.hpp>

#include "test_support.hpp"

namespace nmfem {
namespace {

TEST(FormatDouble, RoundTripsShortest) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-1217.5), "-1217.5");
  Rng rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(ModelJson, RoundTripThroughText) {
  Rng rng(2);
  const auto model = testing::random_model(rng, 7, 3, 4);
  const std::vector<std::string> labels = {"a", "b", "c", "d", "e", "f", "g"};
  const auto text = model_to_json(model, labels).dump();
  const auto back = model_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.feature_labels, labels);
  EXPECT_EQ(back.model.K(), 4);
  EXPECT_LE(((back.model.dictionary() - model.dictionary()).array() / model.dictionary().array()).abs().maxCoeff(), 1e-15);
  EXPECT_LE(((back.model.loadings() - model.loadings()).array() / model.loadings().array()).abs().maxCoeff(), 1e-15);
  EXPECT_LE(((back.model.weights() - model.weights()).array() / model.weights().array()).abs().maxCoeff(), 1e-15);
}

TEST(ModelJson, LayoutIsRowMajor) {
  Matrix phi(3, 2);
  phi << 0.5, 0.2, 0.25, 0.3, 0.25, 0.5;
  Matrix lambda(2, 1);
  lambda << 0.75, 0.25;
  const auto j = model_to_json(FactoredMixture(Vector::Ones(1), phi, lambda), {"x", "y", "z"});
  EXPECT_EQ(j["dictionary"].size(), 3u);
  EXPECT_EQ(j["dictionary"][0].size(), 2u);
  EXPECT_EQ(j["dictionary"][2][1].get<double>(), 0.5);
  EXPECT_EQ(j["loadings"][1][0].get<double>(), 0.25);
}

TEST(ModelJson, RejectsMalformedDocuments) {
  Rng rng(3);
  auto j = model_to_json(testing::random_model(rng, 4, 2, 3), {});
  auto missing = j;
  missing.erase("loadings");
  EXPECT_THROW(model_from_json(missing), FormatError);
  auto short_weights = j;
  short_weights["weights"].erase(0);
  EXPECT_THROW(model_from_json(short_weights), FormatError);
  auto wrong_type = j;
  wrong_type["K"] = "three";
  EXPECT_THROW(model_from_json(wrong_type), FormatError);
  auto not_stochastic = j;
  not_stochastic["dictionary"][0][0] = 5.0;
  EXPECT_THROW(model_from_json(not_stochastic), Error);
}

TEST(SweepCsv, RoundTrip) {
  SweepTable t;
  t.records.push_back({1, 1, -1234.5678901234567, 5, -1237.0, -1240.123, 42});
  t.records.push_back({2, 2, -1100.0, 11, -1105.5, -1112.25, 18446744073709551615ull});
  std::stringstream s;
  write_sweep_csv(s, t);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "K,H,loglik,dof,aic,bic,seed");
  const auto back = read_sweep_csv(s);
  ASSERT_EQ(back.records.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.records[i].K, t.records[i].K);
    EXPECT_EQ(back.records[i].loglik, t.records[i].loglik);
    EXPECT_EQ(back.records[i].bic, t.records[i].bic);
    EXPECT_EQ(back.records[i].seed, t.records[i].seed);
  }
}

TEST(SweepCsv, RejectsWrongHeader) {
  std::istringstream in("K,H,ll\n1,1,2\n");
  EXPECT_THROW(read_sweep_csv(in), FormatError);
  std::istringstream empty("");
  EXPECT_THROW(read_sweep_csv(empty), EmptyInputError);
}

TEST(ProfilesCsv, RoundTrip) {
  CountMatrix c(2, 3);
  c << 1, 0, 5, 2, 2, 2;
  const CountDataset data(c, {"Mon-00", "Mon-01", "Mon-02"}, {"card-a", "card-b"});
  std::stringstream s;
  write_profiles_csv(s, data);
  EXPECT_EQ(s.str(), "card_id,Mon-00,Mon-01,Mon-02\ncard-a,1,0,5\ncard-b,2,2,2\n");
  const auto back = read_profiles_csv(s);
  EXPECT_EQ(back.counts(), c);
  EXPECT_EQ(back.row_keys(), data.row_keys());
  EXPECT_EQ(back.feature_labels(), data.feature_labels());
}

TEST(ProfilesCsv, RejectsRaggedRowsAndNegatives) {
  std::istringstream ragged("id,a,b\nx,1\n");
  EXPECT_THROW(read_profiles_csv(ragged), FormatError);
  std::istringstream negative("id,a,b\nx,1,-2\n");
  EXPECT_THROW(read_profiles_csv(negative), Error);
  std::istringstream header_only("id,a,b\n");
  EXPECT_THROW(read_profiles_csv(header_only), EmptyInputError);
}

TEST(DecompositionCsv, LongFormat) {
  Matrix phi(2, 1);
  phi << 0.25, 0.75;
  const FactoredMixture model(Vector::Constant(2, 0.5), phi, Matrix::Ones(1, 2));
  std::stringstream s;
  write_decomposition_csv(s, decomposition_report(model, {"u", "v"}));
  EXPECT_EQ(s.str(),
            "entity_type,entity_id,feature_label,value,weight\n"
            "word,1,u,0.25,2\n"
            "word,1,v,0.75,2\n"
            "cluster,1,u,0.25,0.5\n"
            "cluster,1,v,0.75,0.5\n"
            "cluster,2,u,0.25,0.5\n"
            "cluster,2,v,0.75,0.5\n");
}

TEST(AssignmentsCsv, OneRowPerIndividual) {
  CountMatrix c(3, 2);
  c << 1, 0, 0, 1, 1, 1;
  const CountDataset data(c, {}, {"p", "q", "r"});
  Matrix t(3, 2);
  t << 0.9, 0.1, 0.2, 0.8, 0.5, 0.5;
  const Responsibilities resp(t);
  std::stringstream s;
  write_assignments_csv(s, data, assign(resp), resp);
  EXPECT_EQ(s.str(), "row_key,cluster,responsibility\np,1,0.9\nq,2,0.8\nr,1,0.5\n");
}

}  // namespace
}  // namespace nmfem
