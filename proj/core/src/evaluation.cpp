#include "nmfem/evaluation.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <utility>

#include "nmfem/errors.hpp"

namespace nmfem {
namespace {

std::int64_t pairs(std::int64_t m) { return m * (m - 1) / 2; }

}  // namespace

double pairwise_misclassification(const std::vector<int>& truth,
                                  const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) throw DimensionError("label vectors differ in length");
  if (truth.size() < 2) throw InvalidArgument("pairwise misclassification needs n >= 2");

  std::map<int, std::int64_t> truth_sizes, predicted_sizes;
  std::map<std::pair<int, int>, std::int64_t> joint;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++truth_sizes[truth[i]];
    ++predicted_sizes[predicted[i]];
    ++joint[{truth[i], predicted[i]}];
  }
  std::int64_t same_truth = 0, same_predicted = 0, same_both = 0;
  for (const auto& [label, m] : truth_sizes) same_truth += pairs(m);
  for (const auto& [label, m] : predicted_sizes) same_predicted += pairs(m);
  for (const auto& [cell, m] : joint) same_both += pairs(m);

  const std::int64_t disagreements = same_truth + same_predicted - 2 * same_both;
  return static_cast<double>(disagreements) /
         static_cast<double>(pairs(static_cast<std::int64_t>(truth.size())));
}

HardAssignment assign(const Responsibilities& resp) {
  HardAssignment out;
  out.K = static_cast<int>(resp.K());
  out.labels.resize(static_cast<std::size_t>(resp.n()));
  for (Eigen::Index i = 0; i < resp.n(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < resp.K(); ++k) {
      if (resp.values()(i, k) > resp.values()(i, best)) best = k;
    }
    out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

DecompositionReport decomposition_report(const FactoredMixture& model,
                                         const std::vector<std::string>& feature_labels) {
  if (static_cast<Eigen::Index>(feature_labels.size()) != model.M()) {
    throw DimensionError("feature labels must have length M");
  }
  DecompositionReport report;
  report.feature_labels = feature_labels;

  for (Eigen::Index h = 0; h < model.H(); ++h) {
    report.words.push_back({static_cast<int>(h), model.loadings().row(h).sum(),
                            model.dictionary().col(h)});
  }
  std::stable_sort(report.words.begin(), report.words.end(),
                   [](const WordProfile& a, const WordProfile& b) {
                     return a.loading_mass > b.loading_mass;
                   });

  for (Eigen::Index k = 0; k < model.K(); ++k) {
    report.clusters.push_back({static_cast<int>(k), model.weights()[k], model.loadings().col(k),
                               model.theta().col(k)});
  }
  std::stable_sort(report.clusters.begin(), report.clusters.end(),
                   [](const ClusterProfile& a, const ClusterProfile& b) {
                     return a.weight > b.weight;
                   });
  return report;
}

}  // namespace nmfem
