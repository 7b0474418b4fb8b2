#pragma once

#include <string>
#include <vector>

#include "nmfem/model.hpp"

namespace nmfem {

// Fraction of unordered pairs on which the two partitions disagree about
// co-membership. Computed from the contingency table in O(n + cells).
double pairwise_misclassification(const std::vector<int>& truth,
                                  const std::vector<int>& predicted);

// Row-wise argmax; the lowest index wins ties.
HardAssignment assign(const Responsibilities& resp);

struct WordProfile {
  int word = 0;             // 0-based column of the dictionary
  double loading_mass = 0;  // sum over clusters of the word's loadings
  Vector profile;           // dictionary column, length M
};

struct ClusterProfile {
  int cluster = 0;  // 0-based component index
  double weight = 0;
  Vector loadings;  // word mixture, length H, indexed by original word id
  Vector theta;     // cluster profile, length M
};

struct DecompositionReport {
  std::vector<std::string> feature_labels;
  std::vector<WordProfile> words;        // descending loading mass
  std::vector<ClusterProfile> clusters;  // descending weight
};

DecompositionReport decomposition_report(const FactoredMixture& model,
                                         const std::vector<std::string>& feature_labels);

}  // namespace nmfem
