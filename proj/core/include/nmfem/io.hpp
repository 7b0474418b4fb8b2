#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nmfem/evaluation.hpp"
#include "nmfem/model.hpp"
#include "nmfem/nmf_em.hpp"
#include "nmfem/selection.hpp"
#include "nmfem/simulate.hpp"

namespace nmfem {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// {"K","H","M","weights","dictionary" (M rows x H),"loadings" (H rows x K),
//  "feature_labels"}
nlohmann::json model_to_json(const FactoredMixture& model,
                             const std::vector<std::string>& feature_labels);

struct LabeledModel {
  FactoredMixture model;
  std::vector<std::string> feature_labels;
};

// Throws FormatError on missing fields or inconsistent sizes.
LabeledModel model_from_json(const nlohmann::json& j);

nlohmann::json fit_report_to_json(const FitReport& report);
nlohmann::json slope_selection_to_json(const SlopeSelection& selection, SweepAxis axis);
nlohmann::json decomposition_to_json(const DecompositionReport& report);

// iteration,loglik,inner_iterations
void write_trace_csv(std::ostream& out, const FitReport& report);

// K,H,loglik,dof,aic,bic,seed
void write_sweep_csv(std::ostream& out, const SweepTable& table);
SweepTable read_sweep_csv(std::istream& in);

// entity_type,entity_id,feature_label,value,weight (ids are 1-based)
void write_decomposition_csv(std::ostream& out, const DecompositionReport& report);

// Row key column followed by one column per feature label.
void write_profiles_csv(std::ostream& out, const CountDataset& data,
                        const std::string& key_header = "card_id");
// Reads a matrix CSV written by write_profiles_csv (or prepared externally).
CountDataset read_profiles_csv(std::istream& in);

// method,alpha,H0,H_fit,replication,rate
void write_benchmark_csv(std::ostream& out, const BenchmarkResult& result);
// method,alpha,mean_rate,replications
void write_benchmark_summary_csv(std::ostream& out, const BenchmarkResult& result);

// row_key,cluster (1-based),responsibility
void write_assignments_csv(std::ostream& out, const CountDataset& data,
                           const HardAssignment& labels, const Responsibilities& resp);

}  // namespace nmfem
