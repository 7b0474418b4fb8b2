#include "nmfem/io.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <string_view>

#include "nmfem/errors.hpp"

namespace nmfem {
namespace {

using nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string cell = line.substr(start, comma - start);
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(std::move(cell));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& text, const char* what) {
  T v{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(std::string("cannot parse ") + what + " from '" + text + "'");
  }
  return v;
}

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_array(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Matrix rows_matrix(const json& rows, Eigen::Index expect_rows, Eigen::Index expect_cols,
                   const char* what) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != expect_rows) {
    throw FormatError(std::string(what) + " must have " + std::to_string(expect_rows) + " rows");
  }
  Matrix m(expect_rows, expect_cols);
  for (Eigen::Index r = 0; r < expect_rows; ++r) {
    const json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expect_cols) {
      throw FormatError(std::string(what) + " row " + std::to_string(r) + " must have " +
                        std::to_string(expect_cols) + " entries");
    }
    for (Eigen::Index c = 0; c < expect_cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

json model_to_json(const FactoredMixture& model, const std::vector<std::string>& feature_labels) {
  return json{{"K", model.K()},
              {"H", model.H()},
              {"M", model.M()},
              {"weights", vector_array(model.weights())},
              {"dictionary", matrix_rows(model.dictionary())},
              {"loadings", matrix_rows(model.loadings())},
              {"feature_labels", feature_labels}};
}

LabeledModel model_from_json(const json& j) {
  try {
    const auto K = j.at("K").get<Eigen::Index>();
    const auto H = j.at("H").get<Eigen::Index>();
    const auto M = j.at("M").get<Eigen::Index>();
    const json& w = j.at("weights");
    if (!w.is_array() || static_cast<Eigen::Index>(w.size()) != K) {
      throw FormatError("weights must have K entries");
    }
    Vector weights(K);
    for (Eigen::Index k = 0; k < K; ++k) weights[k] = w[static_cast<std::size_t>(k)].get<double>();
    Matrix dictionary = rows_matrix(j.at("dictionary"), M, H, "dictionary");
    Matrix loadings = rows_matrix(j.at("loadings"), H, K, "loadings");
    std::vector<std::string> labels;
    if (j.contains("feature_labels")) labels = j.at("feature_labels").get<std::vector<std::string>>();
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != M) {
      throw FormatError("feature_labels must have M entries");
    }
    return {FactoredMixture(std::move(weights), std::move(dictionary), std::move(loadings)),
            std::move(labels)};
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid model JSON: ") + e.what());
  }
}

json fit_report_to_json(const FitReport& report) {
  return json{{"K", report.model.K()},
              {"H", report.model.H()},
              {"M", report.model.M()},
              {"loglik", report.loglik},
              {"loglik_trace", report.loglik_trace},
              {"inner_iterations", report.inner_iterations},
              {"outer_iterations", report.outer_iterations},
              {"converged", report.converged},
              {"dof", report.dof},
              {"aic", report.aic},
              {"bic", report.bic},
              {"seed", report.seed},
              {"best_restart", report.best_restart},
              {"restarts_tried", report.restarts_tried},
              {"failed_restarts", report.failed_restarts}};
}

json slope_selection_to_json(const SlopeSelection& s, SweepAxis axis) {
  return json{{"axis", axis == SweepAxis::kK ? "K" : "H"},
              {"chosen", s.chosen},
              {"slope", s.slope},
              {"intercept", s.intercept},
              {"linear_region_start", s.linear_region_start},
              {"axis_values", s.axis_values},
              {"penalized_values", s.penalized_values}};
}

json decomposition_to_json(const DecompositionReport& report) {
  json words = json::array();
  for (const auto& w : report.words) {
    words.push_back({{"word", w.word + 1},
                     {"loading_mass", w.loading_mass},
                     {"profile", vector_array(w.profile)}});
  }
  json clusters = json::array();
  for (const auto& c : report.clusters) {
    json mix = json::array();
    for (Eigen::Index h = 0; h < c.loadings.size(); ++h) {
      mix.push_back({{"word", h + 1}, {"weight", c.loadings[h]}});
    }
    clusters.push_back({{"cluster", c.cluster + 1},
                        {"weight", c.weight},
                        {"word_mixture", std::move(mix)},
                        {"theta", vector_array(c.theta)}});
  }
  return json{{"feature_labels", report.feature_labels},
              {"words", std::move(words)},
              {"clusters", std::move(clusters)}};
}

void write_trace_csv(std::ostream& out, const FitReport& report) {
  out << "iteration,loglik,inner_iterations\n";
  for (std::size_t c = 0; c < report.loglik_trace.size(); ++c) {
    out << c << ',' << format_double(report.loglik_trace[c]) << ','
        << (c == 0 ? 0 : report.inner_iterations[c - 1]) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  out << "K,H,loglik,dof,aic,bic,seed\n";
  for (const auto& r : table.records) {
    out << r.K << ',' << r.H << ',' << format_double(r.loglik) << ',' << r.dof << ','
        << format_double(r.aic) << ',' << format_double(r.bic) << ',' << r.seed << '\n';
  }
}

SweepTable read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw EmptyInputError("empty sweep table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "K,H,loglik,dof,aic,bic,seed") {
    throw FormatError("sweep table header must be 'K,H,loglik,dof,aic,bic,seed'");
  }
  SweepTable table;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto c = split_csv(line);
    if (c.size() != 7) throw FormatError("sweep row must have 7 fields: '" + line + "'");
    table.records.push_back({parse_number<int>(c[0], "K"), parse_number<int>(c[1], "H"),
                             parse_number<double>(c[2], "loglik"),
                             parse_number<std::int64_t>(c[3], "dof"),
                             parse_number<double>(c[4], "aic"), parse_number<double>(c[5], "bic"),
                             parse_number<std::uint64_t>(c[6], "seed")});
  }
  return table;
}

void write_decomposition_csv(std::ostream& out, const DecompositionReport& report) {
  out << "entity_type,entity_id,feature_label,value,weight\n";
  for (const auto& w : report.words) {
    for (Eigen::Index j = 0; j < w.profile.size(); ++j) {
      out << "word," << w.word + 1 << ',' << report.feature_labels[static_cast<std::size_t>(j)]
          << ',' << format_double(w.profile[j]) << ',' << format_double(w.loading_mass) << '\n';
    }
  }
  for (const auto& c : report.clusters) {
    for (Eigen::Index j = 0; j < c.theta.size(); ++j) {
      out << "cluster," << c.cluster + 1 << ','
          << report.feature_labels[static_cast<std::size_t>(j)] << ','
          << format_double(c.theta[j]) << ',' << format_double(c.weight) << '\n';
    }
  }
}

void write_profiles_csv(std::ostream& out, const CountDataset& data,
                        const std::string& key_header) {
  out << key_header;
  for (const auto& label : data.feature_labels()) out << ',' << label;
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << (data.row_keys().empty() ? "row" + std::to_string(i + 1)
                                    : data.row_keys()[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < data.M(); ++j) out << ',' << data.counts()(i, j);
    out << '\n';
  }
}

CountDataset read_profiles_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw EmptyInputError("empty profile matrix");
  const auto header = split_csv(line);
  if (header.size() < 3) throw FormatError("profile matrix needs a key column and >= 2 features");
  std::vector<std::string> labels(header.begin() + 1, header.end());

  std::vector<std::string> keys;
  std::vector<std::int64_t> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw FormatError("line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " fields, expected " +
                        std::to_string(header.size()));
    }
    keys.push_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      values.push_back(parse_number<std::int64_t>(cells[c], "count"));
    }
  }
  if (keys.empty()) throw EmptyInputError("profile matrix has no rows");
  const auto n = static_cast<Eigen::Index>(keys.size());
  const auto M = static_cast<Eigen::Index>(labels.size());
  CountMatrix counts = Eigen::Map<const CountMatrix>(values.data(), n, M);
  return CountDataset(std::move(counts), std::move(labels), std::move(keys));
}

void write_benchmark_csv(std::ostream& out, const BenchmarkResult& result) {
  out << "method,alpha,H0,H_fit,replication,rate\n";
  for (const auto& r : result.rows) {
    out << r.method << ',' << format_double(r.alpha) << ',' << r.H0 << ',' << r.H_fit << ','
        << r.replication << ',' << format_double(r.rate) << '\n';
  }
}

void write_benchmark_summary_csv(std::ostream& out, const BenchmarkResult& result) {
  out << "method,alpha,mean_rate,replications\n";
  for (const auto& s : result.summary) {
    out << s.method << ',' << format_double(s.alpha) << ',' << format_double(s.mean_rate) << ','
        << s.replications << '\n';
  }
}

void write_assignments_csv(std::ostream& out, const CountDataset& data,
                           const HardAssignment& labels, const Responsibilities& resp) {
  out << "row_key,cluster,responsibility\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const int k = labels.labels[static_cast<std::size_t>(i)];
    out << (data.row_keys().empty() ? "row" + std::to_string(i + 1)
                                    : data.row_keys()[static_cast<std::size_t>(i)])
        << ',' << k + 1 << ',' << format_double(resp.values()(i, k)) << '\n';
  }
}

}  // namespace nmfem
