#include "nmfem/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "nmfem/baselines.hpp"
#include "nmfem/errors.hpp"
#include "nmfem/likelihood.hpp"
#include "nmfem/parallel.hpp"

namespace nmfem {

Criteria criteria_from_dof(double loglik, std::int64_t dof, std::int64_t total_count) {
  if (total_count < 1) throw InvalidArgument("criteria require N >= 1");
  const double d = static_cast<double>(dof);
  return {loglik - d / 2.0, loglik - d * std::log(static_cast<double>(total_count)) / 2.0};
}

Criteria criteria(double loglik, std::int64_t M, std::int64_t H, std::int64_t K,
                  std::int64_t total_count) {
  return criteria_from_dof(loglik, degrees_of_freedom(M, H, K), total_count);
}

namespace {

struct Cell {
  std::optional<SweepRecord> record;
  std::string error;
};

SweepTable collect(std::vector<Cell> cells, const std::vector<int>& ks,
                   const std::vector<int>& hs) {
  SweepTable table;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].record) {
      table.records.push_back(*cells[i].record);
    } else {
      table.failures.push_back({ks[i], hs[i], cells[i].error});
    }
  }
  if (table.records.empty()) {
    throw NumericalFailure("every sweep cell failed; first: " + table.failures.front().message, 0);
  }
  return table;
}

void require_ascending(const std::vector<int>& range, const char* what) {
  if (range.empty()) throw InvalidArgument(std::string(what) + " range is empty");
  for (std::size_t i = 1; i < range.size(); ++i) {
    if (range[i] <= range[i - 1]) {
      throw InvalidArgument(std::string(what) + " range must be strictly ascending");
    }
  }
}

}  // namespace

SweepTable sweep_K(const CountDataset& data, const std::vector<int>& k_range,
                   const FitConfig& cfg, int threads) {
  require_ascending(k_range, "K");
  std::vector<Cell> cells(k_range.size());
  parallel_for(k_range.size(), threads, [&](std::size_t i) {
    const int K = k_range[i];
    FitConfig cell_cfg = cfg;
    cell_cfg.threads = 1;
    cell_cfg.seed = derive_seed(cfg.seed, "sweep-K", static_cast<std::uint64_t>(K));
    try {
      const FitReport r = fit_plain_em(data, K, cell_cfg);
      cells[i].record = SweepRecord{K, K, r.loglik, r.dof, r.aic, r.bic, cell_cfg.seed};
    } catch (const Error& e) {
      cells[i].error = e.what();
    }
  });
  return collect(std::move(cells), k_range, k_range);
}

SweepTable sweep_H(const CountDataset& data, int K, const std::vector<int>& h_range,
                   const FitConfig& cfg, int threads) {
  require_ascending(h_range, "H");
  if (h_range.front() < 1 || h_range.back() > K) {
    throw InvalidArgument("H range must lie in 1..K");
  }
  std::vector<Cell> cells(h_range.size());
  parallel_for(h_range.size(), threads, [&](std::size_t i) {
    const int H = h_range[i];
    FitConfig cell_cfg = cfg;
    cell_cfg.threads = 1;
    cell_cfg.seed = derive_seed(cfg.seed, "sweep-H", static_cast<std::uint64_t>(H));
    try {
      const FitReport r = fit(data, K, H, cell_cfg);
      cells[i].record = SweepRecord{K, H, r.loglik, r.dof, r.aic, r.bic, cell_cfg.seed};
    } catch (const Error& e) {
      cells[i].error = e.what();
    }
  });
  return collect(std::move(cells), std::vector<int>(h_range.size(), K), h_range);
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_se = 0.0;
};

LineFit ordinary_least_squares(const std::vector<double>& x, const std::vector<double>& y,
                               std::size_t begin) {
  const std::size_t n = x.size() - begin;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = begin; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = begin; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("slope heuristic needs distinct dof values");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = begin; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += r * r;
  }
  fit.residual_se = std::sqrt(rss / static_cast<double>(n - 2));
  return fit;
}

}  // namespace

SlopeSelection slope_select(const SweepTable& table, SweepAxis axis) {
  constexpr std::size_t kMinPoints = 4;
  std::vector<SweepRecord> records = table.records;
  const auto axis_of = [axis](const SweepRecord& r) { return axis == SweepAxis::kK ? r.K : r.H; };
  std::stable_sort(records.begin(), records.end(),
                   [&](const SweepRecord& a, const SweepRecord& b) { return axis_of(a) < axis_of(b); });
  if (records.size() < kMinPoints) {
    throw InsufficientDataError("slope heuristic needs at least 4 points, got " +
                                std::to_string(records.size()));
  }

  std::vector<double> x, y;
  double scale = 1.0;
  for (const auto& r : records) {
    x.push_back(static_cast<double>(r.dof));
    y.push_back(r.loglik);
    scale = std::max(scale, std::abs(r.loglik));
  }

  // Residual errors within this band count as ties (rounding on exact lines).
  const double tie = 1e-9 * scale;
  std::size_t best_begin = 0;
  LineFit best = ordinary_least_squares(x, y, 0);
  for (std::size_t begin = 1; begin + kMinPoints <= records.size(); ++begin) {
    const LineFit f = ordinary_least_squares(x, y, begin);
    if (f.residual_se < best.residual_se - tie) {
      best = f;
      best_begin = begin;
    }
  }

  SlopeSelection out;
  out.slope = best.slope;
  out.intercept = best.intercept;
  out.linear_region_start = axis_of(records[best_begin]);
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double v = y[i] - 2.0 * best.slope * x[i];
    out.axis_values.push_back(axis_of(records[i]));
    out.penalized_values.push_back(v);
    if (v > best_value) {
      best_value = v;
      out.chosen = axis_of(records[i]);
    }
  }
  return out;
}

}  // namespace nmfem
