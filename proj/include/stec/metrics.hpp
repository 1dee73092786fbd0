#pragma once

#include <span>
#include <string>
#include <vector>

namespace stec {

inline constexpr double kMapeMinTruthTecu = 0.1;

// sqrt(mean (pred - truth)^2)
double rmse(std::span<const double> pred, std::span<const double> truth);

// 1 - SS_res / SS_tot around the mean of truth. Throws "R² undefined" when
// truth has zero variance.
double r2(std::span<const double> pred, std::span<const double> truth);

// Percentage of |pred - truth| < theta (strict).
double qa(std::span<const double> pred, std::span<const double> truth, double theta);

struct MapeResult {
  double pct = 0.0;
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;  // |truth| < kMapeMinTruthTecu
};

// 100 mean |pred - truth| / |truth| over samples with |truth| >= 0.1 TECU.
MapeResult mape(std::span<const double> pred, std::span<const double> truth);

struct EvalRow {
  std::string station_id;
  std::size_t n_samples = 0;
  double rmse_tecu = 0.0;
  double r2 = 0.0;  // NaN when undefined for the row
  double mape_pct = 0.0;  // NaN when no sample survives the exclusion
  std::size_t mape_excluded = 0;
  double qa03_pct = 0.0;
  double qa10_pct = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> stations;  // sorted by station id
  EvalRow aggregate;              // station_id "ALL"
};

EvalRow evaluate_rows(const std::string& station_id, std::span<const double> pred, std::span<const double> truth);

EvalReport build_report(std::span<const std::string> station_ids, std::span<const double> pred,
                        std::span<const double> truth);

// station_id,n,rmse_tecu,r2,mape_pct,qa03_pct,qa10_pct
std::string report_csv(const EvalReport& report);
// JSON document with the same rows plus MAPE exclusion counts.
std::string report_json(const EvalReport& report);

}  // namespace stec
