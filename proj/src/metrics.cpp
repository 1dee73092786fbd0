#include "stec/metrics.hpp"

#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "stec/error.hpp"
#include "stec/io.hpp"

namespace stec {
namespace {

void check_pair(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw ValidationError("prediction and truth lengths differ");
  if (pred.empty()) throw ValidationError("metrics need at least one sample");
}

std::string fmt(double v) { return std::isfinite(v) ? io::format_sig9(v) : "nan"; }

nlohmann::json row_json(const EvalRow& r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"station_id", r.station_id}, {"n", r.n_samples},          {"rmse_tecu", num(r.rmse_tecu)},
          {"r2", num(r.r2)},            {"mape_pct", num(r.mape_pct)}, {"mape_excluded", r.mape_excluded},
          {"qa03_pct", num(r.qa03_pct)}, {"qa10_pct", num(r.qa10_pct)}};
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double r2(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (!(ss_tot > 0.0)) throw ValidationError("R² undefined: truth has zero variance");
  return 1.0 - ss_res / ss_tot;
}

double qa(std::span<const double> pred, std::span<const double> truth, double theta) {
  check_pair(pred, truth);
  if (!(theta > 0.0)) throw ValidationError("QA threshold must be > 0");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (std::fabs(pred[i] - truth[i]) < theta) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
}

MapeResult mape(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  MapeResult r;
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (std::fabs(truth[i]) < kMapeMinTruthTecu) {
      ++r.n_excluded;
      continue;
    }
    acc += std::fabs((pred[i] - truth[i]) / truth[i]);
    ++r.n_used;
  }
  if (r.n_used == 0) throw ValidationError("MAPE undefined: every truth value is below 0.1 TECU");
  r.pct = 100.0 * acc / static_cast<double>(r.n_used);
  return r;
}

EvalRow evaluate_rows(const std::string& station_id, std::span<const double> pred, std::span<const double> truth) {
  EvalRow row;
  row.station_id = station_id;
  row.n_samples = pred.size();
  row.rmse_tecu = rmse(pred, truth);
  try {
    row.r2 = r2(pred, truth);
  } catch (const ValidationError&) {
    row.r2 = std::numeric_limits<double>::quiet_NaN();
  }
  try {
    const MapeResult m = mape(pred, truth);
    row.mape_pct = m.pct;
    row.mape_excluded = m.n_excluded;
  } catch (const ValidationError&) {
    row.mape_pct = std::numeric_limits<double>::quiet_NaN();
    row.mape_excluded = pred.size();
  }
  row.qa03_pct = qa(pred, truth, 0.3);
  row.qa10_pct = qa(pred, truth, 1.0);
  return row;
}

EvalReport build_report(std::span<const std::string> station_ids, std::span<const double> pred,
                        std::span<const double> truth) {
  check_pair(pred, truth);
  if (station_ids.size() != pred.size()) throw ValidationError("station id count differs from sample count");
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    auto& g = groups[station_ids[i]];
    g.first.push_back(pred[i]);
    g.second.push_back(truth[i]);
  }
  EvalReport report;
  for (const auto& [id, g] : groups) report.stations.push_back(evaluate_rows(id, g.first, g.second));
  report.aggregate = evaluate_rows("ALL", pred, truth);
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "station_id,n,rmse_tecu,r2,mape_pct,qa03_pct,qa10_pct\n";
  auto line = [&](const EvalRow& r) {
    out += r.station_id + ',' + std::to_string(r.n_samples) + ',' + fmt(r.rmse_tecu) + ',' + fmt(r.r2) + ',' +
           fmt(r.mape_pct) + ',' + fmt(r.qa03_pct) + ',' + fmt(r.qa10_pct) + '\n';
  };
  for (const auto& r : report.stations) line(r);
  line(report.aggregate);
  return out;
}

std::string report_json(const EvalReport& report) {
  nlohmann::json j;
  j["stations"] = nlohmann::json::array();
  for (const auto& r : report.stations) j["stations"].push_back(row_json(r));
  j["aggregate"] = row_json(report.aggregate);
  return j.dump(2) + "\n";
}

}  // namespace stec
