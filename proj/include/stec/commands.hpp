#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stec/config.hpp"
#include "stec/dataset.hpp"
#include "stec/training.hpp"

namespace stec {

struct SimulationOutput {
  std::vector<Station> stations;
  std::vector<RayRecord> rays;  // ordered by day, epoch, station, satellite
};

// Stations from the grid or list, roles from explicit ids or a seeded draw.
std::vector<Station> place_stations(const SimulationConfig& sim, std::uint64_t seed);
SimulationOutput simulate(const SimulationConfig& sim, std::uint64_t seed);
std::string sat_id(int sat_index);  // "G01" for index 0

struct PredictionRow {
  std::string station_id;
  std::string sat_id;
  int year = 0;
  int doy = 0;
  double sod = 0.0;
  double predicted_tecu = 0.0;
  bool extrapolated = false;
};

// station_id,sat_id,year,doy,sod,predicted_tecu,extrapolated
std::string format_predictions_csv(std::span<const PredictionRow> rows);
std::vector<PredictionRow> parse_predictions_csv(const std::string& text, const std::string& source = "<memory>");

std::string ray_key(const std::string& station, const std::string& sat, int year, int doy, double sod);

struct JoinedRow {
  std::string station_id;
  std::string sat_id;
  double epoch_s = 0.0;
  double observed = 0.0;
  double predicted = 0.0;
};

// Pairs every prediction with its truth ray by (station, sat, year, doy, sod).
// Throws ValidationError naming the first prediction key without a truth row.
std::vector<JoinedRow> join_predictions(std::span<const PredictionRow> preds, std::span<const RayRecord> truth);

// epoch,station,sat,observed,predicted sorted by station, sat, epoch.
std::string plot_timeseries_csv(std::span<const JoinedRow> rows);
// observed,predicted,count over 1-TECU cells keyed by their lower edges.
std::string plot_scatter_csv(std::span<const JoinedRow> rows);
// bin_lo,bin_hi,count of predicted - observed, every bin between the extremes.
std::string plot_residual_hist_csv(std::span<const JoinedRow> rows, double bin_width);

std::vector<RayRecord> select_partition(std::span<const RayRecord> rays, std::span<const Station> catalog,
                                        const RunConfig& config);

void cmd_simulate(const RunConfig& config);
void cmd_build_dataset(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_predict(const RunConfig& config);
void cmd_evaluate(const RunConfig& config);
void cmd_plotdata(const RunConfig& config);

}  // namespace stec
