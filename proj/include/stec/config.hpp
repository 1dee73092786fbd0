#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stec/baselines.hpp"
#include "stec/dataset.hpp"
#include "stec/ionosim.hpp"
#include "stec/training.hpp"

namespace stec {

struct StationGrid {
  double lat_lo = 33.0, lat_hi = 43.0;
  double lon_lo = -90.0, lon_hi = -80.0;
  int n_lat = 5, n_lon = 5;
  double alt_km = 0.0;
};

struct SimulationConfig {
  std::optional<StationGrid> grid;
  std::vector<Station> listed;  // used when no grid is given; roles optional
  int n_test = 3;
  int n_validation = 2;
  std::vector<std::string> test_ids;        // explicit roles override n_test
  std::vector<std::string> validation_ids;  // explicit roles override n_validation
  int n_sats = 8;
  int start_year = 2020;
  int start_doy = 153;
  int n_days = 30;
  int cadence_s = 300;
  double cutoff_deg = 15.0;
  int n_quad = 256;
  IonosphereModel ionosphere;
  // Drift window in days from the start of the simulation.
  double drift_start_day = 0.0;
  double drift_end_day = 0.0;
  std::string rays_file = "rays.csv";
  std::string stations_file = "stations.csv";

  void validate() const;
};

struct DownsampleConfig {
  double cell_deg = 0.77;
  RegionBounds region;
};

struct BuildDatasetConfig {
  std::string rays = "rays.csv";
  std::string stations = "stations.csv";
  std::optional<DownsampleConfig> downsample;
  std::string output_rays = "dataset_rays.csv";
  std::string output_stations = "dataset_stations.csv";
};

enum class ModelKind { deeponet, ann, forest };

struct ModelConfig {
  ModelKind kind = ModelKind::deeponet;
  TrainConfig train = TrainConfig::desk();
  int ann_hidden_width = 64;
  int ann_depth = 8;
  ForestParams forest;
};

struct TrainFiles {
  std::string rays = "rays.csv";
  std::string stations = "stations.csv";
  std::string checkpoint = "model.json";
  std::string log = "train_log.csv";
};

struct PredictConfig {
  std::string checkpoint = "model.json";
  std::string rays = "rays.csv";
  std::string stations = "stations.csv";
  std::string partition = "test";  // test | validation | train | all
  std::string output = "predictions.csv";
};

struct EvaluateConfig {
  std::string predictions = "predictions.csv";
  std::string truth = "rays.csv";
  std::string report_csv = "report.csv";
  std::string report_json = "report.json";
};

struct PlotDataConfig {
  std::string predictions = "predictions.csv";
  std::string truth = "rays.csv";
  std::string kind = "timeseries";  // timeseries | scatter | residual-hist
  std::string output;               // default plot_<kind>.csv
  double residual_bin_tecu = 0.1;
};

/// Whole-experiment configuration; one JSON file drives every subcommand.
struct RunConfig {
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = ".";
  std::optional<SimulationConfig> simulation;
  std::optional<BuildDatasetConfig> dataset;
  DayRange train_days;
  DayRange test_days;
  bool has_split = false;
  ModelConfig model;
  TrainFiles train;
  PredictConfig predict;
  EvaluateConfig evaluate;
  PlotDataConfig plotdata;

  // Relative paths resolve against output_dir.
  std::filesystem::path resolve(const std::string& p) const;
  SplitSpec split_for(std::span<const Station> catalog) const;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

// Throws ValidationError on unknown keys or invalid values.
RunConfig parse_run_config(const nlohmann::json& j, const ConfigOverrides& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

}  // namespace stec
