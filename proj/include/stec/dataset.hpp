#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stec/geometry.hpp"

namespace stec {

inline constexpr std::size_t kFeatureDim = 10;
inline constexpr double kSodPeriodS = 86400.0;
inline constexpr double kDefaultAifwLambda = 0.05;

struct RayRecord {
  std::string station_id;
  std::string sat_id;
  GeodeticPos rx;
  EcefPos sat;
  int year = 2020;
  int doy = 1;
  double sod = 0.0;
  double stec_tecu = 0.0;

  void validate() const;
  friend bool operator==(const RayRecord&, const RayRecord&) = default;
};

struct TimeEncoding {
  double sod_sin = 0.0;
  double sod_cos = 1.0;
};

/// Trunk-network input: [rx_lat/90, sin(rx_lon), cos(rx_lon), sat_x/R_orb,
/// sat_y/R_orb, sat_z/R_orb, elevation/90, doy/366, sin(sod), cos(sod)].
using FeatureVector = std::array<double, kFeatureDim>;

struct DayRange {
  int first_year = 2020;
  int first_doy = 1;
  int last_year = 2020;
  int last_doy = 366;

  bool contains(int year, int doy) const;
};

struct SplitSpec {
  std::vector<std::string> train_station_ids;
  std::vector<std::string> validation_station_ids;
  std::vector<std::string> test_station_ids;
  DayRange train_days;
  DayRange test_days;

  // Throws ValidationError on overlapping station sets or test days that do
  // not follow the training days.
  void validate() const;
};

struct Partitions {
  std::vector<RayRecord> train;
  std::vector<RayRecord> validation;
  std::vector<RayRecord> test;
};

// train: train stations on train days; validation: validation stations on
// train days; test: test stations on test days. Anything else is dropped.
Partitions partition(std::span<const RayRecord> records, const SplitSpec& split);

struct AifwWeights {
  double bin_width = 1.0;
  double lambda = kDefaultAifwLambda;
  std::vector<double> weights;
};

struct Station {
  std::string id;
  GeodeticPos pos;
  std::string role;  // train | validation | test
  friend bool operator==(const Station&, const Station&) = default;
};

struct RegionBounds {
  double lat_lo = -90.0;
  double lat_hi = 90.0;
  double lon_lo = -180.0;
  double lon_hi = 180.0;
};

TimeEncoding encode_time(double sod, double period = kSodPeriodS);

// Keeps at most one station per cell_deg x cell_deg cell anchored at the
// region's south-west corner; the survivor is the one nearest the cell
// centre, ties broken by smaller id. Stations outside the region are dropped.
// Output is sorted by id.
std::vector<Station> grid_downsample(std::span<const Station> stations, double cell_deg,
                                     const RegionBounds& region);

// Bin b = floor(y / bin_width), weight = (max(centre_b, bin_width) / count_b)^lambda.
AifwWeights compute_aifw(std::span<const double> targets, double bin_width = 1.0,
                         double lambda = kDefaultAifwLambda);

FeatureVector featurize(const RayRecord& r);

std::vector<RayRecord> load_csv(const std::filesystem::path& path);
void save_csv(std::span<const RayRecord> records, const std::filesystem::path& path);
std::string format_csv(std::span<const RayRecord> records);
std::vector<RayRecord> parse_csv(const std::string& text, const std::string& source = "<memory>");

std::vector<Station> load_station_catalog(const std::filesystem::path& path);
void save_station_catalog(std::span<const Station> stations, const std::filesystem::path& path);

// Station lists by role, in catalog order.
SplitSpec split_from_catalog(std::span<const Station> stations, const DayRange& train_days,
                             const DayRange& test_days);

}  // namespace stec
