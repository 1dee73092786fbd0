#include "stec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_set>

#include "stec/error.hpp"
#include "stec/io.hpp"

namespace stec {
namespace {

constexpr std::string_view kRayHeader =
    "station_id,sat_id,rx_lat_deg,rx_lon_deg,rx_alt_km,sat_x_km,sat_y_km,sat_z_km,year,doy,sod,stec_tecu";
constexpr std::string_view kStationHeader = "station_id,lat_deg,lon_deg,alt_km,role";
constexpr std::array<std::string_view, 12> kRayColumns = {
    "station_id", "sat_id", "rx_lat_deg", "rx_lon_deg", "rx_alt_km", "sat_x_km",
    "sat_y_km",   "sat_z_km", "year",     "doy",        "sod",       "stec_tecu"};

int day_key(int year, int doy) { return year * 1000 + doy; }

bool valid_id(std::string_view id) {
  return !id.empty() && id.find_first_of(",\r\n") == std::string_view::npos;
}

}  // namespace

void RayRecord::validate() const {
  if (!valid_id(station_id)) throw ValidationError("invalid station_id '" + station_id + "'");
  if (!valid_id(sat_id)) throw ValidationError("invalid sat_id '" + sat_id + "'");
  if (doy < 1 || doy > 366) throw ValidationError("doy out of range: " + std::to_string(doy));
  if (!(sod >= 0.0 && sod < kSodPeriodS)) throw ValidationError("sod out of range: " + io::format_sig9(sod));
  if (!std::isfinite(stec_tecu) || stec_tecu < 0.0) {
    throw ValidationError("stec_tecu must be finite and >= 0: " + io::format_sig9(stec_tecu));
  }
  if (!std::isfinite(sat.x_km) || !std::isfinite(sat.y_km) || !std::isfinite(sat.z_km)) {
    throw ValidationError("satellite position not finite");
  }
}

bool DayRange::contains(int year, int doy) const {
  const int k = day_key(year, doy);
  return k >= day_key(first_year, first_doy) && k <= day_key(last_year, last_doy);
}

void SplitSpec::validate() const {
  std::set<std::string> seen;
  for (const auto* ids : {&train_station_ids, &validation_station_ids, &test_station_ids}) {
    std::set<std::string> local(ids->begin(), ids->end());
    for (const auto& id : local) {
      if (!seen.insert(id).second) throw ValidationError("station '" + id + "' appears in two partitions");
    }
  }
  if (day_key(train_days.first_year, train_days.first_doy) > day_key(train_days.last_year, train_days.last_doy) ||
      day_key(test_days.first_year, test_days.first_doy) > day_key(test_days.last_year, test_days.last_doy)) {
    throw ValidationError("day range is inverted");
  }
  if (day_key(test_days.first_year, test_days.first_doy) <= day_key(train_days.last_year, train_days.last_doy)) {
    throw ValidationError("test days must follow training days");
  }
}

Partitions partition(std::span<const RayRecord> records, const SplitSpec& split) {
  split.validate();
  const std::unordered_set<std::string> train(split.train_station_ids.begin(), split.train_station_ids.end());
  const std::unordered_set<std::string> val(split.validation_station_ids.begin(),
                                            split.validation_station_ids.end());
  const std::unordered_set<std::string> test(split.test_station_ids.begin(), split.test_station_ids.end());
  Partitions out;
  for (const auto& r : records) {
    if (split.train_days.contains(r.year, r.doy)) {
      if (train.contains(r.station_id)) out.train.push_back(r);
      else if (val.contains(r.station_id)) out.validation.push_back(r);
    } else if (split.test_days.contains(r.year, r.doy) && test.contains(r.station_id)) {
      out.test.push_back(r);
    }
  }
  return out;
}

TimeEncoding encode_time(double sod, double period) {
  if (!(period > 0.0)) throw ValidationError("period must be > 0");
  const double a = 2.0 * std::numbers::pi * std::fmod(sod, period) / period;
  return {std::sin(a), std::cos(a)};
}

std::vector<Station> grid_downsample(std::span<const Station> stations, double cell_deg,
                                     const RegionBounds& region) {
  if (!(cell_deg > 0.0)) throw ValidationError("cell_deg must be > 0");
  struct Pick {
    const Station* station;
    double dist2;
  };
  std::map<std::pair<long, long>, Pick> cells;
  for (const auto& s : stations) {
    const double lat = s.pos.lat_deg(), lon = s.pos.lon_deg();
    if (lat < region.lat_lo || lat > region.lat_hi || lon < region.lon_lo || lon > region.lon_hi) continue;
    const long i = static_cast<long>(std::floor((lat - region.lat_lo) / cell_deg));
    const long j = static_cast<long>(std::floor((lon - region.lon_lo) / cell_deg));
    const double dlat = lat - (region.lat_lo + (i + 0.5) * cell_deg);
    const double dlon = lon - (region.lon_lo + (j + 0.5) * cell_deg);
    const double d2 = dlat * dlat + dlon * dlon;
    auto [it, inserted] = cells.try_emplace({i, j}, Pick{&s, d2});
    if (!inserted && (d2 < it->second.dist2 || (d2 == it->second.dist2 && s.id < it->second.station->id))) {
      it->second = Pick{&s, d2};
    }
  }
  std::vector<Station> out;
  out.reserve(cells.size());
  for (const auto& [key, pick] : cells) out.push_back(*pick.station);
  std::sort(out.begin(), out.end(), [](const Station& a, const Station& b) { return a.id < b.id; });
  return out;
}

AifwWeights compute_aifw(std::span<const double> targets, double bin_width, double lambda) {
  if (targets.empty()) throw ValidationError("AIFW needs at least one target");
  if (!(bin_width > 0.0)) throw ValidationError("bin_width must be > 0");
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
  std::vector<long long> bins(targets.size());
  std::map<long long, std::size_t> counts;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i] >= 0.0) || !std::isfinite(targets[i])) {
      throw ValidationError("AIFW targets must be finite and >= 0");
    }
    bins[i] = static_cast<long long>(std::floor(targets[i] / bin_width));
    ++counts[bins[i]];
  }
  std::map<long long, double> bin_weight;
  for (const auto& [b, n] : counts) {
    const double centre = std::max((static_cast<double>(b) + 0.5) * bin_width, bin_width);
    bin_weight[b] = std::pow(centre / static_cast<double>(n), lambda);
  }
  AifwWeights out{bin_width, lambda, {}};
  out.weights.reserve(targets.size());
  for (long long b : bins) out.weights.push_back(bin_weight[b]);
  return out;
}

FeatureVector featurize(const RayRecord& r) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const LookAngles look = elevation_azimuth(r.rx, r.sat);
  const TimeEncoding te = encode_time(r.sod);
  auto unit = [](double v) { return std::clamp(v / kOrbitRadiusKm, -1.0, 1.0); };
  return {r.rx.lat_deg() / 90.0,
          std::sin(r.rx.lon_deg() * kDeg),
          std::cos(r.rx.lon_deg() * kDeg),
          unit(r.sat.x_km),
          unit(r.sat.y_km),
          unit(r.sat.z_km),
          look.elevation_deg / 90.0,
          static_cast<double>(r.doy) / 366.0,
          te.sod_sin,
          te.sod_cos};
}

std::string format_csv(std::span<const RayRecord> records) {
  std::string out(kRayHeader);
  out += '\n';
  for (const auto& r : records) {
    r.validate();
    out += r.station_id;
    out += ',';
    out += r.sat_id;
    for (double v : {r.rx.lat_deg(), r.rx.lon_deg(), r.rx.alt_km(), r.sat.x_km, r.sat.y_km, r.sat.z_km}) {
      out += ',';
      out += io::format_sig9(v);
    }
    out += ',' + std::to_string(r.year) + ',' + std::to_string(r.doy) + ',' +
           std::to_string(std::llround(r.sod)) + ',' + io::format_sig9(r.stec_tecu) + '\n';
  }
  return out;
}

std::vector<RayRecord> parse_csv(const std::string& text, const std::string& source) {
  const auto lines = io::split_lines(text);
  if (lines.empty() || lines[0] != kRayHeader) {
    throw ValidationError(source + " line 1: expected header '" + std::string(kRayHeader) + "'");
  }
  std::vector<RayRecord> out;
  out.reserve(lines.size() - 1);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = io::split_fields(lines[ln]);
    if (f.size() != kRayColumns.size()) {
      throw ValidationError(source + " line " + std::to_string(ln + 1) + ": expected 12 columns, got " +
                            std::to_string(f.size()));
    }
    auto num = [&](std::size_t c) {
      return io::parse_double(f[c], {source, ln + 1, c + 1, kRayColumns[c]});
    };
    auto integer = [&](std::size_t c) {
      return io::parse_int(f[c], {source, ln + 1, c + 1, kRayColumns[c]});
    };
    try {
      RayRecord r;
      r.station_id = std::string(f[0]);
      r.sat_id = std::string(f[1]);
      r.rx = GeodeticPos(num(2), num(3), num(4));
      r.sat = EcefPos{num(5), num(6), num(7)};
      r.year = static_cast<int>(integer(8));
      r.doy = static_cast<int>(integer(9));
      r.sod = num(10);
      r.stec_tecu = num(11);
      r.validate();
      out.push_back(std::move(r));
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      if (what.rfind(source, 0) == 0) throw;
      throw ValidationError(source + " line " + std::to_string(ln + 1) + ": " + what);
    }
  }
  return out;
}

std::vector<RayRecord> load_csv(const std::filesystem::path& path) {
  return parse_csv(io::read_file(path), path.string());
}

void save_csv(std::span<const RayRecord> records, const std::filesystem::path& path) {
  io::write_file_atomic(path, format_csv(records));
}

std::vector<Station> load_station_catalog(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  const std::string source = path.string();
  const auto lines = io::split_lines(text);
  if (lines.empty() || lines[0] != kStationHeader) {
    throw ValidationError(source + " line 1: expected header '" + std::string(kStationHeader) + "'");
  }
  constexpr std::array<std::string_view, 5> cols = {"station_id", "lat_deg", "lon_deg", "alt_km", "role"};
  std::vector<Station> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = io::split_fields(lines[ln]);
    const std::string where = source + " line " + std::to_string(ln + 1);
    if (f.size() != cols.size()) throw ValidationError(where + ": expected 5 columns");
    const std::string role(f[4]);
    if (role != "train" && role != "validation" && role != "test") {
      throw ValidationError(where + ", column 5 (role): unknown role '" + role + "'");
    }
    if (!valid_id(f[0])) throw ValidationError(where + ": invalid station_id");
    try {
      out.push_back({std::string(f[0]),
                     GeodeticPos(io::parse_double(f[1], {source, ln + 1, 2, cols[1]}),
                                 io::parse_double(f[2], {source, ln + 1, 3, cols[2]}),
                                 io::parse_double(f[3], {source, ln + 1, 4, cols[3]})),
                     role});
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      if (what.rfind(source, 0) == 0) throw;
      throw ValidationError(where + ": " + what);
    }
  }
  return out;
}

void save_station_catalog(std::span<const Station> stations, const std::filesystem::path& path) {
  std::string out(kStationHeader);
  out += '\n';
  for (const auto& s : stations) {
    out += s.id + ',' + io::format_sig9(s.pos.lat_deg()) + ',' + io::format_sig9(s.pos.lon_deg()) + ',' +
           io::format_sig9(s.pos.alt_km()) + ',' + s.role + '\n';
  }
  io::write_file_atomic(path, out);
}

SplitSpec split_from_catalog(std::span<const Station> stations, const DayRange& train_days,
                             const DayRange& test_days) {
  SplitSpec split;
  split.train_days = train_days;
  split.test_days = test_days;
  for (const auto& s : stations) {
    if (s.role == "train") split.train_station_ids.push_back(s.id);
    else if (s.role == "validation") split.validation_station_ids.push_back(s.id);
    else split.test_station_ids.push_back(s.id);
  }
  split.validate();
  return split;
}

}  // namespace stec
