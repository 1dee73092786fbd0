#include "stec/config.hpp"

#include <set>

#include "stec/checkpoint.hpp"
#include "stec/error.hpp"
#include "stec/io.hpp"
#include "stec/timeutil.hpp"

namespace stec {
namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require_object(j, where);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.contains(key)) throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

DayRange parse_days(const json& j, const std::string& where) {
  check_keys(j, {"first_year", "first_doy", "last_year", "last_doy"}, where);
  DayRange d;
  read(j, "first_year", d.first_year);
  read(j, "first_doy", d.first_doy);
  read(j, "last_year", d.last_year);
  read(j, "last_doy", d.last_doy);
  return d;
}

RegionBounds parse_region(const json& j) {
  check_keys(j, {"lat_lo", "lat_hi", "lon_lo", "lon_hi"}, "region");
  RegionBounds r;
  read(j, "lat_lo", r.lat_lo);
  read(j, "lat_hi", r.lat_hi);
  read(j, "lon_lo", r.lon_lo);
  read(j, "lon_hi", r.lon_hi);
  if (!(r.lat_lo < r.lat_hi) || !(r.lon_lo < r.lon_hi)) throw ValidationError("region bounds are inverted");
  return r;
}

IonosphereModel parse_ionosphere(const json& j) {
  check_keys(j, {"n_max", "h_max", "b_thick", "diurnal_amp", "equator_amp", "local_noon_sod", "drift_amp"},
             "simulation.ionosphere");
  IonosphereModel m;
  m.base.n_max = 1e12;
  m.diurnal_amp = 0.5;
  m.equator_amp = 0.3;
  read(j, "n_max", m.base.n_max);
  read(j, "h_max", m.base.h_max);
  read(j, "b_thick", m.base.b_thick);
  read(j, "diurnal_amp", m.diurnal_amp);
  read(j, "equator_amp", m.equator_amp);
  read(j, "local_noon_sod", m.local_noon_sod);
  read(j, "drift_amp", m.drift_amp);
  return m;
}

SimulationConfig parse_simulation(const json& j) {
  check_keys(j,
             {"stations", "n_sats", "start_year", "start_doy", "n_days", "cadence_s", "cutoff_deg", "n_quad",
              "ionosphere", "drift_start_day", "drift_end_day", "rays_file", "stations_file"},
             "simulation");
  SimulationConfig s;
  s.ionosphere = parse_ionosphere(json::object());
  if (j.contains("stations")) {
    const json& st = j.at("stations");
    check_keys(st, {"grid", "list", "n_test", "n_validation", "test_ids", "validation_ids"}, "simulation.stations");
    if (st.contains("grid")) {
      const json& g = st.at("grid");
      check_keys(g, {"lat_lo", "lat_hi", "lon_lo", "lon_hi", "n_lat", "n_lon", "alt_km"}, "simulation.stations.grid");
      StationGrid grid;
      read(g, "lat_lo", grid.lat_lo);
      read(g, "lat_hi", grid.lat_hi);
      read(g, "lon_lo", grid.lon_lo);
      read(g, "lon_hi", grid.lon_hi);
      read(g, "n_lat", grid.n_lat);
      read(g, "n_lon", grid.n_lon);
      read(g, "alt_km", grid.alt_km);
      s.grid = grid;
    }
    if (st.contains("list")) {
      for (const auto& e : st.at("list")) {
        check_keys(e, {"id", "lat_deg", "lon_deg", "alt_km", "role"}, "simulation.stations.list entry");
        s.listed.push_back({e.at("id").get<std::string>(),
                            GeodeticPos(e.at("lat_deg").get<double>(), e.at("lon_deg").get<double>(),
                                        e.value("alt_km", 0.0)),
                            e.value("role", std::string())});
      }
    }
    read(st, "n_test", s.n_test);
    read(st, "n_validation", s.n_validation);
    read(st, "test_ids", s.test_ids);
    read(st, "validation_ids", s.validation_ids);
  } else {
    s.grid = StationGrid{};
  }
  read(j, "n_sats", s.n_sats);
  read(j, "start_year", s.start_year);
  read(j, "start_doy", s.start_doy);
  read(j, "n_days", s.n_days);
  read(j, "cadence_s", s.cadence_s);
  read(j, "cutoff_deg", s.cutoff_deg);
  read(j, "n_quad", s.n_quad);
  if (j.contains("ionosphere")) s.ionosphere = parse_ionosphere(j.at("ionosphere"));
  read(j, "drift_start_day", s.drift_start_day);
  read(j, "drift_end_day", s.drift_end_day);
  read(j, "rays_file", s.rays_file);
  read(j, "stations_file", s.stations_file);
  s.validate();
  return s;
}

ModelConfig parse_model(const json& j) {
  check_keys(j, {"kind", "train", "ann", "forest"}, "model");
  ModelConfig m;
  if (j.contains("kind")) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "deeponet") m.kind = ModelKind::deeponet;
    else if (kind == "ann") m.kind = ModelKind::ann;
    else if (kind == "forest") m.kind = ModelKind::forest;
    else throw ValidationError("unknown model kind '" + kind + "'");
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    require_object(t, "model.train");
    if (t.contains("seed")) throw ValidationError("model.train.seed is not allowed; set the top-level seed");
    if (t.contains("preset")) {
      const auto preset = t.at("preset").get<std::string>();
      if (preset == "desk") m.train = TrainConfig::desk();
      else if (preset == "full") {
        m.train = TrainConfig::full();
        m.ann_depth = 46;
      }
      else throw ValidationError("unknown preset '" + preset + "'");
      json rest = t;
      rest.erase("preset");
      m.train = train_config_from_json(rest, m.train);
    } else {
      m.train = train_config_from_json(t, m.train);
    }
  }
  if (j.contains("ann")) {
    const json& a = j.at("ann");
    check_keys(a, {"hidden_width", "depth"}, "model.ann");
    read(a, "hidden_width", m.ann_hidden_width);
    read(a, "depth", m.ann_depth);
  }
  if (j.contains("forest")) {
    const json& f = j.at("forest");
    check_keys(f, {"n_trees", "max_depth", "bootstrap", "min_samples_split", "max_features", "max_samples"},
               "model.forest");
    read(f, "n_trees", m.forest.n_trees);
    read(f, "max_depth", m.forest.max_depth);
    read(f, "bootstrap", m.forest.bootstrap);
    read(f, "min_samples_split", m.forest.min_samples_split);
    read(f, "max_features", m.forest.max_features);
    read(f, "max_samples", m.forest.max_samples);
  }
  m.train.validate();
  m.forest.validate();
  return m;
}

}  // namespace

void SimulationConfig::validate() const {
  if (!grid && listed.empty()) throw ValidationError("simulation needs a station grid or list");
  if (grid && (grid->n_lat < 1 || grid->n_lon < 1)) throw ValidationError("station grid needs n_lat, n_lon >= 1");
  if (n_sats < 1) throw ValidationError("n_sats must be >= 1");
  if (n_days < 1) throw ValidationError("n_days must be >= 1");
  if (cadence_s < 1 || 86400 % cadence_s != 0) throw ValidationError("cadence_s must divide 86400");
  if (start_doy < 1 || start_doy > days_in_year(start_year)) throw ValidationError("start_doy out of range");
  if (n_quad < 8 || n_quad % 2) throw ValidationError("n_quad must be even and >= 8");
  if (n_test < 0 || n_validation < 0) throw ValidationError("role counts must be >= 0");
  if (ionosphere.drift_amp != 0.0 && !(drift_end_day > drift_start_day)) {
    throw ValidationError("drift_end_day must exceed drift_start_day when drift_amp is set");
  }
  IonosphereModel m = ionosphere;
  m.drift_start_s = 0.0;
  m.drift_end_s = 1.0;
  m.validate();
}

std::filesystem::path RunConfig::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : output_dir / path;
}

SplitSpec RunConfig::split_for(std::span<const Station> catalog) const {
  if (!has_split) throw ValidationError("config has no split section");
  return split_from_catalog(catalog, train_days, test_days);
}

RunConfig parse_run_config(const json& j, const ConfigOverrides& overrides) {
  check_keys(j, {"seed", "output_dir", "simulation", "dataset", "split", "model", "train", "predict", "evaluate", "plotdata"},
             "config");
  RunConfig c;
  read(j, "seed", c.seed);
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.output_dir) c.output_dir = *overrides.output_dir;

  if (j.contains("simulation")) c.simulation = parse_simulation(j.at("simulation"));
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    check_keys(d, {"rays", "stations", "downsample", "output_rays", "output_stations"}, "dataset");
    BuildDatasetConfig b;
    read(d, "rays", b.rays);
    read(d, "stations", b.stations);
    read(d, "output_rays", b.output_rays);
    read(d, "output_stations", b.output_stations);
    if (d.contains("downsample")) {
      const json& ds = d.at("downsample");
      check_keys(ds, {"cell_deg", "region"}, "dataset.downsample");
      DownsampleConfig dc;
      read(ds, "cell_deg", dc.cell_deg);
      if (ds.contains("region")) dc.region = parse_region(ds.at("region"));
      if (!(dc.cell_deg > 0.0)) throw ValidationError("dataset.downsample.cell_deg must be > 0");
      b.downsample = dc;
    }
    c.dataset = b;
  }
  if (j.contains("split")) {
    const json& s = j.at("split");
    check_keys(s, {"train_days", "test_days"}, "split");
    c.train_days = parse_days(s.at("train_days"), "split.train_days");
    c.test_days = parse_days(s.at("test_days"), "split.test_days");
    c.has_split = true;
    SplitSpec probe;
    probe.train_days = c.train_days;
    probe.test_days = c.test_days;
    probe.validate();
  }
  if (j.contains("model")) c.model = parse_model(j.at("model"));
  c.model.train.seed = c.seed;
  c.model.forest.seed = c.seed;
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, {"rays", "stations", "checkpoint", "log"}, "train");
    read(t, "rays", c.train.rays);
    read(t, "stations", c.train.stations);
    read(t, "checkpoint", c.train.checkpoint);
    read(t, "log", c.train.log);
  }
  if (j.contains("predict")) {
    const json& p = j.at("predict");
    check_keys(p, {"checkpoint", "rays", "stations", "partition", "output"}, "predict");
    read(p, "checkpoint", c.predict.checkpoint);
    read(p, "rays", c.predict.rays);
    read(p, "stations", c.predict.stations);
    read(p, "partition", c.predict.partition);
    read(p, "output", c.predict.output);
    const auto& part = c.predict.partition;
    if (part != "test" && part != "validation" && part != "train" && part != "all") {
      throw ValidationError("predict.partition must be test, validation, train or all");
    }
  }
  if (j.contains("evaluate")) {
    const json& e = j.at("evaluate");
    check_keys(e, {"predictions", "truth", "report_csv", "report_json"}, "evaluate");
    read(e, "predictions", c.evaluate.predictions);
    read(e, "truth", c.evaluate.truth);
    read(e, "report_csv", c.evaluate.report_csv);
    read(e, "report_json", c.evaluate.report_json);
  }
  if (j.contains("plotdata")) {
    const json& p = j.at("plotdata");
    check_keys(p, {"predictions", "truth", "kind", "output", "residual_bin_tecu"}, "plotdata");
    read(p, "predictions", c.plotdata.predictions);
    read(p, "truth", c.plotdata.truth);
    read(p, "kind", c.plotdata.kind);
    read(p, "output", c.plotdata.output);
    read(p, "residual_bin_tecu", c.plotdata.residual_bin_tecu);
    const auto& k = c.plotdata.kind;
    if (k != "timeseries" && k != "scatter" && k != "residual-hist") {
      throw ValidationError("plotdata.kind must be timeseries, scatter or residual-hist");
    }
    if (!(c.plotdata.residual_bin_tecu > 0.0)) throw ValidationError("plotdata.residual_bin_tecu must be > 0");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  try {
    return parse_run_config(j, overrides);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace stec
