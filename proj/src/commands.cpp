#include "stec/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "stec/checkpoint.hpp"
#include "stec/error.hpp"
#include "stec/io.hpp"
#include "stec/ionosim.hpp"
#include "stec/metrics.hpp"
#include "stec/timeutil.hpp"

namespace stec {
namespace {

constexpr std::uint64_t kRoleStream = 21;
constexpr std::string_view kPredictionHeader = "station_id,sat_id,year,doy,sod,predicted_tecu,extrapolated";

void require_input(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw ValidationError("input file not found: " + path.string());
}

void prepare_output_dir(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw ComputeError("cannot create output directory " + config.output_dir.string() + ": " + ec.message());
}

std::string two_digit(int i, char prefix) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%02d", prefix, i);
  return buf;
}

void assign_roles(std::vector<Station>& stations, const SimulationConfig& sim, std::uint64_t seed) {
  const bool explicit_roles = !sim.test_ids.empty() || !sim.validation_ids.empty();
  if (explicit_roles) {
    std::set<std::string> known;
    for (const auto& s : stations) known.insert(s.id);
    for (const auto* ids : {&sim.test_ids, &sim.validation_ids}) {
      for (const auto& id : *ids) {
        if (!known.contains(id)) throw ValidationError("role list names unknown station '" + id + "'");
      }
    }
    for (auto& s : stations) {
      const bool is_test = std::find(sim.test_ids.begin(), sim.test_ids.end(), s.id) != sim.test_ids.end();
      const bool is_val =
          std::find(sim.validation_ids.begin(), sim.validation_ids.end(), s.id) != sim.validation_ids.end();
      if (is_test && is_val) throw ValidationError("station '" + s.id + "' is both test and validation");
      s.role = is_test ? "test" : is_val ? "validation" : "train";
    }
    return;
  }
  const bool listed_roles = std::all_of(stations.begin(), stations.end(), [](const Station& s) { return !s.role.empty(); });
  if (listed_roles && !stations.empty()) return;

  const std::size_t n = stations.size();
  if (static_cast<std::size_t>(sim.n_test + sim.n_validation) >= n) {
    throw ValidationError("n_test + n_validation must leave at least one training station");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, kRoleStream));
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  for (auto& s : stations) s.role = "train";
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < static_cast<std::size_t>(sim.n_test)) stations[order[i]].role = "test";
    else if (i < static_cast<std::size_t>(sim.n_test + sim.n_validation)) stations[order[i]].role = "validation";
  }
}

std::string fmt_int(long long v) { return std::to_string(v); }

}  // namespace

std::string sat_id(int sat_index) { return two_digit(sat_index + 1, 'G'); }

std::vector<Station> place_stations(const SimulationConfig& sim, std::uint64_t seed) {
  sim.validate();
  std::vector<Station> stations;
  if (sim.grid) {
    const StationGrid& g = *sim.grid;
    int idx = 0;
    for (int i = 0; i < g.n_lat; ++i) {
      const double lat = g.n_lat == 1 ? g.lat_lo : g.lat_lo + (g.lat_hi - g.lat_lo) * i / (g.n_lat - 1);
      for (int j = 0; j < g.n_lon; ++j) {
        const double lon = g.n_lon == 1 ? g.lon_lo : g.lon_lo + (g.lon_hi - g.lon_lo) * j / (g.n_lon - 1);
        stations.push_back({two_digit(idx++, 'S'), GeodeticPos(lat, lon, g.alt_km), ""});
      }
    }
  } else {
    stations = sim.listed;
    std::set<std::string> seen;
    for (const auto& s : stations) {
      if (!seen.insert(s.id).second) throw ValidationError("duplicate station id '" + s.id + "'");
      if (!s.role.empty() && s.role != "train" && s.role != "validation" && s.role != "test") {
        throw ValidationError("station '" + s.id + "' has unknown role '" + s.role + "'");
      }
    }
  }
  assign_roles(stations, sim, seed);
  return stations;
}

SimulationOutput simulate(const SimulationConfig& sim, std::uint64_t seed) {
  SimulationOutput out;
  out.stations = place_stations(sim, seed);

  IonosphereModel model = sim.ionosphere;
  const double t0 = epoch_seconds(sim.start_year, sim.start_doy, 0.0);
  model.drift_start_s = t0 + sim.drift_start_day * kSecondsPerDay;
  model.drift_end_s = t0 + sim.drift_end_day * kSecondsPerDay;
  if (model.drift_amp == 0.0 && !(model.drift_end_s > model.drift_start_s)) model.drift_end_s = model.drift_start_s + 1.0;
  model.validate();

  std::vector<EcefPos> sats(static_cast<std::size_t>(sim.n_sats));
  for (int d = 0; d < sim.n_days; ++d) {
    const CalendarEpoch day = add_days(sim.start_year, sim.start_doy, d);
    for (int sod = 0; sod < 86400; sod += sim.cadence_s) {
      const double t = epoch_seconds(day.year, day.doy, sod);
      for (int k = 0; k < sim.n_sats; ++k) sats[static_cast<std::size_t>(k)] = synth_orbit(k, t);
      for (const auto& st : out.stations) {
        for (int k = 0; k < sim.n_sats; ++k) {
          const auto& sat = sats[static_cast<std::size_t>(k)];
          const auto ray = make_ray(st.pos, sat, sim.cutoff_deg);
          if (!ray) continue;
          RayRecord r{st.id, sat_id(k), st.pos, sat, day.year, day.doy, static_cast<double>(sod),
                      stec_along_ray(*ray, t, model, sim.n_quad)};
          out.rays.push_back(std::move(r));
        }
      }
    }
  }
  return out;
}

std::string format_predictions_csv(std::span<const PredictionRow> rows) {
  std::string out(kPredictionHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.station_id + ',' + r.sat_id + ',' + fmt_int(r.year) + ',' + fmt_int(r.doy) + ',' +
           fmt_int(std::llround(r.sod)) + ',' + io::format_sig9(r.predicted_tecu) + ',' +
           (r.extrapolated ? "1" : "0") + '\n';
  }
  return out;
}

std::vector<PredictionRow> parse_predictions_csv(const std::string& text, const std::string& source) {
  const auto lines = io::split_lines(text);
  if (lines.empty() || lines[0] != kPredictionHeader) {
    throw ValidationError(source + " line 1: expected header '" + std::string(kPredictionHeader) + "'");
  }
  constexpr std::array<std::string_view, 7> cols = {"station_id", "sat_id", "year", "doy",
                                                    "sod", "predicted_tecu", "extrapolated"};
  std::vector<PredictionRow> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = io::split_fields(lines[i]);
    if (f.size() != cols.size()) {
      throw ValidationError(source + " line " + std::to_string(i + 1) + ": expected 7 fields, got " +
                            std::to_string(f.size()));
    }
    auto ctx = [&](std::size_t c) { return io::FieldContext{source, i + 1, c + 1, cols[c]}; };
    PredictionRow r;
    r.station_id = std::string(f[0]);
    r.sat_id = std::string(f[1]);
    r.year = static_cast<int>(io::parse_int(f[2], ctx(2)));
    r.doy = static_cast<int>(io::parse_int(f[3], ctx(3)));
    r.sod = static_cast<double>(io::parse_int(f[4], ctx(4)));
    r.predicted_tecu = io::parse_double(f[5], ctx(5));
    const auto flag = io::parse_int(f[6], ctx(6));
    if (flag != 0 && flag != 1) {
      throw ValidationError(source + " line " + std::to_string(i + 1) + ", column 7 (extrapolated): expected 0 or 1");
    }
    r.extrapolated = flag == 1;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string ray_key(const std::string& station, const std::string& sat, int year, int doy, double sod) {
  return station + '/' + sat + '/' + std::to_string(year) + '/' + std::to_string(doy) + '/' +
         std::to_string(std::llround(sod));
}

std::vector<JoinedRow> join_predictions(std::span<const PredictionRow> preds, std::span<const RayRecord> truth) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& t = truth[i];
    index.emplace(ray_key(t.station_id, t.sat_id, t.year, t.doy, t.sod), i);
  }
  std::vector<JoinedRow> out;
  out.reserve(preds.size());
  std::set<std::string> used;
  for (const auto& p : preds) {
    const std::string key = ray_key(p.station_id, p.sat_id, p.year, p.doy, p.sod);
    const auto it = index.find(key);
    if (it == index.end()) throw ValidationError("prediction/truth mismatch: no truth row for key " + key);
    if (!used.insert(key).second) throw ValidationError("prediction/truth mismatch: duplicate prediction key " + key);
    const auto& t = truth[it->second];
    out.push_back({p.station_id, p.sat_id, epoch_seconds(p.year, p.doy, p.sod), t.stec_tecu, p.predicted_tecu});
  }
  return out;
}

std::string plot_timeseries_csv(std::span<const JoinedRow> rows) {
  std::vector<const JoinedRow*> order;
  order.reserve(rows.size());
  for (const auto& r : rows) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const JoinedRow* a, const JoinedRow* b) {
    if (a->station_id != b->station_id) return a->station_id < b->station_id;
    if (a->sat_id != b->sat_id) return a->sat_id < b->sat_id;
    return a->epoch_s < b->epoch_s;
  });
  std::string out = "epoch,station,sat,observed,predicted\n";
  for (const auto* r : order) {
    out += fmt_int(std::llround(r->epoch_s)) + ',' + r->station_id + ',' + r->sat_id + ',' +
           io::format_sig9(r->observed) + ',' + io::format_sig9(r->predicted) + '\n';
  }
  return out;
}

std::string plot_scatter_csv(std::span<const JoinedRow> rows) {
  std::map<std::pair<long long, long long>, std::size_t> cells;
  for (const auto& r : rows) {
    ++cells[{static_cast<long long>(std::floor(r.observed)), static_cast<long long>(std::floor(r.predicted))}];
  }
  std::string out = "observed,predicted,count\n";
  for (const auto& [cell, count] : cells) {
    out += fmt_int(cell.first) + ',' + fmt_int(cell.second) + ',' + std::to_string(count) + '\n';
  }
  return out;
}

std::string plot_residual_hist_csv(std::span<const JoinedRow> rows, double bin_width) {
  if (!(bin_width > 0.0)) throw ValidationError("residual bin width must be > 0");
  std::map<long long, std::size_t> bins;
  for (const auto& r : rows) ++bins[static_cast<long long>(std::floor((r.predicted - r.observed) / bin_width))];
  std::string out = "bin_lo,bin_hi,count\n";
  if (bins.empty()) return out;
  for (long long b = bins.begin()->first; b <= bins.rbegin()->first; ++b) {
    const auto it = bins.find(b);
    out += io::format_sig9(static_cast<double>(b) * bin_width) + ',' +
           io::format_sig9(static_cast<double>(b + 1) * bin_width) + ',' +
           std::to_string(it == bins.end() ? 0 : it->second) + '\n';
  }
  return out;
}

std::vector<RayRecord> select_partition(std::span<const RayRecord> rays, std::span<const Station> catalog,
                                        const RunConfig& config) {
  const std::string& which = config.predict.partition;
  if (which == "all") return {rays.begin(), rays.end()};
  Partitions parts = partition(rays, config.split_for(catalog));
  if (which == "test") return std::move(parts.test);
  if (which == "validation") return std::move(parts.validation);
  if (which == "train") return std::move(parts.train);
  throw ValidationError("unknown partition '" + which + "'");
}

void cmd_simulate(const RunConfig& config) {
  if (!config.simulation) throw ValidationError("config has no simulation section");
  prepare_output_dir(config);
  const SimulationOutput sim = simulate(*config.simulation, config.seed);
  save_station_catalog(sim.stations, config.resolve(config.simulation->stations_file));
  save_csv(sim.rays, config.resolve(config.simulation->rays_file));
}

void cmd_build_dataset(const RunConfig& config) {
  if (!config.dataset) throw ValidationError("config has no dataset section");
  const BuildDatasetConfig& d = *config.dataset;
  const auto rays_path = config.resolve(d.rays), stations_path = config.resolve(d.stations);
  require_input(rays_path);
  require_input(stations_path);
  prepare_output_dir(config);
  std::vector<Station> stations = load_station_catalog(stations_path);
  if (d.downsample) {
    const auto kept = grid_downsample(stations, d.downsample->cell_deg, d.downsample->region);
    std::set<std::string> ids;
    for (const auto& s : kept) ids.insert(s.id);
    std::erase_if(stations, [&](const Station& s) { return !ids.contains(s.id); });
  }
  std::set<std::string> ids;
  for (const auto& s : stations) ids.insert(s.id);
  std::vector<RayRecord> rays = load_csv(rays_path);
  std::erase_if(rays, [&](const RayRecord& r) { return !ids.contains(r.station_id); });
  save_station_catalog(stations, config.resolve(d.output_stations));
  save_csv(rays, config.resolve(d.output_rays));
}

void cmd_train(const RunConfig& config) {
  const auto rays_path = config.resolve(config.train.rays), stations_path = config.resolve(config.train.stations);
  require_input(rays_path);
  require_input(stations_path);
  prepare_output_dir(config);
  const auto catalog = load_station_catalog(stations_path);
  const SplitSpec split = config.split_for(catalog);
  const auto rays = load_csv(rays_path);

  std::string log = "epoch,train_loss,val_loss,seconds\n";
  auto last = std::chrono::steady_clock::now();
  EpochLogger logger = [&](int epoch, double train_loss, double val_loss, double) {
    const auto now = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(now - last).count();
    last = now;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.3f\n", epoch, train_loss, val_loss, seconds);
    log += buf;
  };

  AnyModel model;
  switch (config.model.kind) {
    case ModelKind::deeponet:
      model = train(rays, split, config.model.train, logger);
      break;
    case ModelKind::ann: {
      AnnConfig ac;
      ac.train = config.model.train;
      ac.hidden_width = config.model.ann_hidden_width;
      ac.depth = config.model.ann_depth;
      model = ann_train(rays, split, ac, logger);
      break;
    }
    case ModelKind::forest:
      model = forest_train(rays, split, config.model.forest);
      break;
  }
  save_checkpoint(model, config.resolve(config.train.checkpoint));
  io::write_file_atomic(config.resolve(config.train.log), log);
}

void cmd_predict(const RunConfig& config) {
  const auto ckpt_path = config.resolve(config.predict.checkpoint);
  const auto rays_path = config.resolve(config.predict.rays);
  const auto stations_path = config.resolve(config.predict.stations);
  require_input(ckpt_path);
  require_input(rays_path);
  if (config.predict.partition != "all") require_input(stations_path);
  prepare_output_dir(config);
  const AnyModel model = load_model(ckpt_path);
  const auto rays = load_csv(rays_path);
  std::vector<Station> catalog;
  if (config.predict.partition != "all") catalog = load_station_catalog(stations_path);
  const auto selected = select_partition(rays, catalog, config);
  const auto preds = predict_any(model, selected);
  std::vector<PredictionRow> rows;
  rows.reserve(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const auto& r = selected[i];
    rows.push_back({r.station_id, r.sat_id, r.year, r.doy, r.sod, preds[i].tecu, preds[i].extrapolated});
  }
  io::write_file_atomic(config.resolve(config.predict.output), format_predictions_csv(rows));
}

namespace {

std::vector<JoinedRow> load_joined(const RunConfig& config, const std::string& predictions, const std::string& truth) {
  const auto pred_path = config.resolve(predictions), truth_path = config.resolve(truth);
  require_input(pred_path);
  require_input(truth_path);
  const auto preds = parse_predictions_csv(io::read_file(pred_path), pred_path.string());
  const auto rays = load_csv(truth_path);
  return join_predictions(preds, rays);
}

}  // namespace

void cmd_evaluate(const RunConfig& config) {
  const auto joined = load_joined(config, config.evaluate.predictions, config.evaluate.truth);
  if (joined.empty()) throw ValidationError("no predictions to evaluate");
  prepare_output_dir(config);
  std::vector<std::string> ids;
  std::vector<double> pred, truth;
  for (const auto& j : joined) {
    ids.push_back(j.station_id);
    pred.push_back(j.predicted);
    truth.push_back(j.observed);
  }
  const EvalReport report = build_report(ids, pred, truth);
  io::write_file_atomic(config.resolve(config.evaluate.report_csv), report_csv(report));
  io::write_file_atomic(config.resolve(config.evaluate.report_json), report_json(report));
}

void cmd_plotdata(const RunConfig& config) {
  const PlotDataConfig& p = config.plotdata;
  const auto joined = load_joined(config, p.predictions, p.truth);
  prepare_output_dir(config);
  std::string content;
  if (p.kind == "timeseries") content = plot_timeseries_csv(joined);
  else if (p.kind == "scatter") content = plot_scatter_csv(joined);
  else if (p.kind == "residual-hist") content = plot_residual_hist_csv(joined, p.residual_bin_tecu);
  else throw ValidationError("unknown plot kind '" + p.kind + "'");
  const std::string output = p.output.empty() ? "plot_" + p.kind + ".csv" : p.output;
  io::write_file_atomic(config.resolve(output), content);
}

}  // namespace stec
