#include "stec/checkpoint.hpp"

#include <set>

#include "stec/error.hpp"
#include "stec/io.hpp"

namespace stec {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ValidationError("matrix payload size does not match its shape");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[k++].get<double>();
  }
  return m;
}

json mlp_to_json(const Mlp& mlp) {
  json layers = json::array();
  for (const auto& l : mlp.layers()) layers.push_back({{"weight", matrix_to_json(l.weight)}, {"bias", matrix_to_json(l.bias)}});
  return {{"widths", mlp.config().layer_widths},
          {"activation", to_string(mlp.config().activation)},
          {"layers", std::move(layers)}};
}

Mlp mlp_from_json(const json& j) {
  MlpConfig c;
  c.layer_widths = j.at("widths").get<std::vector<int>>();
  c.activation = parse_activation(j.at("activation").get<std::string>());
  std::vector<DenseLayer> layers;
  for (const auto& l : j.at("layers")) layers.push_back({matrix_from_json(l.at("weight")), matrix_from_json(l.at("bias"))});
  return Mlp(std::move(c), std::move(layers));
}

json bounds_to_json(const Bounds& b) {
  json out = json::array();
  for (const auto& [lo, hi] : b) out.push_back({lo, hi});
  return out;
}

Bounds bounds_from_json(const json& j) {
  Bounds b;
  for (const auto& p : j) b.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return b;
}

json history_to_json(const TrainHistory& h) {
  return {{"train_loss", h.train_loss}, {"val_loss", h.val_loss}, {"best_epoch", h.best_epoch}};
}

TrainHistory history_from_json(const json& j) {
  TrainHistory h;
  h.train_loss = j.at("train_loss").get<std::vector<double>>();
  h.val_loss = j.at("val_loss").get<std::vector<double>>();
  h.best_epoch = j.at("best_epoch").get<int>();
  return h;
}

json kernel_to_json(const KernelSpec& k) {
  return {{"kind", to_string(k.kind)}, {"sigma", k.sigma}, {"matern_norm", to_string(k.matern_norm)}};
}

KernelSpec kernel_from_json(const json& j, KernelSpec base = {}) {
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") base.kind = parse_kernel_kind(value.get<std::string>());
    else if (key == "sigma") base.sigma = value.get<double>();
    else if (key == "matern_norm") base.matern_norm = parse_distance_norm(value.get<std::string>());
    else throw ValidationError("unknown kernel key '" + key + "'");
  }
  return base;
}

json deeponet_to_json(const Checkpoint& c) {
  const auto& m = c.model;
  return {{"branch", mlp_to_json(m.branch)},
          {"trunk", mlp_to_json(m.trunk)},
          {"sensors", matrix_to_json(m.sensors)},
          {"sensor_values", matrix_to_json(Eigen::MatrixXd(m.sensor_values))},
          {"target_scale", m.target_scale},
          {"feature_bounds", bounds_to_json(m.feature_bounds)},
          {"input_function",
           {{"kernel", kernel_to_json(c.input_function.kernel())},
            {"jitter", c.input_function.jitter()},
            {"support", matrix_to_json(c.input_function.support())},
            {"alpha", matrix_to_json(Eigen::MatrixXd(c.input_function.alpha()))}}},
          {"config", train_config_to_json(c.config)},
          {"history", history_to_json(c.history)}};
}

Checkpoint deeponet_from_json(const json& j) {
  Checkpoint c;
  c.model.branch = mlp_from_json(j.at("branch"));
  c.model.trunk = mlp_from_json(j.at("trunk"));
  c.model.sensors = matrix_from_json(j.at("sensors"));
  const Eigen::MatrixXd sv = matrix_from_json(j.at("sensor_values"));
  if (sv.rows() != 1) throw ValidationError("sensor_values must be a row vector");
  c.model.sensor_values = sv.row(0);
  c.model.target_scale = j.at("target_scale").get<double>();
  c.model.feature_bounds = bounds_from_json(j.at("feature_bounds"));
  const json& u = j.at("input_function");
  const Eigen::MatrixXd alpha = matrix_from_json(u.at("alpha"));
  if (alpha.cols() != 1) throw ValidationError("alpha must be a column vector");
  c.input_function = InputFunction(kernel_from_json(u.at("kernel")), matrix_from_json(u.at("support")),
                                   alpha.col(0), u.at("jitter").get<double>());
  c.config = train_config_from_json(j.at("config"));
  c.history = history_from_json(j.at("history"));
  c.model.validate();
  return c;
}

json ann_to_json(const AnnBaseline& a) {
  return {{"mlp", mlp_to_json(a.mlp)},
          {"target_scale", a.target_scale},
          {"feature_bounds", bounds_to_json(a.feature_bounds)},
          {"hidden_width", a.config.hidden_width},
          {"depth", a.config.depth},
          {"config", train_config_to_json(a.config.train)},
          {"history", history_to_json(a.history)}};
}

AnnBaseline ann_from_json(const json& j) {
  AnnBaseline a;
  a.mlp = mlp_from_json(j.at("mlp"));
  a.target_scale = j.at("target_scale").get<double>();
  a.feature_bounds = bounds_from_json(j.at("feature_bounds"));
  a.config.hidden_width = j.at("hidden_width").get<int>();
  a.config.depth = j.at("depth").get<int>();
  a.config.train = train_config_from_json(j.at("config"));
  a.history = history_from_json(j.at("history"));
  return a;
}

json forest_to_json(const ForestBaseline& f) {
  json trees = json::array();
  for (const auto& t : f.trees) {
    json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
         value = json::array();
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}});
  }
  const auto& p = f.params;
  return {{"params",
           {{"n_trees", p.n_trees},
            {"max_depth", p.max_depth},
            {"seed", p.seed},
            {"bootstrap", p.bootstrap},
            {"min_samples_split", p.min_samples_split},
            {"max_features", p.max_features},
            {"max_samples", p.max_samples}}},
          {"feature_bounds", bounds_to_json(f.feature_bounds)},
          {"trees", std::move(trees)}};
}

ForestBaseline forest_from_json(const json& j) {
  ForestBaseline f;
  const json& p = j.at("params");
  f.params.n_trees = p.at("n_trees").get<int>();
  f.params.max_depth = p.at("max_depth").get<int>();
  f.params.seed = p.at("seed").get<std::uint64_t>();
  f.params.bootstrap = p.at("bootstrap").get<bool>();
  f.params.min_samples_split = p.at("min_samples_split").get<int>();
  f.params.max_features = p.at("max_features").get<int>();
  f.params.max_samples = p.at("max_samples").get<std::size_t>();
  f.feature_bounds = bounds_from_json(j.at("feature_bounds"));
  for (const auto& t : j.at("trees")) {
    const auto feature = t.at("feature").get<std::vector<int>>();
    const auto threshold = t.at("threshold").get<std::vector<double>>();
    const auto left = t.at("left").get<std::vector<int>>();
    const auto right = t.at("right").get<std::vector<int>>();
    const auto value = t.at("value").get<std::vector<double>>();
    const std::size_t n = feature.size();
    if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n || n == 0) {
      throw ValidationError("inconsistent tree arrays");
    }
    RegressionTree tree;
    for (std::size_t i = 0; i < n; ++i) {
      if (feature[i] >= static_cast<int>(kFeatureDim) || feature[i] < -1) {
        throw ValidationError("tree feature index out of range");
      }
      if (feature[i] >= 0 && (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) ||
                              left[i] >= static_cast<int>(n) || right[i] >= static_cast<int>(n))) {
        throw ValidationError("tree child index out of range");
      }
      tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i]});
    }
    f.trees.push_back(std::move(tree));
  }
  if (f.trees.empty()) throw ValidationError("forest has no trees");
  return f;
}

}  // namespace

json train_config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"seed", c.seed},
          {"early_stop_patience", c.early_stop_patience},
          {"aifw_lambda", c.aifw_lambda},
          {"aifw_bin_width", c.aifw_bin_width},
          {"kernel", kernel_to_json(c.kernel)},
          {"kernel_sigma_auto", c.kernel_sigma_auto},
          {"kernel_jitter", c.kernel_jitter},
          {"n_kernel", c.n_kernel},
          {"m_sensors", c.m_sensors},
          {"branch", {{"hidden_width", c.branch.hidden_width}, {"depth", c.branch.depth}}},
          {"trunk", {{"hidden_width", c.trunk.hidden_width}, {"depth", c.trunk.depth}}},
          {"latent_width", c.latent_width},
          {"activation", to_string(c.activation)}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw ValidationError("training config must be an object");
  auto shape = [](const json& s, NetworkShape base) {
    for (const auto& [key, value] : s.items()) {
      if (key == "hidden_width") base.hidden_width = value.get<int>();
      else if (key == "depth") base.depth = value.get<int>();
      else throw ValidationError("unknown network key '" + key + "'");
    }
    return base;
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "epochs") c.epochs = v.get<int>();
    else if (key == "batch_size") c.batch_size = v.get<int>();
    else if (key == "learning_rate") c.learning_rate = v.get<double>();
    else if (key == "adam_beta1") c.adam_beta1 = v.get<double>();
    else if (key == "adam_beta2") c.adam_beta2 = v.get<double>();
    else if (key == "adam_eps") c.adam_eps = v.get<double>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "early_stop_patience") c.early_stop_patience = v.get<int>();
    else if (key == "aifw_lambda") c.aifw_lambda = v.get<double>();
    else if (key == "aifw_bin_width") c.aifw_bin_width = v.get<double>();
    else if (key == "kernel") c.kernel = kernel_from_json(v, c.kernel);
    else if (key == "kernel_sigma_auto") c.kernel_sigma_auto = v.get<bool>();
    else if (key == "kernel_jitter") c.kernel_jitter = v.get<double>();
    else if (key == "n_kernel") c.n_kernel = v.get<int>();
    else if (key == "m_sensors") c.m_sensors = v.get<int>();
    else if (key == "branch") c.branch = shape(v, c.branch);
    else if (key == "trunk") c.trunk = shape(v, c.trunk);
    else if (key == "latent_width") c.latent_width = v.get<int>();
    else if (key == "activation") c.activation = parse_activation(v.get<std::string>());
    else throw ValidationError("unknown training key '" + key + "'");
  }
  return c;
}

std::string model_kind(const AnyModel& model) {
  switch (model.index()) {
    case 0: return "deeponet";
    case 1: return "ann";
    default: return "forest";
  }
}

std::string serialize_model(const AnyModel& model) {
  json payload = std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Checkpoint>) return deeponet_to_json(m);
        else if constexpr (std::is_same_v<T, AnnBaseline>) return ann_to_json(m);
        else return forest_to_json(m);
      },
      model);
  json env = {{"format", kCheckpointFormat},
              {"version", kCheckpointVersion},
              {"kind", model_kind(model)},
              {"model", std::move(payload)}};
  return env.dump() + "\n";
}

AnyModel deserialize_model(const std::string& text, const std::string& source) {
  json env;
  try {
    env = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(source + ": corrupted checkpoint (" + e.what() + ")");
  }
  try {
    if (!env.is_object() || env.value("format", "") != kCheckpointFormat) {
      throw ValidationError(source + ": not a checkpoint file");
    }
    const int version = env.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ValidationError(source + ": checkpoint version " + std::to_string(version) + " is not supported (expected " +
                            std::to_string(kCheckpointVersion) + ")");
    }
    const std::string kind = env.at("kind").get<std::string>();
    const json& m = env.at("model");
    if (kind == "deeponet") return deeponet_from_json(m);
    if (kind == "ann") return ann_from_json(m);
    if (kind == "forest") return forest_from_json(m);
    throw ValidationError(source + ": unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ValidationError(source + ": corrupted checkpoint (" + e.what() + ")");
  }
}

void save_checkpoint(const AnyModel& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize_model(model));
}

AnyModel load_model(const std::filesystem::path& path) {
  return deserialize_model(io::read_file(path), path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  AnyModel m = load_model(path);
  if (auto* c = std::get_if<Checkpoint>(&m)) return std::move(*c);
  throw ValidationError(path.string() + ": checkpoint holds a '" + model_kind(m) + "' baseline, not an operator model");
}

std::vector<Prediction> predict_any(const AnyModel& model, std::span<const RayRecord> rays) {
  return std::visit(
      [&](const auto& m) -> std::vector<Prediction> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Checkpoint>) return predict(m, rays);
        else if constexpr (std::is_same_v<T, AnnBaseline>) return ann_predict(m, rays);
        else return forest_predict(m, rays);
      },
      model);
}

}  // namespace stec
