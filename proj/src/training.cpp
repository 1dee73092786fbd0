#include "stec/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "stec/error.hpp"
#include "stec/sobol.hpp"

namespace stec {
namespace {

enum SeedStream : std::uint64_t {
  kShuffleStream = 1,
  kSupportStream = 2,
  kBranchInitStream = 3,
  kTrunkInitStream = 4,
};

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ValidationError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ValidationError("adam_eps must be > 0");
  if (early_stop_patience < 1) throw ValidationError("early_stop_patience must be >= 1");
  if (!(aifw_lambda >= 0.0)) throw ValidationError("aifw_lambda must be >= 0");
  if (!(aifw_bin_width > 0.0)) throw ValidationError("aifw_bin_width must be > 0");
  if (!kernel_sigma_auto) kernel.validate();
  if (!(kernel_jitter >= 0.0)) throw ValidationError("kernel_jitter must be >= 0");
  if (n_kernel < 1) throw ValidationError("n_kernel must be >= 1");
  if (m_sensors < 1) throw ValidationError("m_sensors must be >= 1");
  if (branch.hidden_width < 1 || branch.depth < 0 || trunk.hidden_width < 1 || trunk.depth < 0) {
    throw ValidationError("network widths must be >= 1 and depths >= 0");
  }
  if (latent_width < 1) throw ValidationError("latent_width must be >= 1");
}

TrainConfig TrainConfig::desk() { return TrainConfig{}; }

TrainConfig TrainConfig::full() {
  TrainConfig c;
  c.branch = {64, 30};
  c.trunk = {64, 16};
  c.latent_width = 300;
  c.m_sensors = 300;
  return c;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double mean_squared_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) throw ValidationError("mean_squared_loss: bad lengths");
  const double inv = 1.0 / static_cast<double>(pred.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    acc += e * e * inv;
  }
  return acc;
}

FeatureTable build_feature_table(std::span<const RayRecord> records) {
  FeatureTable t;
  t.features.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(kFeatureDim));
  t.targets.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const FeatureVector f = featurize(records[i]);
    for (std::size_t j = 0; j < kFeatureDim; ++j) {
      t.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
    }
    t.targets.push_back(records[i].stec_tecu);
  }
  return t;
}

Bounds feature_bounds(const Eigen::MatrixXd& features) {
  if (features.rows() == 0) throw ValidationError("feature bounds of an empty table");
  Bounds b;
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    double lo = features.col(j).minCoeff();
    double hi = features.col(j).maxCoeff();
    if (!(hi > lo)) {
      lo -= 1e-9;
      hi += 1e-9;
    }
    b.emplace_back(lo, hi);
  }
  return b;
}

bool is_extrapolation(std::span<const double> feature, const Bounds& bounds) {
  for (std::size_t j = 0; j < feature.size() && j < bounds.size(); ++j) {
    const auto [lo, hi] = bounds[j];
    const double half = 0.5 * (hi - lo);
    if (feature[j] < lo - half || feature[j] > hi + half) return true;
  }
  return false;
}

TrainHistory run_epochs(std::size_t n_train, const TrainConfig& config, const EpochLoop& loop,
                        const EpochLogger& logger) {
  if (n_train == 0) throw ValidationError("training partition is empty");
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n_train);
  std::mt19937_64 rng(derive_seed(config.seed, kShuffleStream));
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainHistory history;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < n_train; start += batch) {
      const std::size_t len = std::min(batch, n_train - start);
      const double loss = loop.step(std::span<const std::size_t>(order).subspan(start, len));
      if (!std::isfinite(loss)) throw ComputeError("training diverged (non-finite loss) in epoch " + std::to_string(epoch + 1));
      loss_sum += loss;
      ++n_batches;
    }
    const double train_loss = loss_sum / static_cast<double>(n_batches);
    const double val_loss = loop.validate ? loop.validate() : train_loss;
    if (!std::isfinite(val_loss)) throw ComputeError("validation loss is non-finite in epoch " + std::to_string(epoch + 1));
    history.train_loss.push_back(train_loss);
    history.val_loss.push_back(val_loss);
    if (val_loss < best) {
      best = val_loss;
      history.best_epoch = epoch;
      since_best = 0;
      loop.snapshot();
    } else {
      ++since_best;
    }
    if (logger) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      logger(epoch + 1, train_loss, val_loss, secs);
    }
    if (since_best >= config.early_stop_patience) break;
  }
  loop.restore();
  return history;
}

Checkpoint train(std::span<const RayRecord> records, const SplitSpec& split, const TrainConfig& config,
                 const EpochLogger& logger) {
  const Partitions parts = partition(records, split);
  if (parts.train.empty()) throw ValidationError("training partition is empty");
  return train_partitions(parts.train, parts.validation, config, logger);
}

Checkpoint train_partitions(std::span<const RayRecord> train_set, std::span<const RayRecord> validation_set,
                            const TrainConfig& config, const EpochLogger& logger) {
  config.validate();
  if (train_set.empty()) throw ValidationError("training partition is empty");
  const FeatureTable train_tab = build_feature_table(train_set);
  const FeatureTable val_tab = build_feature_table(validation_set);
  const auto n = train_tab.targets.size();

  Checkpoint ckpt;
  ckpt.config = config;
  OperatorModel& model = ckpt.model;
  double max_abs = 0.0;
  for (double y : train_tab.targets) max_abs = std::max(max_abs, std::fabs(y));
  model.target_scale = max_abs > 0.0 ? max_abs : 1.0;
  model.feature_bounds = feature_bounds(train_tab.features);

  // Input function on a seeded uniform subset of the training samples.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t n_support = std::min<std::size_t>(static_cast<std::size_t>(config.n_kernel), n);
  {
    std::mt19937_64 rng(derive_seed(config.seed, kSupportStream));
    for (std::size_t i = 0; i < n_support; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(n_support);
    std::sort(idx.begin(), idx.end());
  }
  const Eigen::MatrixXd support = gather_rows(train_tab.features, idx);
  std::vector<double> support_y;
  for (std::size_t i : idx) support_y.push_back(train_tab.targets[i]);
  KernelSpec kspec = config.kernel;
  if (config.kernel_sigma_auto) {
    const DistanceNorm norm = kspec.kind == KernelKind::rbf ? DistanceNorm::l2 : kspec.matern_norm;
    const double med = median_pairwise_distance(support, norm);
    kspec.sigma = med > 0.0 ? med : 1.0;
  }
  ckpt.config.kernel = kspec;
  ckpt.input_function = fit_input_function(support, support_y, kspec, config.kernel_jitter);

  // Fixed sensor set over the training feature box.
  model.sensors = scale_to_domain(sobol_points(static_cast<int>(kFeatureDim), config.m_sensors, 1),
                                  model.feature_bounds);
  model.sensor_values = ckpt.input_function.eval(model.sensors).transpose();

  model.branch = Mlp(MlpConfig::stack(config.m_sensors, config.branch.hidden_width, config.branch.depth,
                                      config.latent_width, config.activation),
                     derive_seed(config.seed, kBranchInitStream));
  model.trunk = Mlp(MlpConfig::stack(static_cast<int>(kFeatureDim), config.trunk.hidden_width, config.trunk.depth,
                                     config.latent_width, config.activation),
                    derive_seed(config.seed, kTrunkInitStream));
  model.validate();

  const AifwWeights aifw = compute_aifw(train_tab.targets, config.aifw_bin_width, config.aifw_lambda);

  auto params = parameter_list(model);
  Adam adam({config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps}, params);
  OperatorModel best = model;

  // Without validation stations the full training set is scored instead.
  const FeatureTable& scored = validation_set.empty() ? train_tab : val_tab;
  std::vector<double> val_targets_n;
  for (double y : scored.targets) val_targets_n.push_back(y / model.target_scale);

  EpochLoop loop;
  std::vector<double> bt, bw;
  loop.step = [&](std::span<const std::size_t> batch) {
    const Eigen::MatrixXd x = gather_rows(train_tab.features, batch);
    bt.clear();
    bw.clear();
    for (std::size_t i : batch) {
      bt.push_back(train_tab.targets[i]);
      bw.push_back(aifw.weights[i]);
    }
    auto [loss, grads] = backward(model, x, bt, bw);
    adam.step(params, gradient_list(grads));
    return loss;
  };
  loop.validate = [&] {
    const Eigen::VectorXd pred = operator_forward(model, scored.features) / model.target_scale;
    return mean_squared_loss({pred.data(), static_cast<std::size_t>(pred.size())}, val_targets_n);
  };
  loop.snapshot = [&] { best = model; };
  loop.restore = [&] { model = best; };

  ckpt.history = run_epochs(n, config, loop, logger);
  return ckpt;
}

std::vector<Prediction> predict(const Checkpoint& ckpt, std::span<const RayRecord> rays) {
  ckpt.model.validate();
  const FeatureTable tab = build_feature_table(rays);
  std::vector<Prediction> out(rays.size());
  if (rays.empty()) return out;
  const OperatorPredictor predictor(ckpt.model);
  const Eigen::VectorXd y = predictor(tab.features);
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    std::array<double, kFeatureDim> f;
    for (std::size_t j = 0; j < kFeatureDim; ++j) f[j] = tab.features(ii, static_cast<Eigen::Index>(j));
    out[i] = {y(ii), is_extrapolation(f, ckpt.model.feature_bounds)};
  }
  return out;
}

}  // namespace stec
