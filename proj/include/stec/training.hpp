#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stec/dataset.hpp"
#include "stec/deeponet.hpp"
#include "stec/kernel.hpp"

namespace stec {

struct NetworkShape {
  int hidden_width = 64;
  int depth = 4;  // hidden layers
};

struct TrainConfig {
  int epochs = 40;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 42;
  int early_stop_patience = 8;
  double aifw_lambda = kDefaultAifwLambda;
  double aifw_bin_width = 1.0;
  KernelSpec kernel{KernelKind::matern32, 1.0, DistanceNorm::l2};
  bool kernel_sigma_auto = true;  // median pairwise distance of the support
  double kernel_jitter = 1e-8;    // relative to the mean Gram diagonal
  int n_kernel = 512;
  int m_sensors = 300;
  NetworkShape branch{64, 4};
  NetworkShape trunk{64, 4};
  int latent_width = 64;
  Activation activation = Activation::relu;

  void validate() const;
  // Branch [m, 64 x 4, 64], trunk [10, 64 x 4, 64].
  static TrainConfig desk();
  // Branch [300, 64 x 30, 300], trunk [10, 64 x 16, 300].
  static TrainConfig full();
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = -1;  // 0-based
};

struct Checkpoint {
  OperatorModel model;
  InputFunction input_function;
  TrainConfig config;
  TrainHistory history;
};

struct Prediction {
  double tecu = 0.0;
  bool extrapolated = false;
};

/// Dense training matrices for one partition.
struct FeatureTable {
  Eigen::MatrixXd features;  // n x kFeatureDim
  std::vector<double> targets;
};

FeatureTable build_feature_table(std::span<const RayRecord> records);

// Per-feature (min, max); degenerate columns are widened by 1e-9 each way.
Bounds feature_bounds(const Eigen::MatrixXd& features);

// Outside the box centred on the training box with twice its width.
bool is_extrapolation(std::span<const double> feature, const Bounds& bounds);

using EpochLogger = std::function<void(int epoch, double train_loss, double val_loss, double seconds)>;

/// Mini-batch Adam with best-validation retention and early stopping. The
/// closure receives shuffled batch indices and returns the batch loss after
/// applying one optimizer step; `validate` scores the current parameters;
/// `snapshot`/`restore` save and reinstate the best parameters.
struct EpochLoop {
  std::function<double(std::span<const std::size_t>)> step;
  std::function<double()> validate;
  std::function<void()> snapshot;
  std::function<void()> restore;
};

TrainHistory run_epochs(std::size_t n_train, const TrainConfig& config, const EpochLoop& loop,
                        const EpochLogger& logger = {});

// u fitted on n_kernel training samples, m Sobol sensors over the training
// feature box, then Adam on the AIFW-weighted loss.
Checkpoint train(std::span<const RayRecord> records, const SplitSpec& split, const TrainConfig& config,
                 const EpochLogger& logger = {});

// Same pipeline on already-partitioned data (validation may be empty, in
// which case early stopping scores the full training set).
Checkpoint train_partitions(std::span<const RayRecord> train_set, std::span<const RayRecord> validation_set,
                            const TrainConfig& config, const EpochLogger& logger = {});

std::vector<Prediction> predict(const Checkpoint& ckpt, std::span<const RayRecord> rays);

// Deterministic 64-bit seed derivation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Plain mean squared error, summed as sum e_i^2 (1/n) in index order.
double mean_squared_loss(std::span<const double> pred, std::span<const double> target);

}  // namespace stec
