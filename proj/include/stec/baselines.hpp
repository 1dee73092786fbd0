#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stec/dataset.hpp"
#include "stec/mlp.hpp"
#include "stec/training.hpp"

namespace stec {

// Direct-regression MLP over the same features as the operator trunk.
struct AnnConfig {
  TrainConfig train;  // optimizer, batching, seed, early stopping
  int hidden_width = 64;
  int depth = 8;      // hidden layers; the full preset uses 46

  void validate() const;
};

struct AnnBaseline {
  Mlp mlp;
  double target_scale = 1.0;
  Bounds feature_bounds;
  AnnConfig config;
  TrainHistory history;
};

AnnBaseline ann_train(std::span<const RayRecord> records, const SplitSpec& split, const AnnConfig& config,
                      const EpochLogger& logger = {});
AnnBaseline ann_train_partitions(std::span<const RayRecord> train_set, std::span<const RayRecord> validation_set,
                                 const AnnConfig& config, const EpochLogger& logger = {});
std::vector<Prediction> ann_predict(const AnnBaseline& model, std::span<const RayRecord> rays);

struct ForestParams {
  int n_trees = 100;
  int max_depth = 46;
  std::uint64_t seed = 42;
  bool bootstrap = true;
  int min_samples_split = 2;
  int max_features = 0;      // 0: floor(sqrt(d))
  std::size_t max_samples = 0;  // per-tree bootstrap size, 0: n

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // mean target of the node's samples
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(std::span<const double> x) const;
  int depth() const;
};

struct ForestBaseline {
  ForestParams params;
  std::vector<RegressionTree> trees;
  Bounds feature_bounds;

  double predict(std::span<const double> x) const;
};

// Each tree: seeded bootstrap resample, sqrt(d) candidate features per split,
// split minimizing the children's summed squared error. Tree k's seed depends
// only on (params.seed, k).
ForestBaseline forest_fit(const Eigen::MatrixXd& features, std::span<const double> targets,
                          const ForestParams& params);
ForestBaseline forest_train(std::span<const RayRecord> records, const SplitSpec& split, const ForestParams& params);
ForestBaseline forest_train_partitions(std::span<const RayRecord> train_set, const ForestParams& params);
std::vector<Prediction> forest_predict(const ForestBaseline& model, std::span<const RayRecord> rays);

}  // namespace stec
