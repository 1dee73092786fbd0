#include "stec/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "stec/error.hpp"

namespace stec {
namespace {

constexpr std::uint64_t kAnnInitStream = 11;
constexpr std::uint64_t kTreeStreamBase = 1000;

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

std::vector<Prediction> to_predictions(const Eigen::MatrixXd& features, const Eigen::VectorXd& values,
                                       const Bounds& bounds) {
  std::vector<Prediction> out(static_cast<std::size_t>(features.rows()));
  std::array<double, kFeatureDim> f{};
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (std::size_t j = 0; j < kFeatureDim; ++j) f[j] = features(i, static_cast<Eigen::Index>(j));
    out[static_cast<std::size_t>(i)] = {values(i), is_extrapolation(f, bounds)};
  }
  return out;
}

// Builds one tree over rows `sample` of a column-major feature matrix.
class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const double> y, const ForestParams& p, std::mt19937_64& rng)
      : x_(x), y_(y), p_(p), rng_(rng) {
    const int d = static_cast<int>(x.cols());
    n_features_ = p.max_features > 0 ? std::min(p.max_features, d)
                                     : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  }

  RegressionTree build(std::vector<std::size_t> sample) {
    sample_ = std::move(sample);
    RegressionTree tree;
    struct Task {
      int node;
      std::size_t begin, end;
      int depth;
    };
    tree.nodes.emplace_back();
    std::vector<Task> stack{{0, 0, sample_.size(), 0}};
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();
      double sum = 0.0;
      for (std::size_t i = t.begin; i < t.end; ++i) sum += y_[sample_[i]];
      const std::size_t n = t.end - t.begin;
      tree.nodes[static_cast<std::size_t>(t.node)].value = sum / static_cast<double>(n);
      if (t.depth >= p_.max_depth || n < static_cast<std::size_t>(std::max(2, p_.min_samples_split)) ||
          constant_targets(t.begin, t.end)) {
        continue;
      }
      const Split s = best_split(t.begin, t.end);
      if (s.feature < 0) continue;

      const auto mid_it = std::partition(sample_.begin() + static_cast<std::ptrdiff_t>(t.begin),
                                         sample_.begin() + static_cast<std::ptrdiff_t>(t.end),
                                         [&](std::size_t r) { return value(r, s.feature) <= s.threshold; });
      const auto mid = static_cast<std::size_t>(mid_it - sample_.begin());
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[static_cast<std::size_t>(t.node)];
      node.feature = s.feature;
      node.threshold = s.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, mid, t.end, t.depth + 1});
      stack.push_back({left, t.begin, mid, t.depth + 1});
    }
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = -std::numeric_limits<double>::infinity();
  };

  double value(std::size_t row, int f) const { return x_(static_cast<Eigen::Index>(row), f); }

  bool constant_targets(std::size_t begin, std::size_t end) const {
    const double y0 = y_[sample_[begin]];
    for (std::size_t i = begin + 1; i < end; ++i) {
      if (y_[sample_[i]] != y0) return false;
    }
    return true;
  }

  // Maximizes S_L^2/n_L + S_R^2/n_R, which minimizes the children's SSE.
  void scan_feature(int f, std::size_t begin, std::size_t end, Split& best) {
    pairs_.clear();
    for (std::size_t i = begin; i < end; ++i) pairs_.emplace_back(value(sample_[i], f), y_[sample_[i]]);
    std::sort(pairs_.begin(), pairs_.end());
    double total = 0.0;
    for (const auto& pr : pairs_) total += pr.second;
    const std::size_t n = pairs_.size();
    double left = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left += pairs_[i].second;
      if (pairs_[i].first == pairs_[i + 1].first) continue;
      const double nl = static_cast<double>(i + 1), nr = static_cast<double>(n - i - 1);
      const double right = total - left;
      const double score = left * left / nl + right * right / nr;
      if (score > best.score) {
        double thr = 0.5 * (pairs_[i].first + pairs_[i + 1].first);
        if (!(thr < pairs_[i + 1].first)) thr = pairs_[i].first;
        best = {f, thr, score};
      }
    }
  }

  Split best_split(std::size_t begin, std::size_t end) {
    const int d = static_cast<int>(x_.cols());
    std::vector<int> features(static_cast<std::size_t>(d));
    std::iota(features.begin(), features.end(), 0);
    for (int i = 0; i < d - 1; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(pick(rng_))]);
    }
    Split best;
    for (int i = 0; i < d; ++i) {
      // Past the sampled candidates, keep drawing only until a valid split exists.
      if (i >= n_features_ && best.feature >= 0) break;
      scan_feature(features[static_cast<std::size_t>(i)], begin, end, best);
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  std::span<const double> y_;
  const ForestParams& p_;
  std::mt19937_64& rng_;
  int n_features_ = 1;
  std::vector<std::size_t> sample_;
  std::vector<std::pair<double, double>> pairs_;
};

}  // namespace

void AnnConfig::validate() const {
  train.validate();
  if (hidden_width < 1 || depth < 0) throw ValidationError("ANN width must be >= 1 and depth >= 0");
}

AnnBaseline ann_train(std::span<const RayRecord> records, const SplitSpec& split, const AnnConfig& config,
                      const EpochLogger& logger) {
  const Partitions parts = partition(records, split);
  if (parts.train.empty()) throw ValidationError("training partition is empty");
  return ann_train_partitions(parts.train, parts.validation, config, logger);
}

AnnBaseline ann_train_partitions(std::span<const RayRecord> train_set, std::span<const RayRecord> validation_set,
                                 const AnnConfig& config, const EpochLogger& logger) {
  config.validate();
  if (train_set.empty()) throw ValidationError("training partition is empty");
  const FeatureTable tab = build_feature_table(train_set);
  const FeatureTable val = build_feature_table(validation_set);

  AnnBaseline model;
  model.config = config;
  double max_abs = 0.0;
  for (double y : tab.targets) max_abs = std::max(max_abs, std::fabs(y));
  model.target_scale = max_abs > 0.0 ? max_abs : 1.0;
  model.feature_bounds = feature_bounds(tab.features);
  model.mlp = Mlp(MlpConfig::stack(static_cast<int>(kFeatureDim), config.hidden_width, config.depth, 1,
                                   config.train.activation),
                  derive_seed(config.train.seed, kAnnInitStream));

  auto params = parameter_list(model.mlp);
  const TrainConfig& tc = config.train;
  Adam adam({tc.learning_rate, tc.adam_beta1, tc.adam_beta2, tc.adam_eps}, params);
  Mlp best = model.mlp;
  // Without validation stations the full training set is scored instead.
  const FeatureTable& scored = validation_set.empty() ? tab : val;
  std::vector<double> val_targets;
  for (double y : scored.targets) val_targets.push_back(y / model.target_scale);

  EpochLoop loop;
  loop.step = [&](std::span<const std::size_t> batch) {
    const Eigen::MatrixXd x = gather_rows(tab.features, batch);
    Mlp::Tape tape;
    const Eigen::MatrixXd out = model.mlp.forward(x, tape);
    const double inv = 1.0 / static_cast<double>(batch.size());
    Eigen::MatrixXd grad(out.rows(), 1);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double e = out(ii, 0) - tab.targets[batch[i]] / model.target_scale;
      loss += e * e * inv;
      grad(ii, 0) = 2.0 * e * inv;
    }
    MlpGradients g = model.mlp.zeros_like();
    model.mlp.backward(tape, grad, g);
    adam.step(params, gradient_list(g));
    return loss;
  };
  loop.validate = [&] {
    const Eigen::MatrixXd out = model.mlp.forward(scored.features);
    return mean_squared_loss({out.data(), static_cast<std::size_t>(out.rows())}, val_targets);
  };
  loop.snapshot = [&] { best = model.mlp; };
  loop.restore = [&] { model.mlp = best; };
  model.history = run_epochs(tab.targets.size(), tc, loop, logger);
  return model;
}

std::vector<Prediction> ann_predict(const AnnBaseline& model, std::span<const RayRecord> rays) {
  const FeatureTable tab = build_feature_table(rays);
  if (rays.empty()) return {};
  const Eigen::VectorXd y = model.mlp.forward(tab.features).col(0) * model.target_scale;
  return to_predictions(tab.features, y, model.feature_bounds);
}

void ForestParams::validate() const {
  if (n_trees < 1) throw ValidationError("n_trees must be >= 1");
  if (max_depth < 0) throw ValidationError("max_depth must be >= 0");
  if (max_features < 0) throw ValidationError("max_features must be >= 0");
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                                                       : nodes[i].right);
  }
  return nodes[i].value;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

double ForestBaseline::predict(std::span<const double> x) const {
  double acc = 0.0;
  for (const auto& t : trees) acc += t.predict(x);
  return acc / static_cast<double>(trees.size());
}

ForestBaseline forest_fit(const Eigen::MatrixXd& features, std::span<const double> targets,
                          const ForestParams& params) {
  params.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (n == 0) throw ValidationError("forest training set is empty");
  if (targets.size() != n) throw ValidationError("forest targets length mismatch");
  ForestBaseline forest;
  forest.params = params;
  forest.feature_bounds = feature_bounds(features);
  const std::size_t draw = params.max_samples > 0 ? std::min(params.max_samples, n) : n;
  for (int k = 0; k < params.n_trees; ++k) {
    std::mt19937_64 rng(derive_seed(params.seed, kTreeStreamBase + static_cast<std::uint64_t>(k)));
    std::vector<std::size_t> sample;
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      sample.resize(draw);
      for (auto& s : sample) s = pick(rng);
    } else {
      sample.resize(n);
      std::iota(sample.begin(), sample.end(), std::size_t{0});
    }
    TreeBuilder builder(features, targets, params, rng);
    forest.trees.push_back(builder.build(std::move(sample)));
  }
  return forest;
}

ForestBaseline forest_train(std::span<const RayRecord> records, const SplitSpec& split, const ForestParams& params) {
  const Partitions parts = partition(records, split);
  return forest_train_partitions(parts.train, params);
}

ForestBaseline forest_train_partitions(std::span<const RayRecord> train_set, const ForestParams& params) {
  if (train_set.empty()) throw ValidationError("forest training set is empty");
  const FeatureTable tab = build_feature_table(train_set);
  return forest_fit(tab.features, tab.targets, params);
}

std::vector<Prediction> forest_predict(const ForestBaseline& model, std::span<const RayRecord> rays) {
  const FeatureTable tab = build_feature_table(rays);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rays.size()));
  std::array<double, kFeatureDim> f{};
  for (Eigen::Index i = 0; i < tab.features.rows(); ++i) {
    for (std::size_t j = 0; j < kFeatureDim; ++j) f[j] = tab.features(i, static_cast<Eigen::Index>(j));
    y(i) = model.predict(f);
  }
  return to_predictions(tab.features, y, model.feature_bounds);
}

}  // namespace stec
