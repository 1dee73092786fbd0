#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stec/mlp.hpp"

namespace stec {

using Bounds = std::vector<std::pair<double, double>>;

/// Branch/trunk operator network. The branch sees the input function at the
/// fixed sensor set (divided by target_scale); the trunk sees one feature
/// row per query. Prediction is target_scale * <branch, trunk>, with no bias.
struct OperatorModel {
  Mlp branch;
  Mlp trunk;
  Eigen::MatrixXd sensors;           // m x feature_dim, the fixed sensor set
  Eigen::RowVectorXd sensor_values;  // u at the sensors, TECU
  double target_scale = 1.0;
  Bounds feature_bounds;             // training-data bounding box per feature

  void validate() const;
  int latent_width() const { return trunk.output_width(); }
  Eigen::RowVectorXd branch_input() const { return sensor_values / target_scale; }
};

struct OperatorGradients {
  MlpGradients branch;
  MlpGradients trunk;
};

// Branch output for the model's fixed sensor values (1 x p).
Eigen::RowVectorXd branch_coefficients(const OperatorModel& model);

// Predictions in TECU for each feature row.
Eigen::VectorXd operator_forward(const OperatorModel& model, const Eigen::MatrixXd& features);
Eigen::VectorXd operator_forward(const OperatorModel& model, const Eigen::RowVectorXd& beta,
                                 const Eigen::MatrixXd& features);

/// Holds the branch output so repeated queries only run the trunk.
class OperatorPredictor {
 public:
  explicit OperatorPredictor(const OperatorModel& model);
  Eigen::VectorXd operator()(const Eigen::MatrixXd& features) const;

 private:
  const OperatorModel* model_;
  Eigen::RowVectorXd beta_;
};

// sum_i (pred_i - target_i)^2 w_i / sum_j w_j
double weighted_loss(std::span<const double> pred, std::span<const double> target,
                     std::span<const double> weights);

// Loss on the normalized scale: predictions and targets divided by
// target_scale. Targets are in TECU.
double operator_loss(const OperatorModel& model, const Eigen::MatrixXd& features,
                     std::span<const double> targets_tecu, std::span<const double> weights);

std::pair<double, OperatorGradients> backward(const OperatorModel& model, const Eigen::MatrixXd& features,
                                              std::span<const double> targets_tecu,
                                              std::span<const double> weights);

// Branch parameters first, then trunk, each as [W0, b0, W1, b1, ...].
std::vector<Eigen::MatrixXd*> parameter_list(OperatorModel& model);
std::vector<const Eigen::MatrixXd*> gradient_list(const OperatorGradients& g);

}  // namespace stec
