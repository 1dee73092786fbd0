#include "stec/deeponet.hpp"

#include <cmath>
#include <string>

#include "stec/error.hpp"

namespace stec {
namespace {

void check_weights(std::size_t n, std::span<const double> targets, std::span<const double> weights) {
  if (targets.size() != n || weights.size() != n) {
    throw ValidationError("batch, target and weight lengths differ");
  }
}

}  // namespace

void OperatorModel::validate() const {
  if (branch.output_width() != trunk.output_width()) {
    throw ValidationError("branch and trunk output widths differ");
  }
  if (sensor_values.size() != branch.input_width()) {
    throw ValidationError("sensor value count must equal branch input width");
  }
  if (sensors.rows() != sensor_values.size()) throw ValidationError("sensor set size mismatch");
  if (!(target_scale > 0.0) || !std::isfinite(target_scale)) throw ValidationError("target_scale must be > 0");
}

Eigen::RowVectorXd branch_coefficients(const OperatorModel& model) {
  return model.branch.forward(Eigen::MatrixXd(model.branch_input())).row(0);
}

Eigen::VectorXd operator_forward(const OperatorModel& model, const Eigen::RowVectorXd& beta,
                                 const Eigen::MatrixXd& features) {
  const Eigen::MatrixXd tau = model.trunk.forward(features);
  return (tau * beta.transpose()) * model.target_scale;
}

Eigen::VectorXd operator_forward(const OperatorModel& model, const Eigen::MatrixXd& features) {
  return operator_forward(model, branch_coefficients(model), features);
}

OperatorPredictor::OperatorPredictor(const OperatorModel& model)
    : model_(&model), beta_(branch_coefficients(model)) {}

Eigen::VectorXd OperatorPredictor::operator()(const Eigen::MatrixXd& features) const {
  return operator_forward(*model_, beta_, features);
}

double weighted_loss(std::span<const double> pred, std::span<const double> target,
                     std::span<const double> weights) {
  if (pred.size() != target.size() || pred.size() != weights.size()) {
    throw ValidationError("weighted_loss: length mismatch");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("weighted_loss: weights must be non-negative");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw ValidationError("weighted_loss: weights sum to zero");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    acc += e * e * (weights[i] / wsum);
  }
  return acc;
}

double operator_loss(const OperatorModel& model, const Eigen::MatrixXd& features,
                     std::span<const double> targets_tecu, std::span<const double> weights) {
  check_weights(static_cast<std::size_t>(features.rows()), targets_tecu, weights);
  const Eigen::VectorXd pred = operator_forward(model, features) / model.target_scale;
  std::vector<double> t(targets_tecu.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = targets_tecu[i] / model.target_scale;
  return weighted_loss({pred.data(), static_cast<std::size_t>(pred.size())}, t, weights);
}

std::pair<double, OperatorGradients> backward(const OperatorModel& model, const Eigen::MatrixXd& features,
                                              std::span<const double> targets_tecu,
                                              std::span<const double> weights) {
  const auto n = static_cast<std::size_t>(features.rows());
  check_weights(n, targets_tecu, weights);

  Mlp::Tape branch_tape, trunk_tape;
  const Eigen::MatrixXd beta = model.branch.forward(Eigen::MatrixXd(model.branch_input()), branch_tape);
  const Eigen::MatrixXd tau = model.trunk.forward(features, trunk_tape);
  const Eigen::VectorXd pred = tau * beta.transpose();

  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (!(wsum > 0.0)) throw ValidationError("backward: weights sum to zero");

  Eigen::VectorXd dpred(static_cast<Eigen::Index>(n));
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double e = pred(ii) - targets_tecu[i] / model.target_scale;
    const double w = weights[i] / wsum;
    loss += e * e * w;
    dpred(ii) = 2.0 * e * w;
  }
  if (!std::isfinite(loss)) throw ComputeError("non-finite loss");

  OperatorGradients g{model.branch.zeros_like(), model.trunk.zeros_like()};
  // pred_i = tau_i . beta: the branch output is shared by every item.
  const Eigen::MatrixXd dtau = dpred * beta;                      // n x p
  const Eigen::MatrixXd dbeta = dpred.transpose() * tau;          // 1 x p
  model.trunk.backward(trunk_tape, dtau, g.trunk);
  model.branch.backward(branch_tape, dbeta, g.branch);
  return {loss, std::move(g)};
}

std::vector<Eigen::MatrixXd*> parameter_list(OperatorModel& model) {
  auto out = parameter_list(model.branch);
  const auto trunk = parameter_list(model.trunk);
  out.insert(out.end(), trunk.begin(), trunk.end());
  return out;
}

std::vector<const Eigen::MatrixXd*> gradient_list(const OperatorGradients& g) {
  auto out = gradient_list(g.branch);
  const auto trunk = gradient_list(g.trunk);
  out.insert(out.end(), trunk.begin(), trunk.end());
  return out;
}

}  // namespace stec
