#include "stec/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stec/error.hpp"

namespace stec {

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ValidationError("unknown activation '" + s + "'");
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

void MlpConfig::validate() const {
  if (layer_widths.size() < 2) throw ValidationError("an MLP needs at least an input and an output width");
  for (int w : layer_widths) {
    if (w < 1) throw ValidationError("MLP layer widths must be >= 1");
  }
}

MlpConfig MlpConfig::stack(int in, int hidden_width, int depth, int out, Activation act) {
  MlpConfig c;
  c.layer_widths.push_back(in);
  for (int i = 0; i < depth; ++i) c.layer_widths.push_back(hidden_width);
  c.layer_widths.push_back(out);
  c.activation = act;
  return c;
}

Mlp::Mlp(MlpConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double gain = config_.activation == Activation::relu ? 2.0 : 1.0;
  for (std::size_t l = 0; l + 1 < config_.layer_widths.size(); ++l) {
    const int fan_in = config_.layer_widths[l];
    const int fan_out = config_.layer_widths[l + 1];
    const double sd = std::sqrt(gain / fan_in);
    DenseLayer layer{Eigen::MatrixXd(fan_in, fan_out), Eigen::MatrixXd::Zero(1, fan_out)};
    for (int j = 0; j < fan_out; ++j) {
      for (int i = 0; i < fan_in; ++i) layer.weight(i, j) = sd * normal(rng);
    }
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(MlpConfig config, std::vector<DenseLayer> layers) : config_(std::move(config)), layers_(std::move(layers)) {
  config_.validate();
  if (layers_.size() + 1 != config_.layer_widths.size()) throw ValidationError("layer count does not match widths");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].weight.rows() != config_.layer_widths[l] ||
        layers_[l].weight.cols() != config_.layer_widths[l + 1] || layers_[l].bias.rows() != 1 ||
        layers_[l].bias.cols() != config_.layer_widths[l + 1]) {
      throw ValidationError("layer " + std::to_string(l) + " shape does not match widths");
    }
  }
}

void Mlp::check_input(const Eigen::MatrixXd& input) const {
  if (input.cols() != input_width()) {
    throw ValidationError("MLP input width mismatch: got " + std::to_string(input.cols()) + ", expected " +
                          std::to_string(input_width()));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  check_input(input);
  // Each output element is accumulated over the fan-in in a fixed order, so a
  // row's result does not depend on the batch it is evaluated in.
  constexpr Eigen::Index kChunk = 512;
  Eigen::MatrixXd out(input.rows(), output_width());
  for (Eigen::Index r0 = 0; r0 < input.rows(); r0 += kChunk) {
    const Eigen::Index len = std::min(kChunk, input.rows() - r0);
    Eigen::MatrixXd h = input.middleRows(r0, len);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const DenseLayer& layer = layers_[l];
      Eigen::MatrixXd z(len, layer.weight.cols());
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        auto zj = z.col(j);
        zj.setConstant(layer.bias(0, j));
        for (Eigen::Index k = 0; k < layer.weight.rows(); ++k) zj += layer.weight(k, j) * h.col(k);
      }
      if (l + 1 < layers_.size()) {
        if (config_.activation == Activation::relu) z = z.cwiseMax(0.0);
        else z = z.array().tanh().matrix();
      }
      h = std::move(z);
    }
    out.middleRows(r0, len) = h;
  }
  return out;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Tape& tape) const {
  check_input(input);
  tape.inputs.clear();
  tape.pre.clear();
  Eigen::MatrixXd h = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = h * layers_[l].weight;
    z.rowwise() += layers_[l].bias.row(0);
    if (!z.allFinite()) throw ComputeError("non-finite activation in layer " + std::to_string(l));
    tape.inputs.push_back(std::move(h));
    if (l + 1 < layers_.size()) {
      h = config_.activation == Activation::relu ? Eigen::MatrixXd(z.cwiseMax(0.0))
                                                 : Eigen::MatrixXd(z.array().tanh().matrix());
    } else {
      h = z;
    }
    tape.pre.push_back(std::move(z));
  }
  return h;
}

void Mlp::backward(const Tape& tape, const Eigen::MatrixXd& grad_out, MlpGradients& grads) const {
  Eigen::MatrixXd delta = grad_out;  // dL/dz of the current layer
  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (l + 1 < layers_.size()) {
      const Eigen::MatrixXd& z = tape.pre[l];
      if (config_.activation == Activation::relu) {
        delta = (z.array() > 0.0).select(delta, 0.0);
      } else {
        delta = (delta.array() * (1.0 - z.array().tanh().square())).matrix();
      }
    }
    if (!delta.allFinite()) throw ComputeError("non-finite gradient in layer " + std::to_string(l));
    grads.layers[l].weight.noalias() += tape.inputs[l].transpose() * delta;
    grads.layers[l].bias += delta.colwise().sum();
    if (l > 0) delta = delta * layers_[l].weight.transpose();
  }
}

MlpGradients Mlp::zeros_like() const {
  MlpGradients g;
  for (const auto& layer : layers_) {
    g.layers.push_back({Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                        Eigen::MatrixXd::Zero(1, layer.bias.cols())});
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

std::vector<Eigen::MatrixXd*> parameter_list(Mlp& mlp) {
  std::vector<Eigen::MatrixXd*> out;
  for (auto& layer : mlp.layers()) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<const Eigen::MatrixXd*> gradient_list(const MlpGradients& g) {
  std::vector<const Eigen::MatrixXd*> out;
  for (const auto& layer : g.layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

Adam::Adam(Options options, const std::vector<Eigen::MatrixXd*>& params) : opt_(options) {
  for (const auto* p : params) {
    m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
  }
}

void Adam::step(const std::vector<Eigen::MatrixXd*>& params, const std::vector<const Eigen::MatrixXd*>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ValidationError("Adam parameter list changed shape");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  const double step = opt_.learning_rate * std::sqrt(bc2) / bc1;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * (*grads[i]);
    v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * grads[i]->cwiseProduct(*grads[i]);
    params[i]->array() -= step * m_[i].array() / (v_[i].array().sqrt() + opt_.eps * std::sqrt(bc2));
  }
}

}  // namespace stec
