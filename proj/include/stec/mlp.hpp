#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stec {

enum class Activation { relu, tanh };

Activation parse_activation(const std::string& s);
std::string to_string(Activation a);

struct MlpConfig {
  std::vector<int> layer_widths;  // input, hidden..., output
  Activation activation = Activation::relu;

  void validate() const;
  // {in, hidden x depth, out}
  static MlpConfig stack(int in, int hidden_width, int depth, int out, Activation act);
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // fan_in x fan_out
  Eigen::MatrixXd bias;    // 1 x fan_out
};

struct MlpGradients {
  std::vector<DenseLayer> layers;
};

/// Fully connected network; rows of every input matrix are batch items.
/// Hidden layers apply the activation, the last layer is affine only.
class Mlp {
 public:
  Mlp() = default;
  // He-style fan-in initialization: N(0, gain / fan_in) with gain 2 for
  // relu and 1 for tanh; biases start at zero.
  Mlp(MlpConfig config, std::uint64_t seed);
  Mlp(MlpConfig config, std::vector<DenseLayer> layers);

  struct Tape {
    std::vector<Eigen::MatrixXd> inputs;  // input to each layer
    std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  // Also records what backward needs. Throws ComputeError naming the layer
  // if any activation is non-finite.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Tape& tape) const;
  // Accumulates parameter gradients for dL/d(output) = grad_out into `grads`
  // (which must be zeros_like(*this) or already congruent).
  void backward(const Tape& tape, const Eigen::MatrixXd& grad_out, MlpGradients& grads) const;

  MlpGradients zeros_like() const;

  const MlpConfig& config() const { return config_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  int input_width() const { return config_.layer_widths.front(); }
  int output_width() const { return config_.layer_widths.back(); }
  std::size_t parameter_count() const;

 private:
  void check_input(const Eigen::MatrixXd& input) const;

  MlpConfig config_;
  std::vector<DenseLayer> layers_;
};

/// Adam over a flat list of parameter matrices.
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam(Options options, const std::vector<Eigen::MatrixXd*>& params);
  void step(const std::vector<Eigen::MatrixXd*>& params, const std::vector<const Eigen::MatrixXd*>& grads);

 private:
  Options opt_;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
  long long t_ = 0;
};

std::vector<Eigen::MatrixXd*> parameter_list(Mlp& mlp);
std::vector<const Eigen::MatrixXd*> gradient_list(const MlpGradients& g);

}  // namespace stec
