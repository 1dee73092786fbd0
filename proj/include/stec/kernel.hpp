#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>

namespace stec {

enum class KernelKind { rbf, matern32 };
enum class DistanceNorm { l1, l2 };

KernelKind parse_kernel_kind(const std::string& s);
std::string to_string(KernelKind k);
DistanceNorm parse_distance_norm(const std::string& s);
std::string to_string(DistanceNorm n);

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double sigma = 1.0;
  // Distance used by matern32. The RBF kernel always uses L2.
  DistanceNorm matern_norm = DistanceNorm::l1;

  void validate() const;
};

/// rbf:      exp(-|a-b|_2^2 / (2 sigma^2))
/// matern32: (1 + sqrt(3) d / sigma) exp(-sqrt(3) d / sigma), d = |a-b|_1
///           (or |a-b|_2 when matern_norm is l2)
double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b);

// Rows of `points` are samples.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points);

// Median over all i<j of the distance the kernel uses. Zero when fewer than
// two points.
double median_pairwise_distance(const Eigen::MatrixXd& points, DistanceNorm norm);

struct FitSummary {
  std::size_t n_samples = 0;
  std::size_t n_support = 0;
  std::size_t n_duplicates_merged = 0;
};

/// Kernel expansion u(z) = sum_j k(z, s_j) alpha_j with alpha = (K + jitter I)^-1 y.
class InputFunction {
 public:
  InputFunction() = default;
  InputFunction(KernelSpec kernel, Eigen::MatrixXd support, Eigen::VectorXd alpha, double jitter);

  double operator()(std::span<const double> point) const;
  // Rows of `points` are query points.
  Eigen::VectorXd eval(const Eigen::MatrixXd& points) const;

  const KernelSpec& kernel() const { return kernel_; }
  const Eigen::MatrixXd& support() const { return support_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double jitter() const { return jitter_; }
  Eigen::Index dim() const { return support_.cols(); }

 private:
  KernelSpec kernel_;
  Eigen::MatrixXd support_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

// Solves (K + jitter I) alpha = y by Cholesky. Identical support rows are
// merged first, averaging their targets. Throws ComputeError when the
// regularized Gram matrix is not positive definite.
InputFunction fit_input_function(const Eigen::MatrixXd& points, std::span<const double> targets,
                                 const KernelSpec& spec, double jitter, FitSummary* summary = nullptr);

}  // namespace stec
