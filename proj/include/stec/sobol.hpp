#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace stec {

/// Unscrambled Sobol' sequence (Gray-code order) built from the Joe-Kuo
/// "new-joe-kuo-6.21201" direction numbers. Only the first kMaxDim
/// dimensions are embedded.
class SobolSequence {
 public:
  static constexpr int kMaxDim = 64;
  static constexpr int kBits = 32;

  explicit SobolSequence(int dim);

  int dim() const { return dim_; }
  std::uint64_t index() const { return index_; }

  // Next point in [0, 1)^dim. The first point is the origin.
  std::vector<double> next();
  void skip(std::uint64_t n);

 private:
  void advance();

  int dim_;
  std::uint64_t index_ = 0;
  std::vector<std::array<std::uint32_t, kBits>> directions_;
  std::vector<std::uint32_t> state_;
};

// n x dim matrix of points after discarding the first `skip`.
Eigen::MatrixXd sobol_points(int dim, int n, std::uint64_t skip = 1);

// Column-wise affine map lo + p (hi - lo). Throws on lo >= hi.
Eigen::MatrixXd scale_to_domain(const Eigen::MatrixXd& points,
                                const std::vector<std::pair<double, double>>& bounds);

}  // namespace stec
