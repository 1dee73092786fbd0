#include "stec/sobol.hpp"

#include <string>

#include "stec/error.hpp"

namespace stec {
namespace {

struct Primitive {
  int degree;
  std::uint32_t coeffs;  // interior polynomial coefficients "a"
  std::array<std::uint32_t, 10> m;
};

// Dimensions 2..64 of new-joe-kuo-6.21201 (degree s, a, initial m_i).
// Dimension 1 is the van der Corput sequence and has no entry.
constexpr Primitive kJoeKuo[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},
    {7, 19, {1, 3, 1, 5, 27, 61, 31}},
    {7, 21, {1, 1, 5, 11, 19, 41, 61}},
    {7, 28, {1, 3, 5, 3, 3, 13, 69}},
    {7, 31, {1, 1, 7, 13, 1, 19, 1}},
    {7, 32, {1, 3, 7, 5, 13, 19, 59}},
    {7, 37, {1, 1, 3, 9, 25, 29, 41}},
    {7, 41, {1, 3, 5, 13, 23, 1, 55}},
    {7, 42, {1, 3, 7, 3, 13, 59, 17}},
    {7, 50, {1, 3, 1, 3, 5, 53, 69}},
    {7, 55, {1, 1, 5, 5, 23, 33, 13}},
    {7, 56, {1, 1, 7, 7, 1, 61, 123}},
    {7, 59, {1, 1, 7, 9, 13, 61, 49}},
    {7, 62, {1, 3, 3, 5, 3, 55, 33}},
    {8, 14, {1, 3, 1, 15, 31, 13, 49, 245}},
    {8, 21, {1, 3, 5, 15, 31, 59, 63, 97}},
    {8, 22, {1, 3, 1, 11, 11, 11, 77, 249}},
    {8, 38, {1, 3, 1, 11, 27, 43, 71, 9}},
    {8, 47, {1, 1, 7, 15, 21, 11, 81, 45}},
    {8, 49, {1, 3, 7, 3, 25, 31, 65, 79}},
    {8, 50, {1, 3, 1, 1, 19, 11, 3, 205}},
    {8, 52, {1, 1, 5, 9, 19, 21, 29, 157}},
    {8, 56, {1, 3, 7, 11, 1, 33, 89, 185}},
    {8, 67, {1, 3, 3, 3, 15, 9, 79, 71}},
    {8, 70, {1, 3, 7, 11, 15, 39, 119, 27}},
    {8, 84, {1, 1, 3, 1, 11, 31, 97, 225}},
    {8, 97, {1, 1, 1, 3, 23, 43, 57, 177}},
    {8, 103, {1, 3, 7, 7, 17, 17, 37, 71}},
    {8, 115, {1, 3, 1, 5, 27, 63, 123, 213}},
    {8, 122, {1, 1, 3, 5, 11, 43, 53, 133}},
    {9, 8, {1, 3, 5, 5, 29, 17, 47, 173, 479}},
    {9, 13, {1, 3, 3, 11, 3, 1, 109, 9, 69}},
    {9, 16, {1, 1, 1, 5, 17, 39, 23, 5, 343}},
    {9, 22, {1, 3, 1, 5, 25, 15, 31, 103, 499}},
    {9, 25, {1, 1, 1, 11, 11, 17, 63, 105, 183}},
    {9, 44, {1, 1, 5, 11, 9, 29, 97, 231, 363}},
    {9, 47, {1, 1, 5, 15, 19, 45, 41, 7, 383}},
    {9, 52, {1, 3, 7, 7, 31, 19, 83, 137, 221}},
    {9, 55, {1, 1, 1, 3, 23, 15, 111, 223, 83}},
    {9, 59, {1, 1, 5, 13, 31, 15, 55, 25, 161}},
    {9, 62, {1, 1, 3, 13, 25, 47, 39, 87, 257}},
};

static_assert(sizeof(kJoeKuo) / sizeof(kJoeKuo[0]) == SobolSequence::kMaxDim - 1);

}  // namespace

SobolSequence::SobolSequence(int dim) : dim_(dim) {
  if (dim < 1) throw ValidationError("Sobol dimension must be >= 1");
  if (dim > kMaxDim) {
    throw ValidationError("Sobol dimension " + std::to_string(dim) + " exceeds the embedded table (" +
                          std::to_string(kMaxDim) + ")");
  }
  directions_.resize(static_cast<std::size_t>(dim));
  for (int k = 0; k < kBits; ++k) directions_[0][static_cast<std::size_t>(k)] = 1u << (kBits - 1 - k);
  for (int j = 1; j < dim; ++j) {
    const Primitive& p = kJoeKuo[j - 1];
    auto& v = directions_[static_cast<std::size_t>(j)];
    const int s = p.degree;
    for (int k = 0; k < s && k < kBits; ++k) v[static_cast<std::size_t>(k)] = p.m[static_cast<std::size_t>(k)] << (kBits - 1 - k);
    for (int k = s; k < kBits; ++k) {
      std::uint32_t x = v[static_cast<std::size_t>(k - s)] ^ (v[static_cast<std::size_t>(k - s)] >> s);
      for (int l = 1; l < s; ++l) {
        if ((p.coeffs >> (s - 1 - l)) & 1u) x ^= v[static_cast<std::size_t>(k - l)];
      }
      v[static_cast<std::size_t>(k)] = x;
    }
  }
  state_.assign(static_cast<std::size_t>(dim), 0u);
}

void SobolSequence::advance() {
  // Gray code: flip the direction number of the lowest zero bit of index.
  std::uint64_t i = index_;
  int c = 0;
  while (i & 1u) {
    i >>= 1;
    ++c;
  }
  if (c >= kBits) throw ComputeError("Sobol sequence exhausted");
  for (int j = 0; j < dim_; ++j) {
    state_[static_cast<std::size_t>(j)] ^= directions_[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
  }
  ++index_;
}

std::vector<double> SobolSequence::next() {
  std::vector<double> p(static_cast<std::size_t>(dim_));
  constexpr double scale = 1.0 / 4294967296.0;
  for (int j = 0; j < dim_; ++j) p[static_cast<std::size_t>(j)] = state_[static_cast<std::size_t>(j)] * scale;
  advance();
  return p;
}

void SobolSequence::skip(std::uint64_t n) {
  for (std::uint64_t i = 0; i < n; ++i) advance();
}

Eigen::MatrixXd sobol_points(int dim, int n, std::uint64_t skip) {
  if (n < 1) throw ValidationError("Sobol point count must be >= 1");
  SobolSequence seq(dim);
  seq.skip(skip);
  Eigen::MatrixXd out(n, dim);
  for (int i = 0; i < n; ++i) {
    const auto p = seq.next();
    for (int j = 0; j < dim; ++j) out(i, j) = p[static_cast<std::size_t>(j)];
  }
  return out;
}

Eigen::MatrixXd scale_to_domain(const Eigen::MatrixXd& points,
                                const std::vector<std::pair<double, double>>& bounds) {
  if (static_cast<Eigen::Index>(bounds.size()) != points.cols()) {
    throw ValidationError("bounds count must equal point dimension");
  }
  Eigen::MatrixXd out(points.rows(), points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const auto [lo, hi] = bounds[static_cast<std::size_t>(j)];
    if (!(lo < hi)) throw ValidationError("inverted bounds in dimension " + std::to_string(j));
    out.col(j) = (lo + points.col(j).array() * (hi - lo)).matrix();
  }
  return out;
}

}  // namespace stec
