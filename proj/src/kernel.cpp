#include "stec/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <vector>

#include "stec/error.hpp"

namespace stec {
namespace {

const double kSqrt3 = std::sqrt(3.0);

double distance(std::span<const double> a, std::span<const double> b, DistanceNorm norm) {
  double acc = 0.0;
  if (norm == DistanceNorm::l1) {
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
  }
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

double kernel_from_distance(const KernelSpec& spec, double d) {
  if (spec.kind == KernelKind::rbf) return std::exp(-d * d / (2.0 * spec.sigma * spec.sigma));
  const double r = kSqrt3 * d / spec.sigma;
  return (1.0 + r) * std::exp(-r);
}

DistanceNorm norm_of(const KernelSpec& spec) {
  return spec.kind == KernelKind::rbf ? DistanceNorm::l2 : spec.matern_norm;
}

std::span<const double> row_span(const Eigen::MatrixXd& m, Eigen::Index i, std::vector<double>& scratch) {
  scratch.resize(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) scratch[static_cast<std::size_t>(j)] = m(i, j);
  return scratch;
}

}  // namespace

KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "rbf") return KernelKind::rbf;
  if (s == "matern32") return KernelKind::matern32;
  throw ValidationError("unknown kernel kind '" + s + "'");
}

std::string to_string(KernelKind k) { return k == KernelKind::rbf ? "rbf" : "matern32"; }

DistanceNorm parse_distance_norm(const std::string& s) {
  if (s == "l1") return DistanceNorm::l1;
  if (s == "l2") return DistanceNorm::l2;
  throw ValidationError("unknown norm '" + s + "'");
}

std::string to_string(DistanceNorm n) { return n == DistanceNorm::l1 ? "l1" : "l2"; }

void KernelSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("kernel sigma must be > 0");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("kernel dimension mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
  spec.validate();
  return kernel_from_distance(spec, distance(a, b, norm_of(spec)));
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points) {
  spec.validate();
  const Eigen::Index n = points.rows();
  const DistanceNorm norm = norm_of(spec);
  const Eigen::MatrixXd pt = points.transpose();  // column access is contiguous
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = 1.0;
    const std::span<const double> bj(pt.col(j).data(), static_cast<std::size_t>(pt.rows()));
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const std::span<const double> ai(pt.col(i).data(), static_cast<std::size_t>(pt.rows()));
      k(i, j) = k(j, i) = kernel_from_distance(spec, distance(ai, bj, norm));
    }
  }
  return k;
}

double median_pairwise_distance(const Eigen::MatrixXd& points, DistanceNorm norm) {
  const Eigen::Index n = points.rows();
  if (n < 2) return 0.0;
  const Eigen::MatrixXd pt = points.transpose();
  const auto d = static_cast<std::size_t>(pt.rows());
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dists.push_back(distance({pt.col(i).data(), d}, {pt.col(j).data(), d}, norm));
    }
  }
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  if (dists.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(dists.begin(), mid);
  return 0.5 * (lower + upper);
}

InputFunction::InputFunction(KernelSpec kernel, Eigen::MatrixXd support, Eigen::VectorXd alpha, double jitter)
    : kernel_(kernel), support_(std::move(support)), alpha_(std::move(alpha)), jitter_(jitter) {
  kernel_.validate();
  if (support_.rows() != alpha_.size()) throw ValidationError("alpha length must equal support size");
}

double InputFunction::operator()(std::span<const double> point) const {
  if (static_cast<Eigen::Index>(point.size()) != dim()) {
    throw ValidationError("input function dimension mismatch: " + std::to_string(point.size()) + " vs " +
                          std::to_string(dim()));
  }
  std::vector<double> scratch;
  const DistanceNorm norm = norm_of(kernel_);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < support_.rows(); ++j) {
    acc += kernel_from_distance(kernel_, distance(point, row_span(support_, j, scratch), norm)) * alpha_(j);
  }
  return acc;
}

Eigen::VectorXd InputFunction::eval(const Eigen::MatrixXd& points) const {
  if (points.cols() != dim()) {
    throw ValidationError("input function dimension mismatch: " + std::to_string(points.cols()) + " vs " +
                          std::to_string(dim()));
  }
  Eigen::VectorXd out(points.rows());
  std::vector<double> scratch;
  for (Eigen::Index i = 0; i < points.rows(); ++i) out(i) = (*this)(row_span(points, i, scratch));
  return out;
}

InputFunction fit_input_function(const Eigen::MatrixXd& points, std::span<const double> targets,
                                 const KernelSpec& spec, double jitter, FitSummary* summary) {
  spec.validate();
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw ValidationError("input function needs at least one sample");
  if (targets.size() != n) throw ValidationError("targets length must equal number of samples");
  if (!(jitter >= 0.0)) throw ValidationError("jitter must be >= 0");

  // Merge identical rows, keeping first-occurrence order.
  std::map<std::vector<double>, std::size_t> index_of;
  std::vector<std::size_t> first_row;
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> key(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index c = 0; c < points.cols(); ++c) key[static_cast<std::size_t>(c)] = points(static_cast<Eigen::Index>(i), c);
    auto [it, inserted] = index_of.try_emplace(std::move(key), first_row.size());
    if (inserted) {
      first_row.push_back(i);
      sums.push_back(targets[i]);
      counts.push_back(1);
    } else {
      sums[it->second] += targets[i];
      ++counts[it->second];
    }
  }
  const auto m = static_cast<Eigen::Index>(first_row.size());
  Eigen::MatrixXd support(m, points.cols());
  Eigen::VectorXd y(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    support.row(k) = points.row(static_cast<Eigen::Index>(first_row[ku]));
    y(k) = sums[ku] / static_cast<double>(counts[ku]);
  }
  if (summary) *summary = FitSummary{n, first_row.size(), n - first_row.size()};

  Eigen::MatrixXd k = gram_matrix(spec, support);
  k.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", jitter);
    throw ComputeError(std::string("kernel Gram matrix is not positive definite with jitter ") + buf +
                       "; try a larger jitter");
  }
  Eigen::VectorXd alpha = llt.solve(y);
  if (!alpha.allFinite()) throw ComputeError("kernel solve produced non-finite coefficients; try a larger jitter");
  return InputFunction(spec, std::move(support), std::move(alpha), jitter);
}

}  // namespace stec
