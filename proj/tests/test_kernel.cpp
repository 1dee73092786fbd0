#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stec/error.hpp"
#include "stec/kernel.hpp"

using namespace stec;

namespace {

Eigen::MatrixXd random_points(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd p(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) p(i, j) = u(rng);
  return p;
}

std::vector<double> row(const Eigen::MatrixXd& m, int i) {
  std::vector<double> v(m.cols());
  for (int j = 0; j < m.cols(); ++j) v[j] = m(i, j);
  return v;
}

}  // namespace

TEST_CASE("kernel values") {
  KernelSpec rbf{KernelKind::rbf, 2.0, DistanceNorm::l2};
  const std::vector<double> a = {0, 0}, b = {3, 4};
  CHECK(kernel_eval(rbf, a, a) == 1.0);
  CHECK(kernel_eval(rbf, a, b) == doctest::Approx(std::exp(-25.0 / 8.0)));

  KernelSpec m1{KernelKind::matern32, 2.0, DistanceNorm::l1};
  const double r1 = std::sqrt(3.0) * 7.0 / 2.0;
  CHECK(kernel_eval(m1, a, b) == doctest::Approx((1 + r1) * std::exp(-r1)));
  KernelSpec m2{KernelKind::matern32, 2.0, DistanceNorm::l2};
  const double r2 = std::sqrt(3.0) * 5.0 / 2.0;
  CHECK(kernel_eval(m2, a, b) == doctest::Approx((1 + r2) * std::exp(-r2)));

  CHECK_THROWS_AS(kernel_eval(rbf, a, std::vector<double>{1, 2, 3}), ValidationError);
  CHECK_THROWS_AS((KernelSpec{KernelKind::rbf, 0.0, DistanceNorm::l2}.validate()), ValidationError);
  CHECK(parse_kernel_kind(to_string(KernelKind::matern32)) == KernelKind::matern32);
  CHECK_THROWS_AS(parse_kernel_kind("poly"), ValidationError);
}

TEST_CASE("gram matrix is symmetric with unit diagonal") {
  const auto p = random_points(40, 3, 1);
  for (auto kind : {KernelKind::rbf, KernelKind::matern32}) {
    const auto k = gram_matrix({kind, 0.7, DistanceNorm::l1}, p);
    for (int i = 0; i < 40; ++i) {
      CHECK(k(i, i) == 1.0);
      for (int j = 0; j < 40; ++j) CHECK(k(i, j) == k(j, i));
    }
  }
}

TEST_CASE("median pairwise distance") {
  Eigen::MatrixXd p(3, 1);
  p << 0, 1, 3;
  CHECK(median_pairwise_distance(p, DistanceNorm::l2) == 2.0);
  Eigen::MatrixXd q(1, 2);
  q << 1, 1;
  CHECK(median_pairwise_distance(q, DistanceNorm::l1) == 0.0);
}

TEST_CASE("representer interpolation matches a dense-solve oracle") {
  const int n = 120;
  const auto p = random_points(n, 10, 3);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = 5 + std::sin(3 * p(i, 0)) + p(i, 1) * p(i, 2);
  const double sigma = median_pairwise_distance(p, DistanceNorm::l2);
  const KernelSpec spec{KernelKind::rbf, sigma, DistanceNorm::l2};
  const double jitter = 1e-8;
  const auto u = fit_input_function(p, y, spec, jitter);

  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < n; ++i) pts.push_back(row(p, i));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = oracle::rbf(pts[i], pts[j], sigma) + (i == j ? jitter : 0.0);
  const auto alpha = oracle::naive_solve(a, y);
  double amax = 0;
  for (double v : alpha) amax = std::max(amax, std::abs(v));
  for (int i = 0; i < n; ++i) CHECK(std::abs(u.alpha()(i) - alpha[i]) <= 1e-8 * amax);

  double ymax = 0;
  for (double v : y) ymax = std::max(ymax, std::abs(v));
  const Eigen::VectorXd at_support = u.eval(p);
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(at_support(i) - y[i]) <= 1e-6 * ymax);
    CHECK(u(pts[i]) == doctest::Approx(at_support(i)).epsilon(1e-12));
  }
}

TEST_CASE("matern32 interpolation with L2 distance") {
  const int n = 300;
  const auto p = random_points(n, 6, 8);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = 20 + 10 * std::cos(p(i, 0) + p(i, 3));
  const double sigma = median_pairwise_distance(p, DistanceNorm::l2);
  const auto u = fit_input_function(p, y, {KernelKind::matern32, sigma, DistanceNorm::l2}, 1e-8);
  const Eigen::VectorXd at_support = u.eval(p);
  for (int i = 0; i < n; ++i) CHECK(std::abs(at_support(i) - y[i]) <= 1e-6 * 30);
}

TEST_CASE("single sample and far field") {
  Eigen::MatrixXd p(1, 3);
  p << 0.1, 0.2, 0.3;
  const double jitter = 1e-8;
  const auto u = fit_input_function(p, std::vector<double>{7.0}, KernelSpec{KernelKind::rbf, 0.5}, jitter);
  CHECK(u(std::vector<double>{0.1, 0.2, 0.3}) == doctest::Approx(7.0 / (1.0 + jitter)).epsilon(1e-15));
  CHECK(std::abs(u(std::vector<double>{100, 100, 100})) < 1e-12);
}

TEST_CASE("batch evaluation equals the per-point loop") {
  const auto p = random_points(30, 3, 12);
  std::vector<double> y(30);
  for (int i = 0; i < 30; ++i) y[i] = p(i, 0) * 3 + 1;
  const auto u = fit_input_function(p, y, {KernelKind::matern32, 0.8, DistanceNorm::l2}, 1e-8);
  const auto q = random_points(50, 3, 13);
  const Eigen::VectorXd batch = u.eval(q);
  for (int i = 0; i < 50; ++i) CHECK(batch(i) == u(row(q, i)));
}

TEST_CASE("rbf gram matrix is positive semidefinite") {
  for (int t = 0; t < 100; ++t) {
    const auto p = random_points(25, 2 + t % 5, 100 + t);
    const auto k = gram_matrix({KernelKind::rbf, 0.3 + 0.01 * t, DistanceNorm::l2}, p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * k.trace());
  }
}

TEST_CASE("kernel values decrease with distance") {
  const std::vector<double> o = {0, 0};
  for (auto kind : {KernelKind::rbf, KernelKind::matern32}) {
    double prev = 2.0;
    for (int i = 0; i < 50; ++i) {
      const double v = kernel_eval({kind, 1.3, DistanceNorm::l1}, o, std::vector<double>{0.1 * i, 0.05 * i});
      CHECK(v < prev);
      CHECK(v > 0.0);
      prev = v;
    }
  }
  CHECK(kernel_eval({KernelKind::rbf, 1.0}, o, std::vector<double>{1, 0}) == doctest::Approx(0.60653).epsilon(1e-5));
  CHECK(kernel_eval({KernelKind::matern32, 1.0}, o, std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(0.48335).epsilon(1e-5));
}

TEST_CASE("duplicate samples are merged") {
  Eigen::MatrixXd p(4, 2);
  p << 0, 0, 1, 0, 0, 0, 0, 1;
  const std::vector<double> y = {1.0, 2.0, 3.0, 4.0};
  FitSummary s;
  const auto u = fit_input_function(p, y, {KernelKind::matern32, 1.0, DistanceNorm::l1}, 1e-10, &s);
  CHECK(s.n_samples == 4);
  CHECK(s.n_support == 3);
  CHECK(s.n_duplicates_merged == 1);
  CHECK(u(std::vector<double>{0, 0}) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("matern32 with L1 distance is not positive definite in several dimensions") {
  const auto p = random_points(300, 2, 21);
  const std::vector<double> y(300, 1.0);
  const double sigma = median_pairwise_distance(p, DistanceNorm::l1);
  CHECK_THROWS_WITH_AS(fit_input_function(p, y, {KernelKind::matern32, sigma, DistanceNorm::l1}, 1e-8),
                       doctest::Contains("try a larger jitter"), ComputeError);
}

TEST_CASE("fit errors") {
  const auto p = random_points(5, 2, 4);
  const std::vector<double> y(4, 1.0);
  CHECK_THROWS_AS(fit_input_function(p, y, KernelSpec{}, 1e-8), ValidationError);
  CHECK_THROWS_AS(fit_input_function(Eigen::MatrixXd(0, 2), std::vector<double>{}, KernelSpec{}, 1e-8),
                  ValidationError);
  const auto u = fit_input_function(p, std::vector<double>(5, 1.0), KernelSpec{}, 1e-8);
  CHECK_THROWS_AS(u(std::vector<double>{1.0}), ValidationError);
}
