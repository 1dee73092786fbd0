#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "stec/deeponet.hpp"
#include "stec/error.hpp"
#include "stec/mlp.hpp"
#include "stec/training.hpp"
#include "support.hpp"

using namespace stec;

TEST_CASE("operator forward is the scaled inner product") {
  const auto model = fixture::small_operator(5, 8, 2, 4, 1);
  const auto x = fixture::random_features(7, 2);
  const Eigen::RowVectorXd beta = model.branch.forward(Eigen::MatrixXd(model.branch_input())).row(0);
  const Eigen::MatrixXd tau = model.trunk.forward(x);
  const Eigen::VectorXd pred = operator_forward(model, x);
  for (int i = 0; i < 7; ++i) {
    double dot = 0;
    for (int k = 0; k < 4; ++k) dot += beta(k) * tau(i, k);
    CHECK(pred(i) == doctest::Approx(40.0 * dot).epsilon(1e-13));
  }
  const OperatorPredictor cached(model);
  CHECK(cached(x) == pred);
}

TEST_CASE("analytic gradients match central differences in tanh mode") {
  const auto model = fixture::small_operator(6, 8, 2, 4, 11);
  const auto x = fixture::random_features(16, 12);
  std::vector<double> y(16);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 60.0);
  for (auto& v : y) v = u(rng);
  const std::vector<double> w = compute_aifw(y, 1.0, 0.05).weights;
  const auto check = fixture::gradient_check(model, x, y, w);
  CHECK(check.n_params == model.branch.parameter_count() + model.trunk.parameter_count());
  CHECK(check.max_rel_error < 1e-4);
}

TEST_CASE("weighted loss") {
  const std::vector<double> p = {1, 2, 4}, t = {1, 2, 3};
  CHECK(weighted_loss(p, t, std::vector<double>{1, 1, 1}) == doctest::Approx(1.0 / 3.0));
  CHECK(weighted_loss(p, t, std::vector<double>{1, 1, 2}) == doctest::Approx(0.5));
  CHECK(weighted_loss(p, t, std::vector<double>{3, 3, 6}) == weighted_loss(p, t, std::vector<double>{1, 1, 2}));
  CHECK_THROWS_AS(weighted_loss(p, t, std::vector<double>{0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(weighted_loss(p, t, std::vector<double>{1, 1}), ValidationError);
}

TEST_CASE("unit AIFW weights reduce to the plain mean squared error bit for bit") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 80);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial * 7;
    std::vector<double> p(n), t(n);
    for (int i = 0; i < n; ++i) {
      p[i] = u(rng);
      t[i] = u(rng);
    }
    const auto w = compute_aifw(t, 1.0, 0.0);
    CHECK(weighted_loss(p, t, w.weights) == mean_squared_loss(p, t));
  }
}

TEST_CASE("backward loss equals operator_loss") {
  const auto model = fixture::small_operator(4, 6, 3, 5, 21);
  const auto x = fixture::random_features(9, 22);
  std::vector<double> y(9, 30.0), w(9, 1.0);
  w[3] = 4.0;
  const auto [loss, grads] = backward(model, x, y, w);
  CHECK(loss == doctest::Approx(operator_loss(model, x, y, w)).epsilon(1e-14));
}

TEST_CASE("row results do not depend on batch composition") {
  OperatorModel model = fixture::small_operator(5, 16, 3, 8, 31);
  const auto x = fixture::random_features(1500, 32);
  const Eigen::VectorXd all = operator_forward(model, x);
  for (int i : {0, 511, 512, 1023, 1499}) {
    CHECK(operator_forward(model, Eigen::MatrixXd(x.row(i)))(0) == all(i));
  }
  const Eigen::VectorXd tail = operator_forward(model, Eigen::MatrixXd(x.bottomRows(700)));
  for (int i = 0; i < 700; ++i) CHECK(tail(i) == all(800 + i));
}

TEST_CASE("model validation") {
  auto model = fixture::small_operator(5, 8, 2, 4, 1);
  model.target_scale = 0.0;
  CHECK_THROWS_AS(model.validate(), ValidationError);
  model = fixture::small_operator(5, 8, 2, 4, 1);
  model.trunk = Mlp(MlpConfig::stack(10, 8, 2, 3, Activation::tanh), 3);
  CHECK_THROWS_AS(model.validate(), ValidationError);
  CHECK_THROWS_AS(Mlp(MlpConfig::stack(10, 8, 2, 3, Activation::tanh), 3).forward(Eigen::MatrixXd::Zero(2, 4)),
                  ValidationError);
}

TEST_CASE("adam step on a quadratic") {
  Eigen::MatrixXd p(1, 1);
  p << 5.0;
  std::vector<Eigen::MatrixXd*> params = {&p};
  Adam::Options fast;
  fast.learning_rate = 0.05;
  Adam adam(fast, params);
  for (int i = 0; i < 3000; ++i) {
    Eigen::MatrixXd g = 2.0 * p;
    adam.step(params, {&g});
  }
  CHECK(std::abs(p(0, 0)) < 0.05);
  // First step moves by lr regardless of gradient scale.
  Eigen::MatrixXd q(1, 1);
  q << 1.0;
  std::vector<Eigen::MatrixXd*> qp = {&q};
  Adam a2(Adam::Options{}, qp);
  Eigen::MatrixXd g(1, 1);
  g << 1234.0;
  a2.step(qp, {&g});
  CHECK(q(0, 0) == doctest::Approx(1.0 - 1e-3).epsilon(1e-9));
}

TEST_CASE("hand-set mlp forward") {
  // 2-3-1 relu net: h = relu(x W0 + b0), y = h W1 + b1
  DenseLayer l0{Eigen::MatrixXd(2, 3), Eigen::MatrixXd(1, 3)};
  l0.weight << 1, -1, 0.5, 2, 1, -1;
  l0.bias << 0, 0.5, 1;
  DenseLayer l1{Eigen::MatrixXd(3, 1), Eigen::MatrixXd(1, 1)};
  l1.weight << 1, 2, 3;
  l1.bias << -1;
  const Mlp net(MlpConfig{{2, 3, 1}, Activation::relu}, {l0, l1});
  Eigen::MatrixXd x(1, 2);
  x << 1, 2;
  // pre = [5, 1.5, -0.5] -> relu [5, 1.5, 0] -> 5 + 3 + 0 - 1 = 7
  CHECK(net.forward(x)(0, 0) == 7.0);
  x << -3, -3;
  // pre = [-9, 0.5, 2.5] -> relu [0, 0.5, 2.5] -> 1 + 7.5 - 1 = 7.5
  CHECK(net.forward(x)(0, 0) == 7.5);

  const Mlp identity(MlpConfig{{3, 3}, Activation::relu},
                     {DenseLayer{Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(1, 3)}});
  Eigen::MatrixXd v(1, 3);
  v << -1, 2, 3;
  CHECK(identity.forward(v) == v);
}

TEST_CASE("inner product edge cases") {
  OperatorModel model = fixture::small_operator(3, 4, 1, 1, 41);
  // Trunk with zero last layer -> zero prediction.
  auto& last = model.trunk.layers().back();
  last.weight.setZero();
  last.bias.setZero();
  const auto x = fixture::random_features(5, 42);
  for (int i = 0; i < 5; ++i) CHECK(operator_forward(model, x)(i) == 0.0);

  // p = 1 with beta = 2 and tau = 3 -> 6.
  OperatorModel tiny;
  tiny.branch = Mlp(MlpConfig{{1, 1}, Activation::relu},
                    {DenseLayer{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Constant(1, 1, 2.0)}});
  tiny.trunk = Mlp(MlpConfig{{10, 1}, Activation::relu},
                   {DenseLayer{Eigen::MatrixXd::Zero(10, 1), Eigen::MatrixXd::Constant(1, 1, 3.0)}});
  tiny.sensors = Eigen::MatrixXd::Zero(1, 10);
  tiny.sensor_values = Eigen::RowVectorXd::Constant(1, 5.0);
  tiny.target_scale = 1.0;
  CHECK(operator_forward(tiny, x)(0) == 6.0);
}

TEST_CASE("weighted loss hand example") {
  CHECK(weighted_loss(std::vector<double>{1, 3}, std::vector<double>{1, 1}, std::vector<double>{1, 3}) == 3.0);
  CHECK(weighted_loss(std::vector<double>{2, 5}, std::vector<double>{2, 5}, std::vector<double>{1, 1}) == 0.0);
}

TEST_CASE("zero-weight items and exact fits give zero gradient") {
  const auto model = fixture::small_operator(4, 6, 2, 3, 51);
  const auto x = fixture::random_features(6, 52);
  const Eigen::VectorXd pred = operator_forward(model, x);
  std::vector<double> y(pred.data(), pred.data() + pred.size());
  const std::vector<double> w(6, 1.0);
  const auto [loss, g] = backward(model, x, y, w);
  CHECK(loss == doctest::Approx(0.0).epsilon(1e-20));
  for (const auto* m : gradient_list(g)) CHECK(m->cwiseAbs().maxCoeff() < 1e-12);

  // Perturbing a zero-weight target leaves the gradient unchanged.
  std::vector<double> w2 = w;
  w2[2] = 0.0;
  std::vector<double> y2 = y;
  for (auto& v : y2) v += 1.0;
  auto y3 = y2;
  y3[2] += 100.0;
  const auto ga = backward(model, x, y2, w2).second;
  const auto gb = backward(model, x, y3, w2).second;
  const auto a = gradient_list(ga);
  const auto b = gradient_list(gb);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK((*a[k] - *b[k]).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("bias-free relu net is positively homogeneous") {
  Mlp net(MlpConfig::stack(10, 16, 3, 4, Activation::relu), 61);
  const auto x = fixture::random_features(8, 62);
  const Eigen::MatrixXd y = net.forward(x);
  const Eigen::MatrixXd y3 = net.forward(Eigen::MatrixXd(x * 3.0));
  CHECK((y3 - 3.0 * y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("operator forward is permutation equivariant") {
  const auto model = fixture::small_operator(5, 8, 2, 4, 71);
  const auto x = fixture::random_features(20, 72);
  Eigen::MatrixXd rev = x.colwise().reverse();
  const Eigen::VectorXd a = operator_forward(model, x), b = operator_forward(model, rev);
  for (int i = 0; i < 20; ++i) CHECK(a(i) == b(19 - i));
}
