#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "metric_cases.hpp"
#include "stec/error.hpp"
#include "stec/metrics.hpp"

using namespace stec;
using Vec = std::vector<double>;

TEST_CASE("hand arithmetic examples") {
  for (const auto& [name, ok] : metric_cases::hand_examples()) {
    INFO(name);
    CHECK(ok);
  }
}

TEST_CASE("input errors") {
  CHECK_THROWS_AS(rmse(Vec{}, Vec{}), ValidationError);
  CHECK_THROWS_AS(rmse(Vec{1}, Vec{1, 2}), ValidationError);
  CHECK_THROWS_AS(qa(Vec{}, Vec{}, 1.0), ValidationError);
  CHECK_THROWS_AS(qa(Vec{1}, Vec{1}, 0.0), ValidationError);
  CHECK_THROWS_WITH_AS(r2(Vec{1, 2}, Vec{3, 3}), doctest::Contains("R² undefined"), ValidationError);
  CHECK_THROWS_AS(mape(Vec{1, 2}, Vec{0.05, -0.01}), ValidationError);
}

TEST_CASE("mape excludes small truths") {
  const auto m = mape(Vec{1, 3, 7}, Vec{2, 4, 0.05});
  CHECK(m.pct == 37.5);
  CHECK(m.n_used == 2);
  CHECK(m.n_excluded == 1);
  CHECK(mape(Vec{0.2}, Vec{0.1}).n_used == 1);
}

TEST_CASE("random property checks") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(5.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial % 40);
    Vec truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = u(rng);
      pred[i] = truth[i] + g(rng) * (1 + trial % 3);
    }
    // QA nondecreasing in theta.
    double prev = 0.0;
    for (double theta = 0.05; theta < 6.0; theta += 0.05) {
      const double v = qa(pred, truth, theta);
      CHECK(v >= prev);
      CHECK(v >= 0.0);
      CHECK(v <= 100.0);
      prev = v;
    }
    // rmse >= mean absolute error.
    double mae = 0.0;
    for (std::size_t i = 0; i < n; ++i) mae += std::abs(pred[i] - truth[i]) / static_cast<double>(n);
    CHECK(rmse(pred, truth) >= mae * (1 - 1e-15));
    // A perfect sample never lowers qa and scales rmse^2 by at most N/(N+1).
    const double r0 = rmse(pred, truth), q0 = qa(pred, truth, 1.0);
    Vec p2 = pred, t2 = truth;
    p2.push_back(10.0);
    t2.push_back(10.0);
    CHECK(qa(p2, t2, 1.0) >= q0);
    const double r1 = rmse(p2, t2);
    CHECK(r1 * r1 <= r0 * r0 * static_cast<double>(n) / static_cast<double>(n + 1) * (1 + 1e-12));
  }
}

TEST_CASE("aggregate rmse squared is the count-weighted mean") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 2.0);
  std::vector<std::string> ids;
  Vec pred, truth;
  const std::vector<std::pair<std::string, int>> sizes{{"B", 13}, {"A", 40}, {"C", 7}};
  for (const auto& [id, n] : sizes) {
    for (int i = 0; i < n; ++i) {
      ids.push_back(id);
      truth.push_back(20 + i * 0.3);
      pred.push_back(truth.back() + g(rng));
    }
  }
  const auto rep = build_report(ids, pred, truth);
  REQUIRE(rep.stations.size() == 3);
  CHECK(rep.stations[0].station_id == "A");
  CHECK(rep.stations[2].station_id == "C");
  double weighted = 0.0;
  std::size_t total = 0;
  for (const auto& s : rep.stations) {
    weighted += s.rmse_tecu * s.rmse_tecu * static_cast<double>(s.n_samples);
    total += s.n_samples;
  }
  CHECK(rep.aggregate.station_id == "ALL");
  CHECK(rep.aggregate.n_samples == total);
  CHECK(rep.aggregate.rmse_tecu * rep.aggregate.rmse_tecu == doctest::Approx(weighted / total).epsilon(1e-12));
}

TEST_CASE("report serialization") {
  const std::vector<std::string> ids{"X", "X", "Y", "Y"};
  const auto rep = build_report(ids, Vec{1, 2, 5, 5}, Vec{1, 2, 5, 5});
  const std::string csv = report_csv(rep);
  CHECK(csv.rfind("station_id,n,rmse_tecu,r2,mape_pct,qa03_pct,qa10_pct\n", 0) == 0);
  CHECK(csv.find("X,2,0,1,0,100,100\n") != std::string::npos);
  CHECK(csv.find("Y,2,0,nan,0,100,100\n") != std::string::npos);
  CHECK(csv.find("ALL,4,") != std::string::npos);
  const auto j = nlohmann::json::parse(report_json(rep));
  CHECK(j["stations"].size() == 2);
  CHECK(j["stations"][1]["r2"].is_null());
  CHECK(j["aggregate"]["n"] == 4);
  CHECK(j["aggregate"]["mape_excluded"] == 0);
  CHECK_THROWS_AS(build_report(std::vector<std::string>{"X"}, Vec{1, 2}, Vec{1, 2}), ValidationError);
}
