// Shared fixtures for tests that exercise the library API.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "stec/dataset.hpp"
#include "stec/deeponet.hpp"
#include "stec/mlp.hpp"

namespace fixture {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t n_params = 0;
};

// Operator model with tanh networks, random biases and sensor values.
inline stec::OperatorModel small_operator(int m_sensors, int width, int depth, int p, std::uint64_t seed) {
  using namespace stec;
  OperatorModel model;
  model.branch = Mlp(MlpConfig::stack(m_sensors, width, depth, p, Activation::tanh), seed);
  model.trunk = Mlp(MlpConfig::stack(static_cast<int>(kFeatureDim), width, depth, p, Activation::tanh), seed + 1);
  std::mt19937_64 rng(seed + 2);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto* mlp : {&model.branch, &model.trunk}) {
    for (auto& layer : mlp->layers()) layer.bias = layer.bias.unaryExpr([&](double) { return u(rng); });
  }
  model.sensors = Eigen::MatrixXd::Zero(m_sensors, static_cast<Eigen::Index>(kFeatureDim));
  model.sensor_values = Eigen::RowVectorXd(m_sensors);
  for (int i = 0; i < m_sensors; ++i) model.sensor_values(i) = 20.0 + 10.0 * u(rng);
  model.target_scale = 40.0;
  model.feature_bounds.assign(kFeatureDim, {-1.0, 1.0});
  return model;
}

// Central differences of the weighted loss against backward(); the relative
// error of each component is |a - n| / max(|a|, |n|, floor).
inline GradCheck gradient_check(stec::OperatorModel model, const Eigen::MatrixXd& x, const std::vector<double>& y,
                                const std::vector<double>& w, double step = 1e-5, double floor = 1e-8) {
  const auto [loss, grads] = stec::backward(model, x, y, w);
  (void)loss;
  const auto analytic = stec::gradient_list(grads);
  auto params = stec::parameter_list(model);
  GradCheck out;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Eigen::MatrixXd& p = *params[k];
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double keep = p.data()[i];
      p.data()[i] = keep + step;
      const double up = stec::operator_loss(model, x, y, w);
      p.data()[i] = keep - step;
      const double down = stec::operator_loss(model, x, y, w);
      p.data()[i] = keep;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k]->data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      out.max_rel_error = std::max(out.max_rel_error, std::abs(a - numeric) / denom);
      ++out.n_params;
    }
  }
  return out;
}

inline Eigen::MatrixXd random_features(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(stec::kFeatureDim));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

// Rays from a small station set against synthetic orbits, with the target
// given by `stec_of`.
template <class F>
std::vector<stec::RayRecord> synthetic_rays(const std::vector<std::string>& stations, int first_doy, int n_days,
                                            int cadence_s, F stec_of) {
  using namespace stec;
  std::vector<RayRecord> out;
  for (std::size_t s = 0; s < stations.size(); ++s) {
    const GeodeticPos rx(33.0 + 2.0 * static_cast<double>(s), -90.0 + 1.5 * static_cast<double>(s), 0.0);
    for (int d = 0; d < n_days; ++d) {
      for (int sod = 0; sod < 86400; sod += cadence_s) {
        for (int k = 0; k < 4; ++k) {
          const double t = (first_doy + d) * 86400.0 + sod;
          const EcefPos sat = synth_orbit(k, t);
          if (!make_ray(rx, sat, 15.0)) continue;
          RayRecord r{stations[s], "G0" + std::to_string(k + 1), rx, sat, 2020, first_doy + d,
                      static_cast<double>(sod), 0.0};
          r.stec_tecu = stec_of(r);
          out.push_back(r);
        }
      }
    }
  }
  return out;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("stec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
