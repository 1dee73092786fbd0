// Independent reference implementations used by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

// Gaussian elimination with partial pivoting on a dense row-major copy.
inline std::vector<double> naive_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

inline double rbf(const std::vector<double>& a, const std::vector<double>& b, double sigma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

// Largest |fraction of points in [0, c) - volume of [0, c)| over a fixed
// seeded family of anchored boxes; scaled by the point count.
inline double discrepancy_proxy(const std::vector<std::vector<double>>& points, int n_boxes = 4096,
                                std::uint64_t seed = 12345) {
  const std::size_t dim = points.front().size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < n_boxes; ++k) {
    std::vector<double> corner(dim);
    double volume = 1.0;
    for (auto& c : corner) {
      c = u(rng);
      volume *= c;
    }
    std::size_t inside = 0;
    for (const auto& p : points) {
      bool in = true;
      for (std::size_t j = 0; j < dim && in; ++j) in = p[j] < corner[j];
      inside += in;
    }
    worst = std::max(worst, std::abs(static_cast<double>(inside) - volume * static_cast<double>(points.size())));
  }
  return worst;
}

struct Split1d {
  double threshold;
  double left_mean;
  double right_mean;
};

// Exhaustive search over midpoints between sorted distinct x values for the
// split with the smallest summed squared error.
inline Split1d best_split_1d(std::vector<std::pair<double, double>> xy) {
  std::sort(xy.begin(), xy.end());
  Split1d best{0, 0, 0};
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < xy.size(); ++i) {
    if (xy[i].first == xy[i - 1].first) continue;
    double sl = 0, sr = 0;
    for (std::size_t j = 0; j < i; ++j) sl += xy[j].second;
    for (std::size_t j = i; j < xy.size(); ++j) sr += xy[j].second;
    const double ml = sl / i, mr = sr / (xy.size() - i);
    double sse = 0;
    for (std::size_t j = 0; j < xy.size(); ++j) {
      const double m = j < i ? ml : mr;
      sse += (xy[j].second - m) * (xy[j].second - m);
    }
    if (sse < best_sse) {
      best_sse = sse;
      best = {(xy[i].first + xy[i - 1].first) / 2, ml, mr};
    }
  }
  return best;
}

// Elevation by dot product with the spherical up vector, in degrees.
inline double elevation_deg(double lat_deg, double lon_deg, double alt_km, double sx, double sy, double sz) {
  const double la = lat_deg * M_PI / 180.0, lo = lon_deg * M_PI / 180.0, r = 6371.0 + alt_km;
  const double ux = std::cos(la) * std::cos(lo), uy = std::cos(la) * std::sin(lo), uz = std::sin(la);
  const double dx = sx - r * ux, dy = sy - r * uy, dz = sz - r * uz;
  const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
  return std::asin((dx * ux + dy * uy + dz * uz) / len) * 180.0 / M_PI;
}

}  // namespace oracle
