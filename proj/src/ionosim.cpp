#include "stec/ionosim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stec/error.hpp"
#include "stec/timeutil.hpp"

namespace stec {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kOmegaDay = 2.0 * std::numbers::pi / kSecondsPerDay;
constexpr double kLayerTailWidths = 40.0;

double sech2_half(double x) {
  const double e = std::exp(-std::fabs(x));
  const double d = 1.0 + e;
  return 4.0 * e / (d * d);
}

}  // namespace

void EpsteinParams::validate() const {
  if (!(n_max >= 0.0) || !std::isfinite(n_max)) throw ValidationError("n_max must be >= 0");
  if (!(b_thick > 0.0) || !std::isfinite(b_thick)) throw ValidationError("b_thick must be > 0");
  if (!std::isfinite(h_max)) throw ValidationError("h_max must be finite");
}

void IonosphereModel::validate() const {
  base.validate();
  if (!(diurnal_amp >= 0.0 && diurnal_amp < 1.0)) throw ValidationError("diurnal_amp must lie in [0, 1)");
  if (!(equator_amp >= 0.0 && equator_amp < 1.0)) throw ValidationError("equator_amp must lie in [0, 1)");
  if (!(drift_amp > -1.0)) throw ValidationError("drift_amp must be > -1");
  if (drift_amp != 0.0 && !(drift_end_s > drift_start_s)) {
    throw ValidationError("drift window must have drift_end_s > drift_start_s");
  }
}

double IonosphereModel::drift_factor(double t_s) const {
  if (drift_amp == 0.0) return 1.0;
  const double ramp = std::clamp((t_s - drift_start_s) / (drift_end_s - drift_start_s), 0.0, 1.0);
  return 1.0 + drift_amp * ramp;
}

double epstein_density(double h_km, const EpsteinParams& p) {
  return p.n_max * sech2_half((h_km - p.h_max) / p.b_thick);
}

EpsteinParams modulated_params(double lat_deg, double lon_deg, double t_s,
                               const IonosphereModel& model) {
  double sod = std::fmod(t_s, kSecondsPerDay);
  if (sod < 0.0) sod += kSecondsPerDay;
  const double local_sod = sod + lon_deg / 15.0 * 3600.0;
  const double diurnal = 1.0 + model.diurnal_amp * std::cos(kOmegaDay * (local_sod - model.local_noon_sod));
  const double c = std::cos(lat_deg * kDeg);
  const double latitudinal = 1.0 + model.equator_amp * c * c;
  EpsteinParams out = model.base;
  out.n_max = model.base.n_max * diurnal * latitudinal * model.drift_factor(t_s);
  return out;
}

double integrate_segment_tecu(double length_km, const std::function<double(double)>& density,
                              int n_quad) {
  if (n_quad < 8 || n_quad % 2 != 0) {
    throw ValidationError("n_quad must be even and >= 8");
  }
  if (!(length_km > 0.0)) return 0.0;
  const double h = length_km / n_quad;
  double odd = 0.0, even = 0.0;
  for (int i = 1; i < n_quad; ++i) {
    (i % 2 ? odd : even) += density(i * h);
  }
  const double sum = density(0.0) + density(length_km) + 4.0 * odd + 2.0 * even;
  // km -> m
  return sum * h / 3.0 * 1e3 / kTecu;
}

double stec_along_ray(const Ray& ray, double t_s, const IonosphereModel& model, int n_quad) {
  if (n_quad < 8 || n_quad % 2 != 0) {
    throw ValidationError("n_quad must be even and >= 8");
  }
  const EcefPos r0 = geodetic_to_ecef(ray.receiver);
  const double len = ray.length_km;
  if (!(len > 0.0)) return 0.0;
  const double ux = (ray.satellite.x_km - r0.x_km) / len;
  const double uy = (ray.satellite.y_km - r0.y_km) / len;
  const double uz = (ray.satellite.z_km - r0.z_km) / len;

  // |r0 + s u|^2 = |r0|^2 + 2 s b + s^2
  const double b = r0.x_km * ux + r0.y_km * uy + r0.z_km * uz;
  const double r0sq = r0.x_km * r0.x_km + r0.y_km * r0.y_km + r0.z_km * r0.z_km;
  auto exit_distance = [&](double radius) {
    return -b + std::sqrt(std::max(0.0, b * b - r0sq + radius * radius));
  };

  const EpsteinParams& layer = model.base;
  const double r_top = kEarthRadiusKm + layer.h_max + kLayerTailWidths * layer.b_thick;
  const double r_bot = kEarthRadiusKm + std::max(0.0, layer.h_max - kLayerTailWidths * layer.b_thick);
  const double s_hi = std::min(len, exit_distance(r_top));
  const double s_lo = r0sq < r_bot * r_bot ? exit_distance(r_bot) : 0.0;
  if (!(s_hi > s_lo)) return 0.0;

  double sod = std::fmod(t_s, kSecondsPerDay);
  if (sod < 0.0) sod += kSecondsPerDay;
  const double phase = kOmegaDay * (sod - model.local_noon_sod);
  const double cos_phase = std::cos(phase), sin_phase = std::sin(phase);
  const double scale = layer.n_max * model.drift_factor(t_s);

  // Same field as modulated_params + epstein_density, with the longitude and
  // latitude trigonometry folded into ratios of the Cartesian coordinates.
  auto density = [&](double s) {
    const double d = s_lo + s;
    const double x = r0.x_km + d * ux, y = r0.y_km + d * uy, z = r0.z_km + d * uz;
    const double rho2 = x * x + y * y;
    const double r = std::sqrt(rho2 + z * z);
    const double rho = std::sqrt(rho2);
    const double cos_lon = rho > 0.0 ? x / rho : 1.0;
    const double sin_lon = rho > 0.0 ? y / rho : 0.0;
    // cos(phase + lon): local time offset of lon/15 h is a phase shift of lon.
    const double diurnal = 1.0 + model.diurnal_amp * (cos_phase * cos_lon - sin_phase * sin_lon);
    const double latitudinal = 1.0 + model.equator_amp * rho2 / (r * r);
    const double h = r - kEarthRadiusKm;
    return scale * diurnal * latitudinal * sech2_half((h - layer.h_max) / layer.b_thick);
  };
  return std::max(0.0, integrate_segment_tecu(s_hi - s_lo, density, n_quad));
}

}  // namespace stec
