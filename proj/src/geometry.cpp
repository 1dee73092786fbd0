#include "stec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "stec/error.hpp"

namespace stec {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Vec3 {
  double x, y, z;
};

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

}  // namespace

double wrap_longitude_deg(double lon_deg) {
  double w = std::fmod(lon_deg + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  w -= 180.0;
  // fmod can land exactly on 180 after the shift for inputs like -180 - 1e-17.
  if (w >= 180.0) w -= 360.0;
  return w;
}

GeodeticPos::GeodeticPos(double lat_deg, double lon_deg, double alt_km)
    : lat_deg_(lat_deg), lon_deg_(wrap_longitude_deg(lon_deg)), alt_km_(alt_km) {
  if (!std::isfinite(lat_deg) || lat_deg < -90.0 || lat_deg > 90.0) {
    throw ValidationError("latitude out of range: " + std::to_string(lat_deg));
  }
  if (!std::isfinite(lon_deg)) throw ValidationError("longitude not finite");
  if (!std::isfinite(alt_km) || alt_km < 0.0) {
    throw ValidationError("altitude out of range: " + std::to_string(alt_km));
  }
}

double EcefPos::norm() const { return std::sqrt(x_km * x_km + y_km * y_km + z_km * z_km); }

EcefPos geodetic_to_ecef(const GeodeticPos& p) {
  const double r = kEarthRadiusKm + p.alt_km();
  const double lat = p.lat_deg() * kDeg;
  const double lon = p.lon_deg() * kDeg;
  return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat)};
}

GeodeticPos ecef_to_geodetic(const EcefPos& p) {
  const double r = p.norm();
  if (r == 0.0) throw ValidationError("cannot convert the Earth's centre to geodetic");
  const double lat = std::asin(std::clamp(p.z_km / r, -1.0, 1.0)) / kDeg;
  const double lon = std::atan2(p.y_km, p.x_km) / kDeg;
  return GeodeticPos(lat, lon, std::max(0.0, r - kEarthRadiusKm));
}

LookAngles elevation_azimuth(const GeodeticPos& rx, const EcefPos& sat) {
  const EcefPos r0 = geodetic_to_ecef(rx);
  const Vec3 d{sat.x_km - r0.x_km, sat.y_km - r0.y_km, sat.z_km - r0.z_km};
  const double len = std::sqrt(dot(d, d));
  if (len == 0.0) throw ComputeError("zero-length ray");

  const double lat = rx.lat_deg() * kDeg;
  const double lon = rx.lon_deg() * kDeg;
  const Vec3 up{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
  const Vec3 east{-std::sin(lon), std::cos(lon), 0.0};
  const Vec3 north{-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat)};

  LookAngles out;
  out.elevation_deg = std::asin(std::clamp(dot(d, up) / len, -1.0, 1.0)) / kDeg;
  double az = std::atan2(dot(d, east), dot(d, north)) / kDeg;
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az -= 360.0;
  out.azimuth_deg = az;
  return out;
}

EcefPos synth_orbit(int sat_index, double t_s) {
  if (sat_index < 0) throw ValidationError("negative satellite index");
  const int plane = sat_index % 6;
  const int slot = sat_index / 6;
  const double node = 60.0 * plane * kDeg;
  const double phase = (90.0 * (slot % 4) + 11.25 * (slot / 4) + 30.0 * plane) * kDeg;
  double tau = std::fmod(t_s, kOrbitPeriodS);
  if (tau < 0.0) tau += kOrbitPeriodS;
  const double u = phase + 2.0 * std::numbers::pi * tau / kOrbitPeriodS;
  const double inc = kOrbitInclinationDeg * kDeg;

  const double cu = std::cos(u), su = std::sin(u);
  const double cn = std::cos(node), sn = std::sin(node);
  const double ci = std::cos(inc), si = std::sin(inc);
  return {kOrbitRadiusKm * (cn * cu - sn * su * ci), kOrbitRadiusKm * (sn * cu + cn * su * ci),
          kOrbitRadiusKm * su * si};
}

std::optional<Ray> make_ray(const GeodeticPos& rx, const EcefPos& sat, double cutoff_deg) {
  const LookAngles look = elevation_azimuth(rx, sat);
  if (!(look.elevation_deg >= cutoff_deg)) return std::nullopt;
  const EcefPos r0 = geodetic_to_ecef(rx);
  const double dx = sat.x_km - r0.x_km, dy = sat.y_km - r0.y_km, dz = sat.z_km - r0.z_km;
  return Ray{rx, sat, look.elevation_deg, look.azimuth_deg, std::sqrt(dx * dx + dy * dy + dz * dz)};
}

}  // namespace stec
