#pragma once

#include <optional>
#include <utility>

namespace stec {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kOrbitRadiusKm = 26560.0;
inline constexpr double kOrbitInclinationDeg = 55.0;
inline constexpr double kOrbitPeriodS = 43082.0;

/// Receiver or sample position on the spherical Earth. Longitude is wrapped
/// into [-180, 180) on construction; latitude outside [-90, 90] or negative
/// altitude throws ValidationError.
class GeodeticPos {
 public:
  GeodeticPos() = default;
  GeodeticPos(double lat_deg, double lon_deg, double alt_km);

  double lat_deg() const { return lat_deg_; }
  double lon_deg() const { return lon_deg_; }
  double alt_km() const { return alt_km_; }

  friend bool operator==(const GeodeticPos&, const GeodeticPos&) = default;

 private:
  double lat_deg_ = 0.0;
  double lon_deg_ = 0.0;
  double alt_km_ = 0.0;
};

struct EcefPos {
  double x_km = 0.0;
  double y_km = 0.0;
  double z_km = 0.0;

  double norm() const;
  friend bool operator==(const EcefPos&, const EcefPos&) = default;
};

struct LookAngles {
  double elevation_deg = 0.0;
  double azimuth_deg = 0.0;  // clockwise from north, [0, 360)
};

struct Ray {
  GeodeticPos receiver;
  EcefPos satellite;
  double elevation_deg = 0.0;
  double azimuth_deg = 0.0;
  double length_km = 0.0;
};

double wrap_longitude_deg(double lon_deg);

EcefPos geodetic_to_ecef(const GeodeticPos& p);

// Inverse of geodetic_to_ecef. Positions inside the sphere are clamped to
// zero altitude since GeodeticPos cannot represent them.
GeodeticPos ecef_to_geodetic(const EcefPos& p);

// Throws ComputeError("zero-length ray") when sat coincides with rx.
LookAngles elevation_azimuth(const GeodeticPos& rx, const EcefPos& sat);

// Circular orbit in the Earth-fixed frame. Satellites are spread over six
// planes 60 degrees apart in node, with in-plane slots 90 degrees apart
// and a 30 degree phase stagger between neighbouring planes. Each further
// group of 24 satellites is shifted by 11.25 degrees in phase.
EcefPos synth_orbit(int sat_index, double t_s);

// Accepts iff elevation >= cutoff_deg (inclusive).
std::optional<Ray> make_ray(const GeodeticPos& rx, const EcefPos& sat, double cutoff_deg);

}  // namespace stec
