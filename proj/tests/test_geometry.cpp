#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stec/error.hpp"
#include "stec/geometry.hpp"

using namespace stec;

namespace {

EcefPos rotate_z(const EcefPos& p, double deg) {
  const double a = deg * M_PI / 180.0;
  return {p.x_km * std::cos(a) - p.y_km * std::sin(a), p.x_km * std::sin(a) + p.y_km * std::cos(a), p.z_km};
}

}  // namespace

TEST_CASE("geodetic_to_ecef on the axes") {
  auto e = geodetic_to_ecef(GeodeticPos(0, 0, 0));
  CHECK(e.x_km == doctest::Approx(6371.0));
  CHECK(std::abs(e.y_km) < 1e-9);
  CHECK(std::abs(e.z_km) < 1e-9);

  e = geodetic_to_ecef(GeodeticPos(90, 0, 0));
  CHECK(std::abs(e.x_km) < 1e-9);
  CHECK(e.z_km == doctest::Approx(6371.0));

  e = geodetic_to_ecef(GeodeticPos(0, 90, 0));
  CHECK(std::abs(e.x_km) < 1e-9);
  CHECK(e.y_km == doctest::Approx(6371.0));

  e = geodetic_to_ecef(GeodeticPos(12, -40, 350));
  CHECK(e.norm() == doctest::Approx(6721.0).epsilon(1e-14));
}

TEST_CASE("GeodeticPos validates and wraps") {
  CHECK_THROWS_AS(GeodeticPos(91, 0, 0), ValidationError);
  CHECK_THROWS_AS(GeodeticPos(0, 0, -1), ValidationError);
  CHECK(GeodeticPos(0, 180, 0).lon_deg() == -180.0);
  CHECK(GeodeticPos(0, 190, 0).lon_deg() == doctest::Approx(-170.0));
  CHECK(GeodeticPos(0, -540, 0).lon_deg() == -180.0);
}

TEST_CASE("ecef round trip over random positions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lat(-89.9, 89.9), lon(-180.0, 180.0), alt(0.0, 30000.0);
  for (int i = 0; i < 1000; ++i) {
    const GeodeticPos p(lat(rng), lon(rng), alt(rng));
    const GeodeticPos q = ecef_to_geodetic(geodetic_to_ecef(p));
    CHECK(std::abs(q.lat_deg() - p.lat_deg()) < 1e-9);
    double dlon = std::abs(q.lon_deg() - p.lon_deg());
    dlon = std::min(dlon, 360.0 - dlon);
    CHECK(dlon < 1e-9);
    CHECK(std::abs(q.alt_km() - p.alt_km()) < 1e-9);
  }
}

TEST_CASE("elevation at zenith and horizon") {
  const GeodeticPos rx(20, 30, 0);
  const EcefPos zenith = geodetic_to_ecef(GeodeticPos(20, 30, 20000));
  CHECK(elevation_azimuth(rx, zenith).elevation_deg == doctest::Approx(90.0));

  // Point one Earth radius due north in the local horizon plane.
  const EcefPos r = geodetic_to_ecef(rx);
  const double lat = 20 * M_PI / 180, lon = 30 * M_PI / 180;
  const double nx = -std::sin(lat) * std::cos(lon), ny = -std::sin(lat) * std::sin(lon), nz = std::cos(lat);
  const EcefPos horizon{r.x_km + 6371 * nx, r.y_km + 6371 * ny, r.z_km + 6371 * nz};
  const auto la = elevation_azimuth(rx, horizon);
  CHECK(std::abs(la.elevation_deg) < 1e-9);
  CHECK(la.azimuth_deg == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("elevation matches an independent vector oracle") {
  // numpy: arcsin((sat - rx) . up / |sat - rx|)
  const auto la = elevation_azimuth(GeodeticPos(0, 0, 0), geodetic_to_ecef(GeodeticPos(0, 10, 20200)));
  CHECK(la.elevation_deg == doctest::Approx(76.8800791861082).epsilon(1e-12));
  CHECK(la.azimuth_deg == doctest::Approx(90.0).epsilon(1e-12));
}

TEST_CASE("zero-length ray") {
  const GeodeticPos rx(10, 10, 0);
  CHECK_THROWS_WITH_AS(elevation_azimuth(rx, geodetic_to_ecef(rx)), "zero-length ray", ComputeError);
}

TEST_CASE("elevation is invariant under rotation about the axis") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-80, 80), lon(-180, 180), rot(-180, 180);
  for (int i = 0; i < 200; ++i) {
    const GeodeticPos rx(lat(rng), lon(rng), 0);
    const EcefPos sat = synth_orbit(i % 8, 1000.0 * i);
    const double a = rot(rng);
    const GeodeticPos rx2(rx.lat_deg(), rx.lon_deg() + a, 0);
    const auto l1 = elevation_azimuth(rx, sat);
    const auto l2 = elevation_azimuth(rx2, rotate_z(sat, a));
    CHECK(std::abs(l1.elevation_deg - l2.elevation_deg) < 1e-9);
  }
}

TEST_CASE("synth_orbit is circular, periodic and distinct") {
  for (int k = 0; k < 8; ++k) {
    for (double t : {0.0, 1234.5, 30000.0, 6.5e8}) {
      const EcefPos a = synth_orbit(k, t), b = synth_orbit(k, t + kOrbitPeriodS);
      CHECK(a.norm() == doctest::Approx(26560.0).epsilon(1e-12));
      CHECK(std::abs(a.x_km - b.x_km) < 1e-6);
      CHECK(std::abs(a.y_km - b.y_km) < 1e-6);
      CHECK(std::abs(a.z_km - b.z_km) < 1e-6);
    }
  }
  for (int k = 0; k < 32; ++k) {
    for (int j = k + 1; j < 32; ++j) {
      const EcefPos a = synth_orbit(k, 500.0), b = synth_orbit(j, 500.0);
      const double d = std::hypot(a.x_km - b.x_km, a.y_km - b.y_km, a.z_km - b.z_km);
      CHECK(d > 1.0);
    }
  }
}

TEST_CASE("make_ray cutoff rule") {
  const GeodeticPos rx(0, 0, 0);
  const auto zen = make_ray(rx, EcefPos{26560, 0, 0}, 15.0);
  REQUIRE(zen);
  CHECK(zen->elevation_deg == doctest::Approx(90.0));
  CHECK(zen->length_km == doctest::Approx(26560.0 - 6371.0));
  CHECK_FALSE(make_ray(rx, EcefPos{6371, 20000, 0}, 15.0));

  // A satellite placed at exactly 15 degrees; the cutoff is taken from the
  // computed value so the test checks the inclusive comparison itself.
  const double e = 15.0 * M_PI / 180.0;
  const EcefPos sat{6371 + 20000 * std::sin(e), 20000 * std::cos(e), 0};
  const double elev = elevation_azimuth(rx, sat).elevation_deg;
  CHECK(elev == doctest::Approx(15.0).epsilon(1e-12));
  CHECK(make_ray(rx, sat, elev));
}

TEST_CASE("make_ray acceptance is monotone in the cutoff") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lat(-60, 60), lon(-180, 180), t(0, 86400);
  for (int i = 0; i < 300; ++i) {
    const GeodeticPos rx(lat(rng), lon(rng), 0);
    const EcefPos sat = synth_orbit(i % 8, t(rng));
    bool accepted = false;
    for (double cut = 80; cut >= -10; cut -= 5) {
      const bool now = make_ray(rx, sat, cut).has_value();
      if (accepted) CHECK(now);
      accepted = accepted || now;
    }
  }
}
