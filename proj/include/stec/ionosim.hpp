#pragma once

#include <functional>

#include "stec/geometry.hpp"

namespace stec {

inline constexpr double kTecu = 1e16;  // electrons per square metre

struct EpsteinParams {
  double n_max = 1e12;    // el/m^3
  double h_max = 350.0;   // km
  double b_thick = 50.0;  // km

  void validate() const;
};

/// Epstein layer with a diurnal cosine and a cos^2(latitude) enhancement of
/// the peak density. The optional linear drift ramps the peak density by
/// `drift_amp` between `drift_start_s` and `drift_end_s` (epoch seconds) and
/// is how the storm-surrogate datasets are produced.
struct IonosphereModel {
  EpsteinParams base;
  double diurnal_amp = 0.0;
  double equator_amp = 0.0;
  double local_noon_sod = 50400.0;
  double drift_amp = 0.0;
  double drift_start_s = 0.0;
  double drift_end_s = 0.0;

  void validate() const;
  double drift_factor(double t_s) const;
};

// 4 n_max e^x / (1 + e^x)^2 with x = (h - h_max) / B, evaluated as
// n_max sech^2(x / 2) via exp(-|x|) so that no intermediate overflows.
double epstein_density(double h_km, const EpsteinParams& p);

// Peak parameters at (lat, lon) and epoch time t. Local solar time is
// sod + lon / 15 hours.
EpsteinParams modulated_params(double lat_deg, double lon_deg, double t_s,
                               const IonosphereModel& model);

// Composite Simpson over [0, length_km] with n_quad (even, >= 8) intervals.
// `density` maps arc length in km to el/m^3; the result is in TECU.
double integrate_segment_tecu(double length_km, const std::function<double(double)>& density,
                              int n_quad);

// STEC along the straight receiver-to-satellite segment. The segment is first
// clipped to altitudes within h_max +/- 40 B (outside that band the Epstein
// density is below 1e-17 of its peak), so the quadrature nodes land on the
// layer rather than on empty space out to 20000 km.
double stec_along_ray(const Ray& ray, double t_s, const IonosphereModel& model, int n_quad = 256);

}  // namespace stec
