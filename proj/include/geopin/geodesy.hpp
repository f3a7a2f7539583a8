#pragma once

#include <array>

namespace geopin {

/// WGS84 latitude/longitude in degrees. Longitude is kept in [-180, 180).
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  /// Validates latitude and normalizes longitude; throws InvalidArgument on
  /// non-finite input or |lat| > 90.
  static GeoPoint from_degrees(double lat, double lon);

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Degrees clockwise from true north, kept in [0, 360).
struct Bearing {
  double deg = 0.0;

  static Bearing from_degrees(double deg);

  friend bool operator==(const Bearing&, const Bearing&) = default;
};

/// UTM zone 33 north (central meridian 15°E).
struct UtmCoord {
  double easting = 0.0;
  double northing = 0.0;
  static constexpr int kZone = 33;
};

struct EarthModel {
  double sphere_radius_m = 6371000.0;
  double ellipsoid_a = 6378137.0;
  double ellipsoid_f = 1.0 / 298.257223563;

  static EarthModel wgs84() { return {}; }
  /// Throws InvalidArgument unless radius > 0 and 0 < f < 1.
  void validate() const;
};

/// Wraps into [-180, 180). Values already in range are returned unchanged, and
/// +180 maps to -180.
double normalize_lon(double lon);
/// Wraps into [0, 360).
double normalize_bearing(double deg);

double haversine_distance(const GeoPoint& a, const GeoPoint& b,
                          const EarthModel& earth = {});

/// Throws CoincidentPoints or PoleDegenerate.
Bearing initial_bearing(const GeoPoint& a, const GeoPoint& b);

/// Destination on the sphere at `distance_m` along `bearing` from `origin`.
/// Negative distances are InvalidArgument; distances beyond half the
/// circumference are DistanceOutOfRange.
GeoPoint inverse_haversine(const GeoPoint& origin, double distance_m,
                           Bearing bearing, const EarthModel& earth = {});

/// Linear pixel-column heading model:
///   (fov / width) * (px - width / 2) + psi_camera + theta_car
/// psi_camera is the camera azimuth relative to vehicle forward, clockwise.
/// Throws InvalidPixel for px outside [0, width].
Bearing linear_fov_heading(double fov_deg, double image_width, double px,
                    double psi_camera_deg, double theta_car_deg);

/// Heading of a rig-frame ray (x forward, y left, z up) relative to north,
/// given the vehicle heading. Throws VerticalRay.
Bearing ray_azimuth_heading(const std::array<double, 3>& ray_rig,
                            double theta_car_deg);

/// Transverse Mercator (k0 = 0.9996, false easting 500 km) on the WGS84
/// ellipsoid, 6th-order Krüger series. Domain: lat in [0, 84), lon in
/// [3, 27]; anything else is OutOfProjectionDomain.
UtmCoord wgs84_to_utm33(const GeoPoint& p);
GeoPoint utm33_to_wgs84(const UtmCoord& c);

struct GeodesicDistance {
  double meters = 0.0;
  /// Set when the ellipsoidal iteration did not converge (near-antipodal
  /// pairs) and the spherical distance was substituted.
  bool fallback = false;
};

/// Ellipsoidal inverse-problem distance (Vincenty) on the model ellipsoid.
GeodesicDistance geodesic_error(const GeoPoint& a, const GeoPoint& b,
                                const EarthModel& earth = {});

}  // namespace geopin
