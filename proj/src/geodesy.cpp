#include "geopin/geodesy.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "geopin/error.hpp"

namespace geopin {

namespace {

using real = long double;

constexpr real kPi = std::numbers::pi_v<long double>;
constexpr real kDegToRad = kPi / 180.0L;
constexpr real kRadToDeg = 180.0L / kPi;

constexpr double kUtmK0 = 0.9996;
constexpr double kUtmFalseEasting = 500000.0;
constexpr double kUtmCentralMeridian = 15.0;

real rad(double deg) { return static_cast<real>(deg) * kDegToRad; }

real wrap_delta_lon_rad(real dlon_deg) {
  // Difference of two normalized longitudes lies in (-360, 360).
  if (dlon_deg >= 180.0L) dlon_deg -= 360.0L;
  if (dlon_deg < -180.0L) dlon_deg += 360.0L;
  return dlon_deg * kDegToRad;
}

real sq(real x) { return x * x; }

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be finite");
  }
}

bool in_utm_domain(double lat, double lon) {
  return lat >= 0.0 && lat < 84.0 && lon >= kUtmCentralMeridian - 12.0 &&
         lon <= kUtmCentralMeridian + 12.0;
}

// Krüger series coefficients for third flattening n, to order n^6.
struct KruegerSeries {
  real e;       // first eccentricity
  real radius;  // rectifying radius A
  std::array<real, 6> alpha;
  std::array<real, 6> beta;
};

KruegerSeries krueger_wgs84() {
  const real f = 1.0L / 298.257223563L;
  const real a = 6378137.0L;
  const real n = f / (2.0L - f);
  const real n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
  KruegerSeries s{};
  s.e = std::sqrt(f * (2.0L - f));
  s.radius = a / (1.0L + n) * (1.0L + n2 / 4.0L + n4 / 64.0L + n6 / 256.0L);
  s.alpha = {
      n / 2 - 2 * n2 / 3 + 5 * n3 / 16 + 41 * n4 / 180 - 127 * n5 / 288 +
          7891 * n6 / 37800,
      13 * n2 / 48 - 3 * n3 / 5 + 557 * n4 / 1440 + 281 * n5 / 630 -
          1983433 * n6 / 1935360,
      61 * n3 / 240 - 103 * n4 / 140 + 15061 * n5 / 26880 +
          167603 * n6 / 181440,
      49561 * n4 / 161280 - 179 * n5 / 168 + 6601661 * n6 / 7257600,
      34729 * n5 / 80640 - 3418889 * n6 / 1995840,
      212378941 * n6 / 319334400,
  };
  s.beta = {
      n / 2 - 2 * n2 / 3 + 37 * n3 / 96 - n4 / 360 - 81 * n5 / 512 +
          96199 * n6 / 604800,
      n2 / 48 + n3 / 15 - 437 * n4 / 1440 + 46 * n5 / 105 -
          1118711 * n6 / 3870720,
      17 * n3 / 480 - 37 * n4 / 840 - 209 * n5 / 4480 + 5569 * n6 / 90720,
      4397 * n4 / 161280 - 11 * n5 / 504 - 830251 * n6 / 7257600,
      4583 * n5 / 161280 - 108847 * n6 / 3991680,
      20648693 * n6 / 638668800,
  };
  return s;
}

const KruegerSeries& krueger() {
  static const KruegerSeries series = krueger_wgs84();
  return series;
}

// tan(conformal latitude) from tan(geodetic latitude).
real conformal_tan(real tau, real e) {
  const real sigma = std::sinh(e * std::atanh(e * tau / std::sqrt(1 + tau * tau)));
  return tau * std::sqrt(1 + sigma * sigma) - sigma * std::sqrt(1 + tau * tau);
}

}  // namespace

GeoPoint GeoPoint::from_degrees(double lat, double lon) {
  require_finite(lat, "latitude");
  require_finite(lon, "longitude");
  if (lat < -90.0 || lat > 90.0) {
    throw Error(ErrorCode::InvalidArgument,
                "latitude " + std::to_string(lat) + " outside [-90, 90]");
  }
  return GeoPoint{lat, normalize_lon(lon)};
}

Bearing Bearing::from_degrees(double deg) {
  require_finite(deg, "bearing");
  return Bearing{normalize_bearing(deg)};
}

void EarthModel::validate() const {
  if (!(sphere_radius_m > 0.0) || !std::isfinite(sphere_radius_m)) {
    throw Error(ErrorCode::InvalidArgument, "earth radius must be positive");
  }
  if (!(ellipsoid_a > 0.0) || !(ellipsoid_f > 0.0 && ellipsoid_f < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "ellipsoid requires a > 0 and 0 < f < 1");
  }
}

double normalize_lon(double lon) {
  if (lon >= -180.0 && lon < 180.0) return lon;
  double r = std::fmod(lon + 180.0, 360.0);
  if (r < 0.0) r += 360.0;
  r -= 180.0;
  if (r >= 180.0) r -= 360.0;
  return r;
}

double normalize_bearing(double deg) {
  if (deg >= 0.0 && deg < 360.0) return deg;
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;
  return r;
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b,
                          const EarthModel& earth) {
  const real phi1 = rad(a.lat);
  const real phi2 = rad(b.lat);
  const real dphi = (static_cast<real>(b.lat) - a.lat) * kDegToRad;
  const real dlam = wrap_delta_lon_rad(static_cast<real>(b.lon) - a.lon);
  real h = sq(std::sin(dphi / 2)) + std::cos(phi1) * std::cos(phi2) * sq(std::sin(dlam / 2));
  if (h > 1) h = 1;
  const real central = 2 * std::atan2(std::sqrt(h), std::sqrt(1 - h));
  return static_cast<double>(central * earth.sphere_radius_m);
}

Bearing initial_bearing(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kPoleEps = 1e-9;
  if (std::fabs(a.lat) > 90.0 - kPoleEps || std::fabs(b.lat) > 90.0 - kPoleEps) {
    throw Error(ErrorCode::PoleDegenerate, "bearing undefined at a pole");
  }
  if (haversine_distance(a, b) < 1e-9) {
    throw Error(ErrorCode::CoincidentPoints, "bearing undefined for coincident points");
  }
  const real phi1 = rad(a.lat);
  const real phi2 = rad(b.lat);
  const real dphi = (static_cast<real>(b.lat) - a.lat) * kDegToRad;
  const real dlam = wrap_delta_lon_rad(static_cast<real>(b.lon) - a.lon);
  // cos(phi1) sin(phi2) - sin(phi1) cos(phi2) cos(dlam), rewritten without
  // cancellation for short separations.
  const real y = std::sin(dlam) * std::cos(phi2);
  const real x = std::sin(dphi) + 2 * std::sin(phi1) * std::cos(phi2) * sq(std::sin(dlam / 2));
  return Bearing{normalize_bearing(static_cast<double>(std::atan2(y, x) * kRadToDeg))};
}

GeoPoint inverse_haversine(const GeoPoint& origin, double distance_m,
                           Bearing bearing, const EarthModel& earth) {
  if (!(distance_m >= 0.0) || !std::isfinite(distance_m)) {
    throw Error(ErrorCode::InvalidArgument, "distance must be finite and >= 0");
  }
  const real radius = earth.sphere_radius_m;
  if (distance_m > kPi * radius) {
    throw Error(ErrorCode::DistanceOutOfRange,
                "distance " + std::to_string(distance_m) + " m exceeds half circumference");
  }
  if (distance_m == 0.0) return origin;

  const real delta = distance_m / radius;
  const real phi1 = rad(origin.lat);
  const real theta = rad(bearing.deg);
  real sin_phi2 = std::sin(phi1) * std::cos(delta) +
                  std::cos(phi1) * std::sin(delta) * std::cos(theta);
  if (sin_phi2 > 1) sin_phi2 = 1;
  if (sin_phi2 < -1) sin_phi2 = -1;
  const real phi2 = std::asin(sin_phi2);
  const real dlam = std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                               std::cos(delta) - std::sin(phi1) * sin_phi2);
  const double lat2 = static_cast<double>(phi2 * kRadToDeg);
  const double lon2 = static_cast<double>(origin.lon + dlam * kRadToDeg);
  return GeoPoint{lat2, normalize_lon(lon2)};
}

Bearing linear_fov_heading(double fov_deg, double image_width, double px,
                    double psi_camera_deg, double theta_car_deg) {
  if (!(image_width > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "image width must be positive");
  }
  if (!(fov_deg > 0.0 && fov_deg < 360.0)) {
    throw Error(ErrorCode::InvalidArgument, "fov must lie in (0, 360)");
  }
  if (!(px >= 0.0 && px <= image_width)) {
    throw Error(ErrorCode::InvalidPixel,
                "pixel column " + std::to_string(px) + " outside [0, width]");
  }
  const double relative = (fov_deg / image_width) * (px - image_width / 2.0);
  return Bearing{normalize_bearing(relative + psi_camera_deg + theta_car_deg)};
}

Bearing ray_azimuth_heading(const std::array<double, 3>& ray_rig,
                            double theta_car_deg) {
  const double horizontal = std::hypot(ray_rig[0], ray_rig[1]);
  if (horizontal < 1e-12) {
    throw Error(ErrorCode::VerticalRay, "ray has no horizontal component");
  }
  // Rig y points left, so clockwise-positive azimuth is atan2(-y, x).
  const double relative =
      static_cast<double>(std::atan2(static_cast<real>(-ray_rig[1]), static_cast<real>(ray_rig[0])) *
                          kRadToDeg);
  return Bearing{normalize_bearing(relative + theta_car_deg)};
}

UtmCoord wgs84_to_utm33(const GeoPoint& p) {
  if (!in_utm_domain(p.lat, p.lon)) {
    throw Error(ErrorCode::OutOfProjectionDomain,
                "(" + std::to_string(p.lat) + ", " + std::to_string(p.lon) +
                    ") outside UTM33 domain lat [0, 84), lon [3, 27]");
  }
  const auto& s = krueger();
  const real lam = (static_cast<real>(p.lon) - kUtmCentralMeridian) * kDegToRad;
  const real tau = std::tan(rad(p.lat));
  const real tau_c = conformal_tan(tau, s.e);
  const real xi_p = std::atan2(tau_c, std::cos(lam));
  const real eta_p = std::asinh(std::sin(lam) / std::sqrt(tau_c * tau_c + sq(std::cos(lam))));
  real xi = xi_p;
  real eta = eta_p;
  for (int j = 1; j <= 6; ++j) {
    xi += s.alpha[j - 1] * std::sin(2 * j * xi_p) * std::cosh(2 * j * eta_p);
    eta += s.alpha[j - 1] * std::cos(2 * j * xi_p) * std::sinh(2 * j * eta_p);
  }
  return UtmCoord{static_cast<double>(kUtmFalseEasting + kUtmK0 * s.radius * eta),
                  static_cast<double>(kUtmK0 * s.radius * xi)};
}

GeoPoint utm33_to_wgs84(const UtmCoord& c) {
  if (!std::isfinite(c.easting) || !std::isfinite(c.northing) || c.northing < 0.0) {
    throw Error(ErrorCode::OutOfProjectionDomain, "UTM33 coordinate not finite or south of equator");
  }
  const auto& s = krueger();
  const real xi = c.northing / (kUtmK0 * s.radius);
  const real eta = (c.easting - kUtmFalseEasting) / (kUtmK0 * s.radius);
  real xi_p = xi;
  real eta_p = eta;
  for (int j = 1; j <= 6; ++j) {
    xi_p -= s.beta[j - 1] * std::sin(2 * j * xi) * std::cosh(2 * j * eta);
    eta_p -= s.beta[j - 1] * std::cos(2 * j * xi) * std::sinh(2 * j * eta);
  }
  const real tau_c = std::sin(xi_p) / std::sqrt(sq(std::sinh(eta_p)) + sq(std::cos(xi_p)));
  const real lam = std::atan2(std::sinh(eta_p), std::cos(xi_p));

  // Newton on tau_c = conformal_tan(tau).
  const real e2 = s.e * s.e;
  real tau = tau_c;
  for (int i = 0; i < 20; ++i) {
    const real tau_i = conformal_tan(tau, s.e);
    const real step = (tau_c - tau_i) / std::sqrt(1 + tau_i * tau_i) *
                      (1 + (1 - e2) * tau * tau) / ((1 - e2) * std::sqrt(1 + tau * tau));
    tau += step;
    if (std::fabs(step) <= 1e-18L * std::fmax(1.0L, std::fabs(tau))) break;
  }
  const double lat = static_cast<double>(std::atan(tau) * kRadToDeg);
  const double lon = static_cast<double>(kUtmCentralMeridian + lam * kRadToDeg);
  if (!in_utm_domain(lat, lon)) {
    throw Error(ErrorCode::OutOfProjectionDomain,
                "UTM33 (" + std::to_string(c.easting) + ", " + std::to_string(c.northing) +
                    ") maps outside the projection domain");
  }
  return GeoPoint{lat, lon};
}

GeodesicDistance geodesic_error(const GeoPoint& a, const GeoPoint& b,
                                const EarthModel& earth) {
  if (a == b) return {0.0, false};
  const real major = earth.ellipsoid_a;
  const real f = earth.ellipsoid_f;
  const real minor = major * (1 - f);

  const real u1 = std::atan((1 - f) * std::tan(rad(a.lat)));
  const real u2 = std::atan((1 - f) * std::tan(rad(b.lat)));
  const real sin_u1 = std::sin(u1), cos_u1 = std::cos(u1);
  const real sin_u2 = std::sin(u2), cos_u2 = std::cos(u2);
  const real big_l = wrap_delta_lon_rad(static_cast<real>(b.lon) - a.lon);

  real lambda = big_l;
  real sin_sigma = 0, cos_sigma = 0, sigma = 0, cos2_alpha = 0, cos_2sigma_m = 0;
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    const real sin_lambda = std::sin(lambda);
    const real cos_lambda = std::cos(lambda);
    sin_sigma = std::sqrt(sq(cos_u2 * sin_lambda) +
                          sq(cos_u1 * sin_u2 - sin_u1 * cos_u2 * cos_lambda));
    if (sin_sigma == 0) return {0.0, false};
    cos_sigma = sin_u1 * sin_u2 + cos_u1 * cos_u2 * cos_lambda;
    sigma = std::atan2(sin_sigma, cos_sigma);
    const real sin_alpha = cos_u1 * cos_u2 * sin_lambda / sin_sigma;
    cos2_alpha = 1 - sin_alpha * sin_alpha;
    // Equatorial line: cos2_alpha == 0.
    cos_2sigma_m = cos2_alpha != 0 ? cos_sigma - 2 * sin_u1 * sin_u2 / cos2_alpha : 0;
    const real c = f / 16 * cos2_alpha * (4 + f * (4 - 3 * cos2_alpha));
    const real previous = lambda;
    lambda = big_l + (1 - c) * f * sin_alpha *
                         (sigma + c * sin_sigma *
                                      (cos_2sigma_m + c * cos_sigma * (-1 + 2 * sq(cos_2sigma_m))));
    if (std::fabs(lambda - previous) < 1e-13L) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    return {haversine_distance(a, b, earth), true};
  }
  const real u_sq = cos2_alpha * (sq(major) - sq(minor)) / sq(minor);
  const real big_a = 1 + u_sq / 16384 * (4096 + u_sq * (-768 + u_sq * (320 - 175 * u_sq)));
  const real big_b = u_sq / 1024 * (256 + u_sq * (-128 + u_sq * (74 - 47 * u_sq)));
  const real delta_sigma =
      big_b * sin_sigma *
      (cos_2sigma_m + big_b / 4 *
                          (cos_sigma * (-1 + 2 * sq(cos_2sigma_m)) -
                           big_b / 6 * cos_2sigma_m * (-3 + 4 * sq(sin_sigma)) *
                               (-3 + 4 * sq(cos_2sigma_m))));
  return {static_cast<double>(minor * big_a * (sigma - delta_sigma)), false};
}

}  // namespace geopin
