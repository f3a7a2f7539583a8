#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "geopin/error.hpp"
#include "geopin/geodesy.hpp"
#include "support.hpp"

using namespace geopin;
using testing::error_code_of;

namespace {

GeoPoint gp(double lat, double lon) { return GeoPoint::from_degrees(lat, lon); }

double bearing_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

constexpr double kR = 6371000.0;

}  // namespace

TEST_CASE("GeoPoint validation and longitude normalization") {
  CHECK(gp(10, 190).lon == doctest::Approx(-170));
  CHECK(gp(10, 180).lon == -180.0);
  CHECK(gp(10, -180).lon == -180.0);
  CHECK(gp(10, 540).lon == -180.0);
  CHECK(gp(10, -190).lon == doctest::Approx(170));
  CHECK(normalize_lon(10.4065) == 10.4065);
  CHECK(error_code_of([] { gp(91, 0); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { gp(NAN, 0); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { gp(0, INFINITY); }) == ErrorCode::InvalidArgument);
  CHECK(Bearing::from_degrees(-10).deg == doctest::Approx(350));
  CHECK(Bearing::from_degrees(360).deg == 0.0);
  CHECK(normalize_bearing(-1e-20) < 360.0);
}

TEST_CASE("EarthModel validation") {
  EarthModel e;
  CHECK_NOTHROW(e.validate());
  e.sphere_radius_m = 0;
  CHECK(error_code_of([&] { e.validate(); }) == ErrorCode::InvalidArgument);
  e = {};
  e.ellipsoid_f = 1.0;
  CHECK(error_code_of([&] { e.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("haversine_distance examples") {
  CHECK(haversine_distance(gp(63.4, 10.4), gp(63.4, 10.4)) == 0.0);
  CHECK(haversine_distance(gp(0, 0), gp(0, 1)) == doctest::Approx(111194.92664455874).epsilon(1e-12));

  // Small displacement against the flat-earth approximation.
  const auto a = gp(63.4195, 10.4065);
  const auto b = gp(63.419595, 10.406713);
  const double rad = std::numbers::pi / 180.0;
  const double dn = (b.lat - a.lat) * rad * kR;
  const double de = (b.lon - a.lon) * rad * kR * std::cos(a.lat * rad);
  const double flat = std::hypot(dn, de);
  const double d = haversine_distance(a, b);
  CHECK(d == doctest::Approx(flat).epsilon(1e-5));
  CHECK(d == doctest::Approx(14.963).epsilon(1e-3));
  CHECK(haversine_distance(b, a) == d);

  EarthModel small;
  small.sphere_radius_m = 1000.0;
  CHECK(haversine_distance(gp(0, 0), gp(0, 90), small) == doctest::Approx(1000.0 * std::numbers::pi / 2));
}

TEST_CASE("initial_bearing examples and errors") {
  CHECK(initial_bearing(gp(0, 0), gp(1, 0)).deg == doctest::Approx(0.0));
  CHECK(initial_bearing(gp(0, 0), gp(0, 1)).deg == doctest::Approx(90.0));
  CHECK(initial_bearing(gp(0, 0), gp(-1, 0)).deg == doctest::Approx(180.0));
  CHECK(initial_bearing(gp(0, 0), gp(0, -1)).deg == doctest::Approx(270.0));

  const auto origin = gp(63.4195, 10.4065);
  const auto dest = inverse_haversine(origin, 15.0, Bearing::from_degrees(45));
  CHECK(bearing_diff(initial_bearing(origin, dest).deg, 45.0) < 1e-6);

  CHECK(error_code_of([] { initial_bearing(gp(10, 10), gp(10, 10)); }) ==
        ErrorCode::CoincidentPoints);
  CHECK(error_code_of([] { initial_bearing(gp(90, 0), gp(10, 10)); }) ==
        ErrorCode::PoleDegenerate);
  CHECK(error_code_of([] { initial_bearing(gp(10, 0), gp(-90, 10)); }) ==
        ErrorCode::PoleDegenerate);
}

TEST_CASE("inverse_haversine examples") {
  const auto origin = gp(63.4195, 10.4065);
  for (double b : {0.0, 45.0, 123.0, 359.0}) {
    CHECK(inverse_haversine(origin, 0.0, Bearing::from_degrees(b)) == origin);
  }

  const auto north = inverse_haversine(gp(0, 0), 111194.92664455874, Bearing::from_degrees(0));
  CHECK(north.lat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(north.lon == 0.0);

  const auto p = inverse_haversine(origin, 15.0, Bearing::from_degrees(45));
  CHECK(haversine_distance(origin, p) == doctest::Approx(15.0).epsilon(1e-6));
  CHECK(bearing_diff(initial_bearing(origin, p).deg, 45.0) < 1e-6);
  // Flat-earth expectation for the 45° step.
  const double rad = std::numbers::pi / 180.0;
  const double step = 15.0 / std::sqrt(2.0);
  CHECK(std::abs(p.lat - (origin.lat + step / kR / rad)) < 1e-6);
  CHECK(std::abs(p.lon - (origin.lon + step / (kR * std::cos(origin.lat * rad)) / rad)) < 1e-6);

  CHECK(error_code_of([&] { inverse_haversine(origin, -1.0, Bearing{}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { inverse_haversine(origin, std::numbers::pi * kR * 1.0001, Bearing{}); }) ==
        ErrorCode::DistanceOutOfRange);
  CHECK(error_code_of([&] { inverse_haversine(origin, NAN, Bearing{}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("inverse_haversine respects the earth radius") {
  EarthModel e;
  e.sphere_radius_m = 6378137.0;
  const auto p = inverse_haversine(gp(0, 0), 1000.0, Bearing::from_degrees(0), e);
  CHECK(p.lat == doctest::Approx(1000.0 / 6378137.0 * 180.0 / std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("property: round-trip closure") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lat(-85, 85), lon(-180, 180), brg(0, 360);
  std::uniform_real_distribution<double> logd(std::log(0.1), std::log(1e6));
  for (int i = 0; i < 20000; ++i) {
    const auto o = gp(lat(rng), lon(rng));
    const double d = std::exp(logd(rng));
    const double b = brg(rng);
    const auto p = inverse_haversine(o, d, Bearing::from_degrees(b));
    const double back = haversine_distance(o, p);
    // Below ~1 m the destination's double-precision degrees limit closure to
    // about half a ulp of latitude (~1e-9 m).
    REQUIRE(std::abs(back - d) <= std::max(1e-9 * d, 2e-9));
    if (d >= 10.0) REQUIRE(std::abs(back - d) / d < 1e-9);
    REQUIRE(bearing_diff(initial_bearing(o, p).deg, b) < 1e-6);
    REQUIRE(p.lon >= -180.0);
    REQUIRE(p.lon < 180.0);
  }
}

TEST_CASE("property: due-north meridian invariance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-80, 80), lon(-180, 180), dist(0, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const auto o = gp(lat(rng), lon(rng));
    const auto p = inverse_haversine(o, dist(rng), Bearing::from_degrees(0));
    REQUIRE(p.lon == o.lon);
  }
}

TEST_CASE("property: dateline crossings stay normalized") {
  const auto p = inverse_haversine(gp(10, 179.9999), 1000.0, Bearing::from_degrees(90));
  CHECK(p.lon < -179.99);
  CHECK(p.lon >= -180.0);
  const auto q = inverse_haversine(gp(-10, -179.9999), 1000.0, Bearing::from_degrees(270));
  CHECK(q.lon > 179.99);
  CHECK(q.lon < 180.0);
}

TEST_CASE("linear_fov_heading examples") {
  CHECK(linear_fov_heading(120, 1920, 960, 0, 0).deg == doctest::Approx(0.0));
  CHECK(linear_fov_heading(120, 1920, 1920, 0, 10).deg == doctest::Approx(70.0));
  CHECK(linear_fov_heading(120, 1920, 0, -5, 350).deg == doctest::Approx(285.0));
  CHECK(error_code_of([] { linear_fov_heading(120, 1920, -0.5, 0, 0); }) == ErrorCode::InvalidPixel);
  CHECK(error_code_of([] { linear_fov_heading(120, 1920, 1920.5, 0, 0); }) == ErrorCode::InvalidPixel);
  CHECK(error_code_of([] { linear_fov_heading(0, 1920, 10, 0, 0); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { linear_fov_heading(120, 0, 0, 0, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("property: linear_fov_heading is affine in px") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> px(0, 1920), ang(0, 360);
  for (int i = 0; i < 1000; ++i) {
    const double a = px(rng), b = px(rng), psi = ang(rng) - 180, th = ang(rng);
    const double ha = linear_fov_heading(120, 1920, a, psi, th).deg;
    const double hb = linear_fov_heading(120, 1920, b, psi, th).deg;
    REQUIRE(bearing_diff(ha - hb, 120.0 / 1920.0 * (a - b)) < 1e-9);
  }
}

TEST_CASE("ray_azimuth_heading examples") {
  const double s = 1.0 / std::sqrt(2.0);
  const double n = std::hypot(1.0, 0.2);
  CHECK(ray_azimuth_heading({1 / n, 0, -0.2 / n}, 0).deg == doctest::Approx(0.0));
  CHECK(ray_azimuth_heading({s, -s, 0}, 0).deg == doctest::Approx(45.0));
  CHECK(ray_azimuth_heading({s, s, 0}, 90).deg == doctest::Approx(45.0));
  CHECK(ray_azimuth_heading({0, 1, 0}, 0).deg == doctest::Approx(270.0));
  CHECK(error_code_of([] { ray_azimuth_heading({0, 0, -1}, 0); }) == ErrorCode::VerticalRay);
}

TEST_CASE("UTM33 golden fixtures") {
  const auto eq = wgs84_to_utm33(gp(0, 15));
  CHECK(std::abs(eq.easting - 500000.0) < 1e-4);
  CHECK(std::abs(eq.northing) < 1e-4);

  struct Golden {
    double lat, lon, e, n;
  };
  // Independent projection library, EPSG:32633.
  const Golden cases[] = {
      {63.4195, 10.4065, 270819.9404115055, 7040552.129931319},
      {70.0, 25.0, 880225.321549952, 7797150.989904179},
      {59.9139, 10.7522, 262560.4821841905, 6649443.584095771},
      {69.6492, 18.9553, 653421.187632735, 7731721.083012392},
  };
  for (const auto& g : cases) {
    CAPTURE(g.lat);
    const auto c = wgs84_to_utm33(gp(g.lat, g.lon));
    CHECK(std::abs(c.easting - g.e) < 1e-3);
    CHECK(std::abs(c.northing - g.n) < 1e-3);
    const auto back = utm33_to_wgs84({g.e, g.n});
    CHECK(std::abs(back.lat - g.lat) < 1e-9);
    CHECK(std::abs(back.lon - g.lon) < 1e-9);
  }

  const auto center = utm33_to_wgs84({500000.0, 0.0});
  CHECK(std::abs(center.lat) < 1e-12);
  CHECK(std::abs(center.lon - 15.0) < 1e-12);
}

TEST_CASE("UTM33 domain errors") {
  CHECK(error_code_of([] { wgs84_to_utm33(gp(84, 15)); }) == ErrorCode::OutOfProjectionDomain);
  CHECK(error_code_of([] { wgs84_to_utm33(gp(-1, 15)); }) == ErrorCode::OutOfProjectionDomain);
  CHECK(error_code_of([] { wgs84_to_utm33(gp(60, 2.9)); }) == ErrorCode::OutOfProjectionDomain);
  CHECK(error_code_of([] { wgs84_to_utm33(gp(60, 27.1)); }) == ErrorCode::OutOfProjectionDomain);
  CHECK(error_code_of([] { utm33_to_wgs84({-2e6, 10.0}); }) == ErrorCode::OutOfProjectionDomain);
  CHECK(error_code_of([] { utm33_to_wgs84({500000.0, 9.5e6}); }) == ErrorCode::OutOfProjectionDomain);
  CHECK(error_code_of([] { utm33_to_wgs84({500000.0, -5.0}); }) == ErrorCode::OutOfProjectionDomain);
  CHECK(error_code_of([] { utm33_to_wgs84({NAN, 10.0}); }) == ErrorCode::OutOfProjectionDomain);
}

TEST_CASE("property: UTM33 round trip and monotonicity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lat(57.5, 71.5), lon(3.5, 27.0);
  for (int i = 0; i < 10000; ++i) {
    const auto p = gp(lat(rng), lon(rng));
    const auto c = wgs84_to_utm33(p);
    REQUIRE(c.northing > 0.0);
    const auto q = utm33_to_wgs84(c);
    REQUIRE(std::abs(q.lat - p.lat) < 1e-9);
    REQUIRE(std::abs(q.lon - p.lon) < 1e-9);
  }
  for (double la : {0.0, 30.0, 63.0, 80.0}) {
    double prev = -1e300;
    for (double lo = 3.0; lo <= 27.0; lo += 0.25) {
      const double e = wgs84_to_utm33(gp(la, lo)).easting;
      REQUIRE(e > prev);
      prev = e;
    }
  }
}

TEST_CASE("geodesic_error examples") {
  CHECK(geodesic_error(gp(63, 10), gp(63, 10)).meters == 0.0);
  const auto eq = geodesic_error(gp(0, 0), gp(0, 1));
  CHECK(std::abs(eq.meters - 111319.49079327357) < 0.01);
  CHECK_FALSE(eq.fallback);

  const auto anti = geodesic_error(gp(0, 0), gp(0.5, 179.7));
  CHECK(anti.fallback);
  CHECK(anti.meters == doctest::Approx(haversine_distance(gp(0, 0), gp(0.5, 179.7))));
}

TEST_CASE("property: geodesic vs haversine for nearby pairs") {
  // Within ~15° of the equator the meridian radius is more than 0.5% below
  // the mean sphere, so the relative check uses mid and high latitudes.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> lat(15, 80), lon(-180, 180), brg(0, 360), d100(1, 1e5);
  for (int i = 0; i < 10000; ++i) {
    const auto a = gp(lat(rng), lon(rng));
    const auto b15 = inverse_haversine(a, 15.0, Bearing::from_degrees(brg(rng)));
    REQUIRE(std::abs(geodesic_error(a, b15).meters - 15.0) < 0.08);
    const auto far = inverse_haversine(a, d100(rng), Bearing::from_degrees(brg(rng)));
    const double h = haversine_distance(a, far);
    REQUIRE(std::abs(geodesic_error(a, far).meters - h) / h < 0.005);
  }
}

TEST_CASE("property: geodesic symmetry and triangle inequality") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> lat(-70, 70), lon(-180, 180), brg(0, 360), dist(0, 5e4);
  for (int i = 0; i < 3000; ++i) {
    const auto a = gp(lat(rng), lon(rng));
    const auto b = inverse_haversine(a, dist(rng), Bearing::from_degrees(brg(rng)));
    const auto c = inverse_haversine(a, dist(rng), Bearing::from_degrees(brg(rng)));
    const double ab = geodesic_error(a, b).meters;
    REQUIRE(std::abs(ab - geodesic_error(b, a).meters) < 1e-6);
    REQUIRE(geodesic_error(a, c).meters <= ab + geodesic_error(b, c).meters + 1e-6);
  }
}
