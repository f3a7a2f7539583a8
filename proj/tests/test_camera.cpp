#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "geopin/camera.hpp"
#include "geopin/error.hpp"
#include "support.hpp"

using namespace geopin;
using testing::error_code_of;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

CameraIntrinsics rig_pinhole() {
  return CameraIntrinsics::pinhole(1920, 1208, {960, 960, 960, 604});
}

const std::array<double, 5> kFisheye = {920.0, -5.0, -12.0, 2.0, 0.0};

CameraIntrinsics rig_ftheta() {
  return CameraIntrinsics::ftheta(1920, 1208, {960, 604, kFisheye});
}

// Dense tabulation of r(theta) inverted by bisection, independent of the
// Newton path.
double bisect_theta(const std::array<double, 5>& c, double radius, double hi) {
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    double r = 0.0, p = 1.0;
    for (double ci : c) {
      p *= mid;
      r += ci * p;
    }
    (r < radius ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("intrinsics validation") {
  CHECK(error_code_of([] { CameraIntrinsics::pinhole(1920, 1208, {0, 960, 960, 604}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { CameraIntrinsics::pinhole(0, 1208, {960, 960, 960, 604}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([] {
          CameraIntrinsics::ftheta(1920, 1208, {960, 604, {-1, 0, 0, 0, 0}});
        }) == ErrorCode::InvalidArgument);
  // Turns over well inside the image corner.
  CHECK(error_code_of([] {
          CameraIntrinsics::ftheta(1920, 1208, {960, 604, {800, 0, -400, 0, 0}});
        }) == ErrorCode::InvalidArgument);
  const auto f = rig_ftheta();
  CHECK(f.theta_max() > 1.0);
  CHECK(ftheta_radius(kFisheye, f.theta_max()) ==
        doctest::Approx(std::hypot(960.0, 604.0)).epsilon(1e-9));
}

TEST_CASE("pinhole pixel_to_ray examples") {
  const auto cam = rig_pinhole();
  const auto axis = pixel_to_ray(cam, 960, 604);
  CHECK(axis.x() == 0.0);
  CHECK(axis.y() == 0.0);
  CHECK(axis.z() == 1.0);
  const auto edge = pixel_to_ray(cam, 1920, 604);
  CHECK(edge.x() == doctest::Approx(std::sqrt(0.5)));
  CHECK(edge.y() == doctest::Approx(0.0));
  CHECK(edge.z() == doctest::Approx(std::sqrt(0.5)));
  CHECK(error_code_of([&] { pixel_to_ray(cam, -1, 10); }) == ErrorCode::PixelOutOfBounds);
  CHECK(error_code_of([&] { pixel_to_ray(cam, 10, 1208.01); }) == ErrorCode::PixelOutOfBounds);
  CHECK(error_code_of([&] { pixel_to_ray(cam, NAN, 10); }) == ErrorCode::PixelOutOfBounds);
}

TEST_CASE("ftheta linear polynomial inverts exactly") {
  const auto cam = CameraIntrinsics::ftheta(1920, 1208, {960, 604, {800, 0, 0, 0, 0}});
  const auto ray = pixel_to_ray(cam, 960 + 400 * 0.6, 604 + 400 * 0.8);
  CHECK(std::acos(ray.z()) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ray.x() / ray.y() == doctest::Approx(0.75));
  CHECK(ray.norm() == doctest::Approx(1.0));
}

TEST_CASE("ftheta_solve matches the bisection oracle") {
  const auto cam = rig_ftheta();
  const double hi = cam.theta_max();
  const double rmax = ftheta_radius(kFisheye, hi);
  for (int i = 0; i <= 2000; ++i) {
    const double r = rmax * i / 2000.0;
    const double th = ftheta_solve(kFisheye, r, hi);
    REQUIRE(std::abs(ftheta_radius(kFisheye, th) - r) < 1e-10 * kFisheye[0]);
    REQUIRE(std::abs(th - bisect_theta(kFisheye, r, hi)) < 1e-12);
  }
  CHECK(ftheta_solve(kFisheye, 0.0, hi) == 0.0);
  CHECK(error_code_of([&] { ftheta_solve(kFisheye, rmax * 1.01, hi); }) ==
        ErrorCode::FThetaInversionFailure);
}

TEST_CASE("ray_to_pixel examples and errors") {
  const auto pin = rig_pinhole();
  const auto c = ray_to_pixel(pin, {0, 0, 1});
  CHECK(c.x == 960.0);
  CHECK(c.y == 604.0);
  CHECK(error_code_of([&] { ray_to_pixel(pin, {0, 0, -1}); }) == ErrorCode::BehindCamera);
  CHECK(error_code_of([&] { ray_to_pixel(pin, {0, 0, 0}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { ray_to_pixel(pin, Eigen::Vector3d(5, 0, 1).normalized()); }) ==
        ErrorCode::OutsideFieldOfView);
  const auto fish = rig_ftheta();
  const auto fc = ray_to_pixel(fish, {0, 0, 1});
  CHECK(fc.x == 960.0);
  CHECK(fc.y == 604.0);
  CHECK(error_code_of([&] { ray_to_pixel(fish, {0, 0, -1}); }) ==
        ErrorCode::OutsideFieldOfView);
}

TEST_CASE("property: projection round trips over the full image grid") {
  const auto pin = rig_pinhole();
  const auto fish = rig_ftheta();
  double worst_pin = 0.0, worst_fish = 0.0;
  for (int y = 0; y <= 1208; y += 8) {
    for (int x = 0; x <= 1920; x += 8) {
      const auto p = ray_to_pixel(pin, pixel_to_ray(pin, x, y));
      worst_pin = std::max(worst_pin, std::hypot(p.x - x, p.y - y));
      const auto f = ray_to_pixel(fish, pixel_to_ray(fish, x, y));
      worst_fish = std::max(worst_fish, std::hypot(f.x - x, f.y - y));
    }
  }
  CHECK(worst_pin < 1e-6);
  CHECK(worst_fish < 1e-3);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(0, 1920), uy(0, 1208);
  for (int i = 0; i < 1000; ++i) {
    const double x = ux(rng), y = uy(rng);
    const auto p = ray_to_pixel(pin, pixel_to_ray(pin, x, y));
    REQUIRE(std::hypot(p.x - x, p.y - y) < 1e-6);
  }
}

TEST_CASE("extrinsic conventions") {
  const auto fwd = [](const CameraExtrinsics& e) {
    return camera_ray_to_rig(e, {0, 0, 1}).direction;
  };
  const auto d0 = fwd({0, 0, 1.5, 0, 0, 0});
  CHECK(d0.isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
  const auto left = fwd({0, 0, 1.5, 90, 0, 0});
  CHECK(left.isApprox(Eigen::Vector3d(0, 1, 0), 1e-12));
  const auto down = fwd({0, 0, 1.5, 0, 10, 0});
  CHECK(down.isApprox(Eigen::Vector3d(std::cos(10 * kDeg), 0, -std::sin(10 * kDeg)), 1e-12));

  // Right of center in the image is rig -y; image down is rig -z.
  const auto right = camera_ray_to_rig({0, 0, 1.5, 0, 0, 0}, {1, 0, 0}).direction;
  CHECK(right.isApprox(Eigen::Vector3d(0, -1, 0), 1e-12));
  const auto img_down = camera_ray_to_rig({0, 0, 1.5, 0, 0, 0}, {0, 1, 0}).direction;
  CHECK(img_down.isApprox(Eigen::Vector3d(0, 0, -1), 1e-12));

  const CameraExtrinsics any{1.2, -0.3, 1.5, 33, 7, -4};
  const Eigen::Matrix3d r = any.rotation();
  CHECK((r.transpose() * r).isApprox(Eigen::Matrix3d::Identity(), 1e-12));
  CHECK(r.determinant() == doctest::Approx(1.0));
  const auto ray = camera_ray_to_rig(any, Eigen::Vector3d(0.3, 0.2, 1).normalized());
  CHECK(ray.origin.isApprox(Eigen::Vector3d(1.2, -0.3, 1.5)));
  CHECK(ray.direction.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("frame invariant with the real pixel path") {
  const auto cam = rig_pinhole();
  const CameraExtrinsics ex{0, 0, 1.5, 0, 0, 0};
  const auto center = camera_ray_to_rig(ex, pixel_to_ray(cam, 960, 604)).direction;
  CHECK(center.isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
  const auto right = camera_ray_to_rig(ex, pixel_to_ray(cam, 1500, 604)).direction;
  CHECK(right.y() < 0.0);
}

TEST_CASE("intersect_ground examples") {
  const Eigen::Vector3d o(0, 0, 1.5);
  const Eigen::Vector3d d(std::cos(30 * kDeg), 0, -std::sin(30 * kDeg));
  const auto hit = intersect_ground(o, d);
  CHECK(std::abs(hit.slant_distance - 3.0) < 1e-9);
  CHECK(std::abs(hit.ground_distance - 2.5980762113533160) < 1e-4);
  CHECK(hit.point.z() == 0.0);

  CHECK(error_code_of([&] { intersect_ground(o, {1, 0, 0}); }) == ErrorCode::AboveHorizon);
  CHECK(error_code_of([&] { intersect_ground(o, {1, 0, 0.1}); }) == ErrorCode::AboveHorizon);
  CHECK(error_code_of([&] { intersect_ground({0, 0, 0}, d); }) == ErrorCode::NegativeHeight);
  CHECK(error_code_of([&] { intersect_ground({0, 0, -1}, d); }) == ErrorCode::NegativeHeight);
}

TEST_CASE("full chain: pitched pinhole principal point") {
  const auto cam = rig_pinhole();
  const CameraExtrinsics ex{0, 0, 1.5, 0, 10, 0};
  const auto ray = camera_ray_to_rig(ex, pixel_to_ray(cam, 960, 604));
  const auto hit = intersect_ground(ray.origin, ray.direction);
  const double expected = 1.5 / std::tan(10 * kDeg);
  CHECK(hit.point.x() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(8.5069).epsilon(1e-5));
  CHECK(std::abs(hit.point.y()) < 1e-12);

  // Oracle: forward-project the synthetic ground point back into the image.
  const Eigen::Vector3d target(expected, 0, 0);
  const Eigen::Vector3d dir_cam = ex.rotation().transpose() * (target - ex.position()).normalized();
  const auto px = ray_to_pixel(cam, dir_cam);
  CHECK(px.x == doctest::Approx(960.0));
  CHECK(px.y == doctest::Approx(604.0));
}

TEST_CASE("property: ground distance falls as the pixel moves down") {
  for (const auto& cam : {rig_pinhole(), rig_ftheta()}) {
    const CameraExtrinsics ex{1.2, 0, 1.5, 0, 3, 0};
    double prev = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double y = 0; y <= 1208; y += 4) {
      const auto ray = camera_ray_to_rig(ex, pixel_to_ray(cam, 1100, y));
      if (ray.direction.z() >= -1e-9) continue;
      const auto hit = intersect_ground(ray.origin, ray.direction);
      REQUIRE(hit.ground_distance < prev);
      REQUIRE(hit.slant_distance >= hit.ground_distance);
      const double h = ray.origin.z();
      REQUIRE(std::abs(hit.slant_distance * hit.slant_distance -
                       (hit.ground_distance * hit.ground_distance + h * h)) <=
              1e-9 * hit.slant_distance * hit.slant_distance);
      prev = hit.ground_distance;
      any = true;
    }
    CHECK(any);
  }
}

TEST_CASE("calibration JSON") {
  const nlohmann::json doc = {
      {"id", "cam3"},
      {"model", "ftheta"},
      {"width", 1920},
      {"height", 1208},
      {"fov_deg", 120},
      {"params", {{"cx", 960}, {"cy", 604}, {"coefficients", kFisheye}}},
      {"extrinsics",
       {{"x", 1.2}, {"y", 0}, {"z", 1.5}, {"yaw_deg", 0}, {"pitch_deg", 3}, {"roll_deg", 0}}}};
  const auto cal = calibration_from_json(doc, "cam3.json");
  CHECK(cal.id == "cam3");
  CHECK_FALSE(cal.intrinsics.is_pinhole());
  CHECK(cal.extrinsics.pitch_deg == 3.0);
  CHECK(calibration_to_json(cal) == doc);

  auto extra = doc;
  extra["lens"] = "x";
  try {
    calibration_from_json(extra, "cam3.json");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("lens") != std::string::npos);
    CHECK(std::string(e.what()).find("cam3.json") != std::string::npos);
  }
  auto bad_model = doc;
  bad_model["model"] = "ocam";
  CHECK(error_code_of([&] { calibration_from_json(bad_model, "x"); }) == ErrorCode::ParseError);
  auto missing = doc;
  missing["extrinsics"].erase("z");
  CHECK(error_code_of([&] { calibration_from_json(missing, "x"); }) == ErrorCode::ParseError);
  auto underground = doc;
  underground["extrinsics"]["z"] = -0.5;
  CHECK(error_code_of([&] { calibration_from_json(underground, "x"); }) != ErrorCode::InvalidSpec);

  testing::TempDir dir("cal");
  {
    std::ofstream(dir / "cam.json") << doc.dump(2);
  }
  CHECK(load_calibration(dir / "cam.json").id == "cam3");
  CHECK(error_code_of([&] { load_calibration(dir / "nope.json"); }) == ErrorCode::IoError);
}
