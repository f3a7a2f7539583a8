#include "geopin/camera.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "geopin/error.hpp"
#include "json_fields.hpp"

namespace geopin {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double farthest_corner_radius(int width, int height, double cx, double cy) {
  double r = 0.0;
  for (double x : {0.0, static_cast<double>(width)}) {
    for (double y : {0.0, static_cast<double>(height)}) {
      r = std::max(r, std::hypot(x - cx, y - cy));
    }
  }
  return r;
}

// Smallest theta with r(theta) = radius, requiring r strictly increasing on
// the way there.
double ftheta_reach(const std::array<double, 5>& c, double radius) {
  constexpr double kStep = 1e-3;
  double lo = 0.0;
  double r_lo = 0.0;
  while (lo < std::numbers::pi) {
    const double hi = lo + kStep;
    const double r_hi = ftheta_radius(c, hi);
    if (!(r_hi > r_lo) || !(ftheta_slope(c, hi) > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "ftheta polynomial is not strictly increasing up to the image corner");
    }
    if (r_hi >= radius) {
      double a = lo, b = hi;
      for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
        const double mid = 0.5 * (a + b);
        (ftheta_radius(c, mid) < radius ? a : b) = mid;
      }
      return b;
    }
    lo = hi;
    r_lo = r_hi;
  }
  throw Error(ErrorCode::InvalidArgument,
              "ftheta polynomial does not reach the image corner within 180 degrees");
}

void check_size(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "image width and height must be positive");
  }
}

}  // namespace

CameraIntrinsics::CameraIntrinsics(int width, int height,
                                   std::variant<PinholeParams, FThetaParams> model)
    : width_(width), height_(height), model_(std::move(model)) {}

CameraIntrinsics CameraIntrinsics::pinhole(int width, int height, const PinholeParams& p) {
  check_size(width, height);
  if (!(p.fx > 0.0) || !(p.fy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "pinhole focal lengths must be positive");
  }
  CameraIntrinsics intr(width, height, p);
  double tan_max = 0.0;
  for (double x : {0.0, static_cast<double>(width)}) {
    for (double y : {0.0, static_cast<double>(height)}) {
      tan_max = std::max(tan_max, std::hypot((x - p.cx) / p.fx, (y - p.cy) / p.fy));
    }
  }
  intr.theta_max_ = std::atan(tan_max);
  return intr;
}

CameraIntrinsics CameraIntrinsics::ftheta(int width, int height, const FThetaParams& p) {
  check_size(width, height);
  if (!(p.coefficients[0] > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ftheta coefficient c1 must be positive");
  }
  CameraIntrinsics intr(width, height, p);
  intr.theta_max_ = ftheta_reach(p.coefficients, farthest_corner_radius(width, height, p.cx, p.cy));
  return intr;
}

Pixel CameraIntrinsics::principal_point() const {
  if (is_pinhole()) return {pinhole_params().cx, pinhole_params().cy};
  return {ftheta_params().cx, ftheta_params().cy};
}

Eigen::Matrix3d CameraExtrinsics::rotation() const {
  // Optical axes expressed in the rig frame at zero yaw/pitch/roll:
  // optical z -> rig +x, optical x -> rig -y, optical y -> rig -z.
  Eigen::Matrix3d optical_to_rig;
  optical_to_rig << 0, 0, 1,
                   -1, 0, 0,
                    0, -1, 0;
  const Eigen::Matrix3d mount =
      (Eigen::AngleAxisd(yaw_deg * kDeg, Eigen::Vector3d::UnitZ()) *
       Eigen::AngleAxisd(pitch_deg * kDeg, Eigen::Vector3d::UnitY()) *
       Eigen::AngleAxisd(roll_deg * kDeg, Eigen::Vector3d::UnitX()))
          .toRotationMatrix();
  return mount * optical_to_rig;
}

double ftheta_radius(const std::array<double, 5>& c, double theta) {
  // Horner on theta * (c1 + theta * (c2 + ...)).
  double acc = c[4];
  for (int i = 3; i >= 0; --i) acc = acc * theta + c[i];
  return acc * theta;
}

double ftheta_slope(const std::array<double, 5>& c, double theta) {
  double acc = 5.0 * c[4];
  for (int i = 3; i >= 0; --i) acc = acc * theta + (i + 1) * c[i];
  return acc;
}

double ftheta_solve(const std::array<double, 5>& c, double radius, double theta_hi) {
  constexpr double kTol = 1e-12;
  constexpr int kMaxNewton = 50;
  if (radius <= 0.0) return 0.0;

  double theta = radius / c[0];
  double residual = ftheta_radius(c, theta) - radius;
  for (int i = 0; i < kMaxNewton; ++i) {
    const double slope = ftheta_slope(c, theta);
    if (!(slope > 0.0)) break;
    const double step = residual / slope;
    const double next = theta - step;
    if (next < 0.0 || next > theta_hi * (1.0 + 1e-9)) break;
    const double next_residual = ftheta_radius(c, next) - radius;
    if (std::fabs(next_residual) > std::fabs(residual) && std::fabs(step) > kTol) break;
    theta = next;
    residual = next_residual;
    if (std::fabs(step) < kTol) return theta;
  }

  // Bisection on the monotone bracket [0, theta_hi].
  if (ftheta_radius(c, theta_hi) < radius - 1e-9 * c[0]) {
    throw Error(ErrorCode::FThetaInversionFailure,
                "image radius " + std::to_string(radius) + " beyond the calibrated field of view");
  }
  double lo = 0.0, hi = theta_hi;
  for (int i = 0; i < 200 && hi - lo > kTol * 1e-3; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ftheta_radius(c, mid) < radius ? lo : hi) = mid;
  }
  theta = 0.5 * (lo + hi);
  if (!(std::fabs(ftheta_radius(c, theta) - radius) < 1e-10 * c[0])) {
    throw Error(ErrorCode::FThetaInversionFailure, "ftheta inversion did not converge");
  }
  return theta;
}

Eigen::Vector3d pixel_to_ray(const CameraIntrinsics& intr, double px, double py) {
  if (!intr.contains(px, py)) {
    throw Error(ErrorCode::PixelOutOfBounds, "pixel (" + std::to_string(px) + ", " +
                                                 std::to_string(py) + ") outside the image");
  }
  if (intr.is_pinhole()) {
    const auto& p = intr.pinhole_params();
    return Eigen::Vector3d((px - p.cx) / p.fx, (py - p.cy) / p.fy, 1.0).normalized();
  }
  const auto& p = intr.ftheta_params();
  const double dx = px - p.cx;
  const double dy = py - p.cy;
  const double r = std::hypot(dx, dy);
  if (r == 0.0) return Eigen::Vector3d::UnitZ();
  const double theta = ftheta_solve(p.coefficients, r, intr.theta_max());
  const double s = std::sin(theta);
  return {s * dx / r, s * dy / r, std::cos(theta)};
}

Pixel ray_to_pixel(const CameraIntrinsics& intr, const Eigen::Vector3d& dir) {
  if (!dir.allFinite() || dir.squaredNorm() == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "ray direction must be finite and nonzero");
  }
  Pixel out;
  if (intr.is_pinhole()) {
    if (!(dir.z() > 0.0)) throw Error(ErrorCode::BehindCamera, "ray points behind the camera");
    const auto& p = intr.pinhole_params();
    out = {p.fx * dir.x() / dir.z() + p.cx, p.fy * dir.y() / dir.z() + p.cy};
  } else {
    const auto& p = intr.ftheta_params();
    const double lateral = std::hypot(dir.x(), dir.y());
    const double theta = std::atan2(lateral, dir.z());
    if (theta > intr.theta_max() * (1.0 + 1e-12)) {
      throw Error(ErrorCode::OutsideFieldOfView, "ray beyond the calibrated field of view");
    }
    if (lateral == 0.0) return {p.cx, p.cy};
    const double r = ftheta_radius(p.coefficients, theta);
    out = {p.cx + r * dir.x() / lateral, p.cy + r * dir.y() / lateral};
  }
  // Rays cast from edge pixels may land a rounding error outside.
  constexpr double kEdgeSlackPx = 1e-6;
  const double w = intr.width(), h = intr.height();
  if (!(out.x >= -kEdgeSlackPx && out.x <= w + kEdgeSlackPx && out.y >= -kEdgeSlackPx &&
        out.y <= h + kEdgeSlackPx)) {
    throw Error(ErrorCode::OutsideFieldOfView, "ray projects outside the image");
  }
  out.x = std::clamp(out.x, 0.0, w);
  out.y = std::clamp(out.y, 0.0, h);
  return out;
}

RigRay camera_ray_to_rig(const CameraExtrinsics& extr, const Eigen::Vector3d& dir_cam) {
  return {extr.position(), extr.rotation() * dir_cam};
}

GroundHit intersect_ground(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction) {
  if (!(origin.z() > 0.0)) {
    throw Error(ErrorCode::NegativeHeight, "ray origin is not above the ground plane");
  }
  const Eigen::Vector3d dir = direction.normalized();
  if (dir.z() >= -1e-9) {
    throw Error(ErrorCode::AboveHorizon, "ray does not descend to the ground plane");
  }
  const double t = -origin.z() / dir.z();
  GroundHit hit;
  hit.point = origin + t * dir;
  hit.point.z() = 0.0;
  hit.slant_distance = t;
  hit.ground_distance = t * std::hypot(dir.x(), dir.y());
  return hit;
}

CameraCalibration calibration_from_json(const nlohmann::json& doc, const std::string& source) {
  using detail::JsonFields;
  JsonFields root(doc, "", source);
  root.allow_only({"id", "model", "width", "height", "fov_deg", "params", "extrinsics"});

  const std::string id = root.string("id");
  if (id.empty()) root.fail("id", "must not be empty");
  const std::string model = root.string("model");
  const int width = root.integer("width");
  const int height = root.integer("height");
  const double fov = root.number("fov_deg");
  if (!(fov > 0.0 && fov < 360.0)) root.fail("fov_deg", "must lie in (0, 360)");

  const JsonFields params = root.object("params");
  auto build = [&]() -> CameraIntrinsics {
    if (model == "pinhole") {
      params.allow_only({"fx", "fy", "cx", "cy"});
      return CameraIntrinsics::pinhole(
          width, height,
          {params.number("fx"), params.number("fy"), params.number("cx"), params.number("cy")});
    }
    if (model == "ftheta") {
      params.allow_only({"cx", "cy", "coefficients"});
      const auto& coeffs = params.array("coefficients");
      if (coeffs.size() != 5) params.fail("params.coefficients", "expected 5 coefficients");
      FThetaParams p{params.number("cx"), params.number("cy"), {}};
      for (std::size_t i = 0; i < 5; ++i) {
        if (!coeffs[i].is_number()) params.fail("params.coefficients", "expected numbers");
        p.coefficients[i] = coeffs[i].get<double>();
      }
      return CameraIntrinsics::ftheta(width, height, p);
    }
    root.fail("model", "expected \"pinhole\" or \"ftheta\", got \"" + model + "\"");
  };

  CameraIntrinsics intr = [&] {
    try {
      return build();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      root.fail("params", e.what());
    }
  }();

  const JsonFields ex = root.object("extrinsics");
  ex.allow_only({"x", "y", "z", "yaw_deg", "pitch_deg", "roll_deg"});
  CameraExtrinsics extr{ex.number("x"),       ex.number("y"),         ex.number("z"),
                        ex.number("yaw_deg"), ex.number("pitch_deg"), ex.number("roll_deg")};
  if (!(extr.z > 0.0)) ex.fail("extrinsics.z", "camera must be above the ground plane");

  return CameraCalibration{id, std::move(intr), extr, fov};
}

nlohmann::json calibration_to_json(const CameraCalibration& cal) {
  nlohmann::json doc;
  doc["id"] = cal.id;
  doc["width"] = cal.intrinsics.width();
  doc["height"] = cal.intrinsics.height();
  doc["fov_deg"] = cal.fov_deg;
  if (cal.intrinsics.is_pinhole()) {
    const auto& p = cal.intrinsics.pinhole_params();
    doc["model"] = "pinhole";
    doc["params"] = {{"fx", p.fx}, {"fy", p.fy}, {"cx", p.cx}, {"cy", p.cy}};
  } else {
    const auto& p = cal.intrinsics.ftheta_params();
    doc["model"] = "ftheta";
    doc["params"] = {{"cx", p.cx}, {"cy", p.cy}, {"coefficients", p.coefficients}};
  }
  const auto& e = cal.extrinsics;
  doc["extrinsics"] = {{"x", e.x},
                       {"y", e.y},
                       {"z", e.z},
                       {"yaw_deg", e.yaw_deg},
                       {"pitch_deg", e.pitch_deg},
                       {"roll_deg", e.roll_deg}};
  return doc;
}

CameraCalibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open calibration file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return calibration_from_json(doc, path.string());
}

}  // namespace geopin
