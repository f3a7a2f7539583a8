#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <string>
#include <variant>

#include "json.hpp"

namespace geopin {

// Frames used throughout:
//   camera optical: z along the optical axis, x right, y down
//   rig: x forward, y left, z up, ground plane z = 0

struct PinholeParams {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// Equidistant-polynomial fisheye: image radius r(theta) = sum c_i theta^i,
/// i = 1..5, theta the off-axis angle in radians.
struct FThetaParams {
  double cx = 0.0;
  double cy = 0.0;
  std::array<double, 5> coefficients{};
};

struct Pixel {
  double x = 0.0;
  double y = 0.0;
};

class CameraIntrinsics {
 public:
  static CameraIntrinsics pinhole(int width, int height, const PinholeParams& params);
  /// Throws InvalidArgument unless c1 > 0 and r(theta) is strictly increasing
  /// out to the image corner farthest from the principal point.
  static CameraIntrinsics ftheta(int width, int height, const FThetaParams& params);

  int width() const { return width_; }
  int height() const { return height_; }
  bool is_pinhole() const { return std::holds_alternative<PinholeParams>(model_); }
  const PinholeParams& pinhole_params() const { return std::get<PinholeParams>(model_); }
  const FThetaParams& ftheta_params() const { return std::get<FThetaParams>(model_); }
  Pixel principal_point() const;
  /// Half the diagonal field of view in radians (f-theta only; pinhole
  /// returns the angle to the farthest corner as well).
  double theta_max() const { return theta_max_; }

  bool contains(double px, double py) const {
    return px >= 0.0 && px <= width_ && py >= 0.0 && py <= height_;
  }

 private:
  CameraIntrinsics(int width, int height, std::variant<PinholeParams, FThetaParams> model);

  int width_ = 0;
  int height_ = 0;
  std::variant<PinholeParams, FThetaParams> model_;
  double theta_max_ = 0.0;
};

struct CameraExtrinsics {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw_deg = 0.0;    ///< about rig z, positive turns the camera left
  double pitch_deg = 0.0;  ///< about rig y, positive tilts the camera down
  double roll_deg = 0.0;   ///< about rig x, right-handed

  /// Rotation taking camera optical coordinates into the rig frame.
  Eigen::Matrix3d rotation() const;
  Eigen::Vector3d position() const { return {x, y, z}; }
};

struct CameraCalibration {
  std::string id;
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
  double fov_deg = 0.0;
};

struct RigRay {
  Eigen::Vector3d origin;
  Eigen::Vector3d direction;
};

struct GroundHit {
  Eigen::Vector3d point;  ///< rig frame, z = 0
  double slant_distance = 0.0;
  double ground_distance = 0.0;
};

/// r(theta) and dr/dtheta for an f-theta polynomial.
double ftheta_radius(const std::array<double, 5>& c, double theta);
double ftheta_slope(const std::array<double, 5>& c, double theta);
/// Solves r(theta) = radius on [0, theta_hi]: Newton from radius / c1 with
/// bisection fallback. Throws FThetaInversionFailure.
double ftheta_solve(const std::array<double, 5>& c, double radius, double theta_hi);

/// Unit ray in the camera optical frame. Throws PixelOutOfBounds.
Eigen::Vector3d pixel_to_ray(const CameraIntrinsics& intr, double px, double py);

/// Forward projection. Throws BehindCamera (pinhole, z <= 0) or
/// OutsideFieldOfView (beyond theta_max or outside the image).
Pixel ray_to_pixel(const CameraIntrinsics& intr, const Eigen::Vector3d& dir);

RigRay camera_ray_to_rig(const CameraExtrinsics& extr, const Eigen::Vector3d& dir_cam);

/// Intersects a rig-frame ray with z = 0. Throws NegativeHeight or
/// AboveHorizon.
GroundHit intersect_ground(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction);

/// Calibration document:
///   {id, model: "pinhole"|"ftheta", width, height, fov_deg,
///    params: {fx, fy, cx, cy} | {cx, cy, coefficients: [c1..c5]},
///    extrinsics: {x, y, z, yaw_deg, pitch_deg, roll_deg}}
/// Unknown fields are rejected. `source` prefixes error messages.
CameraCalibration calibration_from_json(const nlohmann::json& doc, const std::string& source);
nlohmann::json calibration_to_json(const CameraCalibration& cal);
CameraCalibration load_calibration(const std::filesystem::path& path);

}  // namespace geopin
