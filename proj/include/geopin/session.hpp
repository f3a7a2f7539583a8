#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geopin/camera.hpp"
#include "geopin/geodesy.hpp"
#include "geopin/sync.hpp"
#include "json.hpp"

namespace geopin {

struct Annotation {
  double t = 0.0;
  std::string camera_id;
  double px = 0.0;
  double py = 0.0;
  std::string target_id;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

enum class TargetKind { ControlMarker, TrafficSign };
/// Where a ground-truth position came from. Road-database positions are
/// loaded but only used for scoring when the session opts in.
enum class TargetSource { Survey, Nvdb };

struct GroundTruthTarget {
  std::string target_id;
  GeoPoint pos;
  TargetKind kind = TargetKind::ControlMarker;
  TargetSource source = TargetSource::Survey;

  friend bool operator==(const GroundTruthTarget&, const GroundTruthTarget&) = default;
};

enum class HeadingMode { Linear, Ray };
enum class DistanceMode { Ground, Slant };

std::string_view to_string(TargetKind k);
std::string_view to_string(TargetSource s);
std::string_view to_string(HeadingMode m);
std::string_view to_string(DistanceMode m);
std::optional<HeadingMode> parse_heading_mode(std::string_view s);
std::optional<DistanceMode> parse_distance_mode(std::string_view s);

struct SessionOptions {
  HeadingMode heading_mode = HeadingMode::Linear;
  DistanceMode distance_mode = DistanceMode::Ground;
  PoseMode pose_mode = PoseMode::Interpolate;
  double latency_offset_s = 0.0;
  EarthModel earth;
  /// Rig origin relative to the GNSS antenna, in the vehicle frame.
  double lever_arm_forward_m = 0.0;
  double lever_arm_left_m = 0.0;
  /// Promote road-database targets to scoring ground truth.
  bool trust_nvdb = false;
};

nlohmann::json options_to_json(const SessionOptions& o);
SessionOptions options_from_json(const nlohmann::json& doc, const std::string& source);

class Session {
 public:
  std::vector<CameraCalibration> cameras;
  GnssTrack track;
  std::vector<Annotation> annotations;
  std::vector<GroundTruthTarget> ground_truth;
  SessionOptions options;
  nlohmann::json metadata = nlohmann::json::object();
  /// Annotation log on disk, empty for in-memory sessions.
  std::filesystem::path annotations_path;

  /// Throws DanglingReference naming the id.
  const CameraCalibration& camera(std::string_view id) const;
  const CameraCalibration* find_camera(std::string_view id) const;
  const GroundTruthTarget* find_target(std::string_view id) const;
  /// Ground truth usable for scoring (survey, or road database when trusted).
  const GroundTruthTarget* reference_target(std::string_view id) const;
};

/// Checks every cross-reference and invariant; throws on the first problem.
void validate_session(const Session& s);
/// Checks one annotation against the session (camera exists, pixel in bounds,
/// time inside the track span).
void validate_annotation(const Session& s, const Annotation& a);

/// Manifest JSON:
///   {cameras: [path | calibration object], track: path,
///    annotations: path, ground_truth?: path, options?: {...}, metadata?: {...}}
/// Paths are relative to the manifest's directory.
Session load_session(const std::filesystem::path& manifest);

/// Writes session.json (cameras inline), track.csv, annotations.csv and
/// ground_truth.csv into `dir`. Returns the manifest path.
std::filesystem::path save_session(const Session& s, const std::filesystem::path& dir);

/// CSV `t,camera_id,px,py,target_id`.
std::vector<Annotation> read_annotations_csv(const std::filesystem::path& path);
std::string annotations_to_csv(const std::vector<Annotation>& annotations);
std::string annotation_csv_line(const Annotation& a);

/// CSV `target_id,kind,lat,lon,easting,northing,source`. Each row carries
/// either lat/lon or UTM33 easting/northing; UTM rows are converted on load.
std::vector<GroundTruthTarget> read_ground_truth_csv(const std::filesystem::path& path);
std::string ground_truth_to_csv(const std::vector<GroundTruthTarget>& targets);

}  // namespace geopin
