#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geopin/error.hpp"
#include "geopin/geodesy.hpp"
#include "geopin/session.hpp"
#include "geopin/sync.hpp"
#include "json.hpp"

namespace geopin {

struct EstimateFlags {
  DistanceMode distance_mode = DistanceMode::Ground;
  HeadingMode heading_mode = HeadingMode::Linear;
  PoseMode pose_mode = PoseMode::Interpolate;
  bool clamped_pose = false;
  bool held_heading = false;
  bool geodesic_fallback = false;
};

struct TargetEstimate {
  std::string target_id;
  std::string camera_id;
  double t = 0.0;
  double px = 0.0;
  double py = 0.0;
  GeoPoint estimate;
  double d_m = 0.0;  ///< distance fed to the destination step
  double slant_m = 0.0;
  double ground_m = 0.0;
  Bearing bearing;
  RigState vehicle;  ///< pose at the rig origin
  std::optional<double> error_m;
  std::optional<double> true_distance_m;
  EstimateFlags flags;
};

struct GeolocateFailure {
  Annotation annotation;
  ErrorCode code = ErrorCode::InvalidArgument;
  std::string message;
};

/// Full chain for one annotation: pose, pixel ray, rig transform, ground
/// intersection, heading, destination point, and error against ground truth
/// when the session has a usable reference for the target.
TargetEstimate geolocate(const Annotation& annotation, const Session& session);

struct Aggregate {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

/// Mean, median, 95th percentile and max. Percentiles interpolate linearly
/// between order statistics at rank q * (n - 1).
Aggregate aggregate(std::span<const double> values);
double percentile(std::span<const double> sorted_values, double q);

struct BinAggregate {
  double lo = 0.0;
  double hi = 0.0;
  Aggregate stats;
};

struct ReportConfig {
  double distance_bin_m = 5.0;
  double speed_bin_kmh = 10.0;
};

struct EvaluationReport {
  ReportConfig config;
  /// Sorted by true distance (rows without ground truth last), then
  /// target_id, t, camera_id.
  std::vector<TargetEstimate> rows;
  std::vector<GeolocateFailure> failures;
  Aggregate overall;
  std::vector<BinAggregate> by_distance;
  std::vector<BinAggregate> by_speed;
};

/// Groups (true distance, error) and (speed, error) pairs into bins of the
/// given width; empty bins are omitted.
std::vector<BinAggregate> bin_errors(std::span<const std::pair<double, double>> key_error,
                                     double bin_width);

/// Geolocates every annotation; one bad annotation is recorded in `failures`
/// and never aborts the batch. Throws EmptySession.
EvaluationReport evaluate(const Session& session, const ReportConfig& config = {});

enum class ReportFormat { Csv, Json };
std::optional<ReportFormat> parse_report_format(std::string_view s);

nlohmann::json estimate_to_json(const TargetEstimate& e);
nlohmann::json failure_to_json(const GeolocateFailure& f);
nlohmann::json report_to_json(const EvaluationReport& report);
/// Columns `target_id,true_distance_m,error_m,speed_mps,heading_mode,distance_mode`.
std::string report_to_csv(const EvaluationReport& report);
void export_report(const EvaluationReport& report, ReportFormat format,
                   const std::filesystem::path& path);

struct ReportCsvRow {
  std::string target_id;
  std::optional<double> true_distance_m;
  std::optional<double> error_m;
  double speed_mps = 0.0;
  std::string heading_mode;
  std::string distance_mode;

  friend bool operator==(const ReportCsvRow&, const ReportCsvRow&) = default;
};

std::vector<ReportCsvRow> parse_report_csv(const std::string& text);
std::vector<ReportCsvRow> report_csv_rows(const nlohmann::json& report_json);

}  // namespace geopin
