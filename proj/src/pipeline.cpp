#include "geopin/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "geopin/camera.hpp"
#include "text_io.hpp"

namespace geopin {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Point at (forward, left) metres in the vehicle frame.
GeoPoint offset_point(const GeoPoint& origin, double heading_deg, double forward, double left,
                      const EarthModel& earth) {
  const double dist = std::hypot(forward, left);
  if (dist == 0.0) return origin;
  const double relative = std::atan2(-left, forward) * kRadToDeg;
  return inverse_haversine(origin, dist, Bearing::from_degrees(heading_deg + relative), earth);
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

TargetEstimate geolocate(const Annotation& annotation, const Session& session) {
  const auto& opts = session.options;
  const auto& cam = session.camera(annotation.camera_id);

  TargetEstimate out;
  out.target_id = annotation.target_id;
  out.camera_id = annotation.camera_id;
  out.t = annotation.t;
  out.px = annotation.px;
  out.py = annotation.py;
  out.flags.distance_mode = opts.distance_mode;
  out.flags.heading_mode = opts.heading_mode;
  out.flags.pose_mode = opts.pose_mode;

  RigState pose = pose_at(session.track, annotation.t, opts.pose_mode, opts.latency_offset_s);
  pose.pos = offset_point(pose.pos, pose.theta_car_deg, opts.lever_arm_forward_m,
                          opts.lever_arm_left_m, opts.earth);
  out.vehicle = pose;
  out.flags.clamped_pose = pose.clamped;
  out.flags.held_heading = pose.held_heading;

  const Eigen::Vector3d dir_cam = pixel_to_ray(cam.intrinsics, annotation.px, annotation.py);
  const RigRay ray = camera_ray_to_rig(cam.extrinsics, dir_cam);
  const GroundHit hit = intersect_ground(ray.origin, ray.direction);
  out.slant_m = hit.slant_distance;
  out.ground_m = hit.ground_distance;
  out.d_m = opts.distance_mode == DistanceMode::Ground ? hit.ground_distance : hit.slant_distance;

  if (opts.heading_mode == HeadingMode::Linear) {
    // Extrinsic yaw turns left; the linear model wants a clockwise offset.
    out.bearing = linear_fov_heading(cam.fov_deg, cam.intrinsics.width(), annotation.px,
                              -cam.extrinsics.yaw_deg, pose.theta_car_deg);
  } else {
    out.bearing = ray_azimuth_heading({ray.direction.x(), ray.direction.y(), ray.direction.z()},
                                      pose.theta_car_deg);
  }

  // The ray starts at the camera, so the destination step starts at the
  // camera's ground position.
  const GeoPoint camera_pos = offset_point(pose.pos, pose.theta_car_deg, cam.extrinsics.x,
                                           cam.extrinsics.y, opts.earth);
  out.estimate = inverse_haversine(camera_pos, out.d_m, out.bearing, opts.earth);

  if (const auto* truth = session.reference_target(annotation.target_id)) {
    const auto err = geodesic_error(out.estimate, truth->pos, opts.earth);
    out.error_m = err.meters;
    out.flags.geodesic_fallback = err.fallback;
    out.true_distance_m = haversine_distance(pose.pos, truth->pos, opts.earth);
  }
  return out;
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double rank = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  a.mean = sum / static_cast<double>(sorted.size());
  a.median = percentile(sorted, 0.5);
  a.p95 = percentile(sorted, 0.95);
  a.max = sorted.back();
  return a;
}

std::vector<BinAggregate> bin_errors(std::span<const std::pair<double, double>> key_error,
                                     double bin_width) {
  std::map<long long, std::vector<double>> bins;
  for (const auto& [key, err] : key_error) {
    bins[static_cast<long long>(std::floor(key / bin_width))].push_back(err);
  }
  std::vector<BinAggregate> out;
  for (const auto& [index, errors] : bins) {
    out.push_back({static_cast<double>(index) * bin_width,
                   static_cast<double>(index + 1) * bin_width, aggregate(errors)});
  }
  return out;
}

EvaluationReport evaluate(const Session& session, const ReportConfig& config) {
  if (session.annotations.empty()) {
    throw Error(ErrorCode::EmptySession, "session has no annotations");
  }
  EvaluationReport report;
  report.config = config;
  for (const auto& a : session.annotations) {
    try {
      report.rows.push_back(geolocate(a, session));
    } catch (const Error& e) {
      report.failures.push_back({a, e.code(), e.what()});
    }
  }

  auto key = [](const TargetEstimate& e) {
    return std::tuple<bool, double, const std::string&, double, const std::string&, double,
                      double>(!e.true_distance_m.has_value(), e.true_distance_m.value_or(0.0),
                              e.target_id, e.t, e.camera_id, e.px, e.py);
  };
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [&](const auto& x, const auto& y) { return key(x) < key(y); });

  std::vector<double> errors;
  std::vector<std::pair<double, double>> by_distance;
  std::vector<std::pair<double, double>> by_speed;
  for (const auto& r : report.rows) {
    if (!r.error_m) continue;
    errors.push_back(*r.error_m);
    by_distance.emplace_back(*r.true_distance_m, *r.error_m);
    by_speed.emplace_back(r.vehicle.speed_mps * 3.6, *r.error_m);
  }
  report.overall = aggregate(errors);
  report.by_distance = bin_errors(by_distance, config.distance_bin_m);
  report.by_speed = bin_errors(by_speed, config.speed_bin_kmh);
  return report;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  return std::nullopt;
}

nlohmann::json estimate_to_json(const TargetEstimate& e) {
  return {
      {"target_id", e.target_id},
      {"camera_id", e.camera_id},
      {"t", e.t},
      {"px", e.px},
      {"py", e.py},
      {"estimate", {{"lat", e.estimate.lat}, {"lon", e.estimate.lon}}},
      {"d_m", e.d_m},
      {"slant_m", e.slant_m},
      {"ground_m", e.ground_m},
      {"bearing_deg", e.bearing.deg},
      {"vehicle",
       {{"t", e.vehicle.t},
        {"lat", e.vehicle.pos.lat},
        {"lon", e.vehicle.pos.lon},
        {"theta_car_deg", e.vehicle.theta_car_deg},
        {"speed_mps", e.vehicle.speed_mps}}},
      {"error_m", optional_number(e.error_m)},
      {"true_distance_m", optional_number(e.true_distance_m)},
      {"flags",
       {{"distance_mode", to_string(e.flags.distance_mode)},
        {"heading_mode", to_string(e.flags.heading_mode)},
        {"pose_mode", to_string(e.flags.pose_mode)},
        {"clamped_pose", e.flags.clamped_pose},
        {"held_heading", e.flags.held_heading},
        {"geodesic_fallback", e.flags.geodesic_fallback}}},
  };
}

nlohmann::json failure_to_json(const GeolocateFailure& f) {
  return {{"target_id", f.annotation.target_id},
          {"camera_id", f.annotation.camera_id},
          {"t", f.annotation.t},
          {"px", f.annotation.px},
          {"py", f.annotation.py},
          {"error", error_name(f.code)},
          {"message", f.message}};
}

namespace {

nlohmann::json aggregate_json(const Aggregate& a) {
  return {{"count", a.count}, {"mean_m", a.mean}, {"median_m", a.median}, {"p95_m", a.p95},
          {"max_m", a.max}};
}

nlohmann::json bins_json(const std::vector<BinAggregate>& bins) {
  auto out = nlohmann::json::array();
  for (const auto& b : bins) {
    auto j = aggregate_json(b.stats);
    j["lo"] = b.lo;
    j["hi"] = b.hi;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) j["rows"].push_back(estimate_to_json(r));
  j["failures"] = nlohmann::json::array();
  for (const auto& f : report.failures) j["failures"].push_back(failure_to_json(f));
  j["aggregates"] = {{"overall", aggregate_json(report.overall)},
                     {"by_distance", bins_json(report.by_distance)},
                     {"by_speed", bins_json(report.by_speed)}};
  j["config"] = {{"distance_bin_m", report.config.distance_bin_m},
                 {"speed_bin_kmh", report.config.speed_bin_kmh}};
  return j;
}

std::string report_to_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "target_id,true_distance_m,error_m,speed_mps,heading_mode,distance_mode\n";
  for (const auto& r : report.rows) {
    out << r.target_id << ','
        << (r.true_distance_m ? detail::format_double(*r.true_distance_m) : "") << ','
        << (r.error_m ? detail::format_double(*r.error_m) : "") << ','
        << detail::format_double(r.vehicle.speed_mps) << ',' << to_string(r.flags.heading_mode)
        << ',' << to_string(r.flags.distance_mode) << '\n';
  }
  return out.str();
}

void export_report(const EvaluationReport& report, ReportFormat format,
                   const std::filesystem::path& path) {
  const std::string text =
      format == ReportFormat::Csv ? report_to_csv(report) : report_to_json(report).dump(2) + "\n";
  detail::write_text_file(path, text);
}

std::vector<ReportCsvRow> parse_report_csv(const std::string& text) {
  std::vector<ReportCsvRow> rows;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "target_id,true_distance_m,error_m,speed_mps,heading_mode,distance_mode") {
    throw Error(ErrorCode::ParseError, "report CSV: unexpected header");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 6) {
      throw Error(ErrorCode::ParseError, "report CSV:" + std::to_string(line_no) + ": expected 6 fields");
    }
    ReportCsvRow r;
    r.target_id = std::string(f[0]);
    r.true_distance_m = detail::parse_double(f[1]);
    r.error_m = detail::parse_double(f[2]);
    r.speed_mps = detail::parse_double(f[3]).value_or(0.0);
    r.heading_mode = std::string(f[4]);
    r.distance_mode = std::string(f[5]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ReportCsvRow> report_csv_rows(const nlohmann::json& report_json) {
  std::vector<ReportCsvRow> rows;
  for (const auto& r : report_json.at("rows")) {
    ReportCsvRow row;
    row.target_id = r.at("target_id").get<std::string>();
    if (!r.at("true_distance_m").is_null()) row.true_distance_m = r["true_distance_m"].get<double>();
    if (!r.at("error_m").is_null()) row.error_m = r["error_m"].get<double>();
    row.speed_mps = r.at("vehicle").at("speed_mps").get<double>();
    row.heading_mode = r.at("flags").at("heading_mode").get<std::string>();
    row.distance_mode = r.at("flags").at("distance_mode").get<std::string>();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace geopin
