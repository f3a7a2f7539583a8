#include "geopin/session.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "geopin/error.hpp"
#include "json_fields.hpp"
#include "text_io.hpp"

namespace geopin {

using detail::csv_fail;
using detail::format_double;
using detail::parse_double;

std::string_view to_string(TargetKind k) {
  return k == TargetKind::ControlMarker ? "control_marker" : "traffic_sign";
}

std::string_view to_string(TargetSource s) { return s == TargetSource::Survey ? "survey" : "nvdb"; }

std::string_view to_string(HeadingMode m) { return m == HeadingMode::Linear ? "linear" : "ray"; }

std::string_view to_string(DistanceMode m) { return m == DistanceMode::Ground ? "ground" : "slant"; }

std::optional<HeadingMode> parse_heading_mode(std::string_view s) {
  if (s == "linear") return HeadingMode::Linear;
  if (s == "ray") return HeadingMode::Ray;
  return std::nullopt;
}

std::optional<DistanceMode> parse_distance_mode(std::string_view s) {
  if (s == "ground") return DistanceMode::Ground;
  if (s == "slant") return DistanceMode::Slant;
  return std::nullopt;
}

namespace {

std::optional<TargetKind> parse_kind(std::string_view s) {
  if (s == "control_marker") return TargetKind::ControlMarker;
  if (s == "traffic_sign") return TargetKind::TrafficSign;
  return std::nullopt;
}

std::optional<TargetSource> parse_source(std::string_view s) {
  if (s.empty() || s == "survey") return TargetSource::Survey;
  if (s == "nvdb") return TargetSource::Nvdb;
  return std::nullopt;
}

nlohmann::json parse_json_file(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace

nlohmann::json options_to_json(const SessionOptions& o) {
  return {{"heading_mode", to_string(o.heading_mode)},
          {"distance_mode", to_string(o.distance_mode)},
          {"pose_mode", to_string(o.pose_mode)},
          {"latency_offset_s", o.latency_offset_s},
          {"earth_radius_m", o.earth.sphere_radius_m},
          {"lever_arm_forward_m", o.lever_arm_forward_m},
          {"lever_arm_left_m", o.lever_arm_left_m},
          {"trust_nvdb", o.trust_nvdb}};
}

SessionOptions options_from_json(const nlohmann::json& doc, const std::string& source) {
  detail::JsonFields f(doc, "options", source);
  f.allow_only({"heading_mode", "distance_mode", "pose_mode", "latency_offset_s", "earth_radius_m",
                "lever_arm_forward_m", "lever_arm_left_m", "trust_nvdb"});
  SessionOptions o;
  if (f.has("heading_mode")) {
    auto m = parse_heading_mode(f.string("heading_mode"));
    if (!m) f.fail("options.heading_mode", "expected \"linear\" or \"ray\"");
    o.heading_mode = *m;
  }
  if (f.has("distance_mode")) {
    auto m = parse_distance_mode(f.string("distance_mode"));
    if (!m) f.fail("options.distance_mode", "expected \"ground\" or \"slant\"");
    o.distance_mode = *m;
  }
  if (f.has("pose_mode")) {
    auto m = parse_pose_mode(f.string("pose_mode"));
    if (!m) f.fail("options.pose_mode", "expected \"interpolate\" or \"nearest\"");
    o.pose_mode = *m;
  }
  o.latency_offset_s = f.number_or("latency_offset_s", 0.0);
  o.earth.sphere_radius_m = f.number_or("earth_radius_m", o.earth.sphere_radius_m);
  if (!(o.earth.sphere_radius_m > 0.0)) f.fail("options.earth_radius_m", "must be positive");
  o.lever_arm_forward_m = f.number_or("lever_arm_forward_m", 0.0);
  o.lever_arm_left_m = f.number_or("lever_arm_left_m", 0.0);
  o.trust_nvdb = f.boolean_or("trust_nvdb", false);
  return o;
}

const CameraCalibration* Session::find_camera(std::string_view id) const {
  for (const auto& c : cameras) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const CameraCalibration& Session::camera(std::string_view id) const {
  if (const auto* c = find_camera(id)) return *c;
  throw Error(ErrorCode::DanglingReference, "unknown camera_id '" + std::string(id) + "'");
}

const GroundTruthTarget* Session::find_target(std::string_view id) const {
  for (const auto& t : ground_truth) {
    if (t.target_id == id) return &t;
  }
  return nullptr;
}

const GroundTruthTarget* Session::reference_target(std::string_view id) const {
  const auto* t = find_target(id);
  if (t && t->source == TargetSource::Nvdb && !options.trust_nvdb) return nullptr;
  return t;
}

void validate_annotation(const Session& s, const Annotation& a) {
  const auto& cam = s.camera(a.camera_id);
  if (a.target_id.empty()) throw Error(ErrorCode::InvalidArgument, "annotation without target_id");
  if (!std::isfinite(a.t)) throw Error(ErrorCode::InvalidArgument, "annotation time not finite");
  if (!cam.intrinsics.contains(a.px, a.py)) {
    throw Error(ErrorCode::PixelOutOfBounds,
                "annotation for target '" + a.target_id + "' at (" + format_double(a.px) + ", " +
                    format_double(a.py) + ") outside camera '" + cam.id + "' (" +
                    std::to_string(cam.intrinsics.width()) + "x" +
                    std::to_string(cam.intrinsics.height()) + ")");
  }
  const double query = a.t - s.options.latency_offset_s;
  if (query < s.track.start_time() - kTrackMarginS || query > s.track.end_time() + kTrackMarginS) {
    throw Error(ErrorCode::OutOfTrack, "annotation for target '" + a.target_id + "' at t=" +
                                           format_double(a.t) + " s outside the GNSS track");
  }
}

void validate_session(const Session& s) {
  s.options.earth.validate();
  if (s.track.size() == 0) throw Error(ErrorCode::InvalidArgument, "session has no GNSS track");
  std::set<std::string, std::less<>> ids;
  for (const auto& c : s.cameras) {
    if (!ids.insert(c.id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate camera id '" + c.id + "'");
    }
  }
  std::set<std::string, std::less<>> targets;
  for (const auto& t : s.ground_truth) {
    if (!targets.insert(t.target_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate target_id '" + t.target_id + "'");
    }
  }
  for (const auto& a : s.annotations) validate_annotation(s, a);
}

std::vector<Annotation> read_annotations_csv(const std::filesystem::path& path) {
  std::vector<Annotation> out;
  detail::read_csv(path, "t,camera_id,px,py,target_id",
                   [&](const std::vector<std::string_view>& f, std::size_t line) {
                     if (f.size() != 5) csv_fail(path, line, "expected 5 fields");
                     auto t = parse_double(f[0]);
                     auto px = parse_double(f[2]);
                     auto py = parse_double(f[3]);
                     if (!t || !std::isfinite(*t)) csv_fail(path, line, "bad t");
                     if (!px || !py) csv_fail(path, line, "bad pixel");
                     if (f[1].empty()) csv_fail(path, line, "empty camera_id");
                     if (f[4].empty()) csv_fail(path, line, "empty target_id");
                     out.push_back({*t, std::string(f[1]), *px, *py, std::string(f[4])});
                   });
  return out;
}

std::string annotation_csv_line(const Annotation& a) {
  return format_double(a.t) + ',' + a.camera_id + ',' + format_double(a.px) + ',' +
         format_double(a.py) + ',' + a.target_id + '\n';
}

std::string annotations_to_csv(const std::vector<Annotation>& annotations) {
  std::string out = "t,camera_id,px,py,target_id\n";
  for (const auto& a : annotations) out += annotation_csv_line(a);
  return out;
}

std::vector<GroundTruthTarget> read_ground_truth_csv(const std::filesystem::path& path) {
  std::vector<GroundTruthTarget> out;
  std::set<std::string, std::less<>> seen;
  detail::read_csv(
      path, "target_id,kind,lat,lon,easting,northing,source",
      [&](const std::vector<std::string_view>& f, std::size_t line) {
        if (f.size() != 7) csv_fail(path, line, "expected 7 fields");
        GroundTruthTarget t;
        t.target_id = std::string(f[0]);
        if (t.target_id.empty()) csv_fail(path, line, "empty target_id");
        if (!seen.insert(t.target_id).second) {
          csv_fail(path, line, "duplicate target_id '" + t.target_id + "'");
        }
        auto kind = parse_kind(f[1]);
        if (!kind) csv_fail(path, line, "bad kind '" + std::string(f[1]) + "'");
        t.kind = *kind;
        auto source = parse_source(f[6]);
        if (!source) csv_fail(path, line, "bad source '" + std::string(f[6]) + "'");
        t.source = *source;
        const bool geographic = !f[2].empty() || !f[3].empty();
        const bool projected = !f[4].empty() || !f[5].empty();
        if (geographic == projected) {
          csv_fail(path, line, "give either lat/lon or easting/northing");
        }
        try {
          if (geographic) {
            auto lat = parse_double(f[2]);
            auto lon = parse_double(f[3]);
            if (!lat || !lon) csv_fail(path, line, "bad lat/lon");
            t.pos = GeoPoint::from_degrees(*lat, *lon);
          } else {
            auto e = parse_double(f[4]);
            auto n = parse_double(f[5]);
            if (!e || !n) csv_fail(path, line, "bad easting/northing");
            t.pos = utm33_to_wgs84({*e, *n});
          }
        } catch (const Error& e) {
          if (e.code() == ErrorCode::ParseError) throw;
          csv_fail(path, line, e.what());
        }
        out.push_back(std::move(t));
      });
  return out;
}

std::string ground_truth_to_csv(const std::vector<GroundTruthTarget>& targets) {
  std::ostringstream out;
  out << "target_id,kind,lat,lon,easting,northing,source\n";
  for (const auto& t : targets) {
    out << t.target_id << ',' << to_string(t.kind) << ',' << format_double(t.pos.lat) << ','
        << format_double(t.pos.lon) << ",,," << to_string(t.source) << '\n';
  }
  return out.str();
}

Session load_session(const std::filesystem::path& manifest) {
  if (!std::filesystem::exists(manifest)) {
    throw Error(ErrorCode::IoError, "manifest not found: " + manifest.string());
  }
  const auto doc = parse_json_file(manifest);
  const std::string source = manifest.string();
  detail::JsonFields f(doc, "", source);
  f.allow_only({"cameras", "track", "annotations", "ground_truth", "options", "metadata"});
  const auto dir = manifest.parent_path();

  Session s;
  const auto& cams = f.array("cameras");
  for (std::size_t i = 0; i < cams.size(); ++i) {
    if (cams[i].is_string()) {
      s.cameras.push_back(load_calibration(dir / cams[i].get<std::string>()));
    } else {
      s.cameras.push_back(
          calibration_from_json(cams[i], source + ": cameras[" + std::to_string(i) + "]"));
    }
  }
  if (s.cameras.empty()) f.fail("cameras", "at least one camera is required");
  if (f.has("options")) s.options = options_from_json(f.at("options"), source);
  if (f.has("metadata")) s.metadata = f.at("metadata");

  s.track = read_track_csv(dir / f.string("track"));
  s.annotations_path = dir / f.string("annotations");
  s.annotations = read_annotations_csv(s.annotations_path);
  if (f.has("ground_truth")) s.ground_truth = read_ground_truth_csv(dir / f.string("ground_truth"));

  for (std::size_t i = 0; i < s.annotations.size(); ++i) {
    try {
      validate_annotation(s, s.annotations[i]);
    } catch (const Error& e) {
      throw Error(e.code(), s.annotations_path.string() + ":" + std::to_string(i + 2) + ": " + e.what());
    }
  }
  validate_session(s);
  return s;
}

std::filesystem::path save_session(const Session& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["cameras"] = nlohmann::json::array();
  for (const auto& c : s.cameras) manifest["cameras"].push_back(calibration_to_json(c));
  manifest["track"] = "track.csv";
  manifest["annotations"] = "annotations.csv";
  manifest["ground_truth"] = "ground_truth.csv";
  manifest["options"] = options_to_json(s.options);
  manifest["metadata"] = s.metadata;

  detail::write_text_file(dir / "track.csv", track_to_csv(s.track));
  detail::write_text_file(dir / "annotations.csv", annotations_to_csv(s.annotations));
  detail::write_text_file(dir / "ground_truth.csv", ground_truth_to_csv(s.ground_truth));
  const auto path = dir / "session.json";
  detail::write_text_file(path, manifest.dump(2) + "\n");
  return path;
}

}  // namespace geopin
