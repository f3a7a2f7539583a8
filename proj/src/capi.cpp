#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "geopin/error.hpp"
#include "geopin/geodesy.hpp"
#include "geopin/geopin.h"
#include "geopin/nvdb.hpp"
#include "geopin/pipeline.hpp"
#include "geopin/session.hpp"
#include "geopin/synth.hpp"
#include "json.hpp"

struct geopin_session {
  geopin::Session rep;
};

struct geopin_report {
  geopin::EvaluationReport rep;
};

namespace {

using geopin::ErrorCode;

thread_local std::string g_last_error;

// Thrown for malformed request bodies.
struct BadRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

geopin_status status_of(ErrorCode code) {
  // geopin_status mirrors ErrorCode order, offset by GEOPIN_OK.
  return static_cast<geopin_status>(static_cast<int>(code) + 1);
}

template <typename Fn>
geopin_status guarded(Fn&& fn) {
  try {
    fn();
    return GEOPIN_OK;
  } catch (const geopin::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const BadRequest& e) {
    g_last_error = e.what();
    return GEOPIN_E_BAD_REQUEST;
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return GEOPIN_E_BAD_REQUEST;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GEOPIN_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return GEOPIN_E_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) {
    throw geopin::Error(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

geopin::EarthModel earth_with(double radius_m) {
  geopin::EarthModel earth;
  if (radius_m != 0.0) earth.sphere_radius_m = radius_m;
  earth.validate();
  return earth;
}

nlohmann::json parse_request(const char* text) {
  require(text, "request");
  try {
    auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw BadRequest("request body must be a JSON object");
    return doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw BadRequest(std::string("malformed JSON: ") + e.what());
  }
}

double request_number(const nlohmann::json& doc, const char* field) {
  if (!doc.contains(field)) throw BadRequest(std::string("field '") + field + "': missing");
  const auto& v = doc[field];
  if (!v.is_number()) throw BadRequest(std::string("field '") + field + "': expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw BadRequest(std::string("field '") + field + "': not finite");
  return d;
}

std::string request_string(const nlohmann::json& doc, const char* field, bool required) {
  if (!doc.contains(field) || doc[field].is_null()) {
    if (required) throw BadRequest(std::string("field '") + field + "': missing");
    return {};
  }
  if (!doc[field].is_string()) {
    throw BadRequest(std::string("field '") + field + "': expected a string");
  }
  return doc[field].get<std::string>();
}

geopin::Annotation annotation_from_request(const nlohmann::json& doc, bool target_required) {
  for (const auto& [key, value] : doc.items()) {
    if (key != "camera_id" && key != "t" && key != "px" && key != "py" && key != "target_id") {
      throw BadRequest("field '" + key + "': unknown field");
    }
  }
  geopin::Annotation a;
  a.camera_id = request_string(doc, "camera_id", true);
  a.t = request_number(doc, "t");
  a.px = request_number(doc, "px");
  a.py = request_number(doc, "py");
  a.target_id = request_string(doc, "target_id", target_required);
  if (target_required && a.target_id.empty()) throw BadRequest("field 'target_id': empty");
  if (a.target_id.find_first_of(",\n\r") != std::string::npos ||
      a.camera_id.find_first_of(",\n\r") != std::string::npos) {
    throw BadRequest("ids must not contain commas or newlines");
  }
  return a;
}

}  // namespace

extern "C" {

const char* geopin_status_name(geopin_status status) {
  switch (status) {
    case GEOPIN_OK: return "Ok";
    case GEOPIN_E_BAD_REQUEST: return "BadRequest";
    case GEOPIN_E_INTERNAL: return "Internal";
    default: break;
  }
  if (status > GEOPIN_OK && status < GEOPIN_E_BAD_REQUEST) {
    // Names are static string literals, so data() is NUL-terminated.
    return geopin::error_name(static_cast<ErrorCode>(static_cast<int>(status) - 1)).data();
  }
  return "Unknown";
}

const char* geopin_last_error(void) { return g_last_error.c_str(); }

void geopin_free_string(char* s) { std::free(s); }

geopin_status geopin_haversine_distance(double lat1, double lon1, double lat2, double lon2,
                                        double radius_m, double* out_m) {
  return guarded([&] {
    require(out_m, "out_m");
    *out_m = geopin::haversine_distance(geopin::GeoPoint::from_degrees(lat1, lon1),
                                        geopin::GeoPoint::from_degrees(lat2, lon2),
                                        earth_with(radius_m));
  });
}

geopin_status geopin_initial_bearing(double lat1, double lon1, double lat2, double lon2,
                                     double* out_deg) {
  return guarded([&] {
    require(out_deg, "out_deg");
    *out_deg = geopin::initial_bearing(geopin::GeoPoint::from_degrees(lat1, lon1),
                                       geopin::GeoPoint::from_degrees(lat2, lon2))
                   .deg;
  });
}

geopin_status geopin_inverse_haversine(double lat, double lon, double distance_m,
                                       double bearing_deg, double radius_m, double* out_lat,
                                       double* out_lon) {
  return guarded([&] {
    require(out_lat, "out_lat");
    require(out_lon, "out_lon");
    const auto p = geopin::inverse_haversine(geopin::GeoPoint::from_degrees(lat, lon), distance_m,
                                             geopin::Bearing::from_degrees(bearing_deg),
                                             earth_with(radius_m));
    *out_lat = p.lat;
    *out_lon = p.lon;
  });
}

geopin_status geopin_geodesic_distance(double lat1, double lon1, double lat2, double lon2,
                                       double* out_m, int* out_fallback) {
  return guarded([&] {
    require(out_m, "out_m");
    const auto d = geopin::geodesic_error(geopin::GeoPoint::from_degrees(lat1, lon1),
                                          geopin::GeoPoint::from_degrees(lat2, lon2));
    *out_m = d.meters;
    if (out_fallback != nullptr) *out_fallback = d.fallback ? 1 : 0;
  });
}

geopin_status geopin_wgs84_to_utm33(double lat, double lon, double* out_easting,
                                    double* out_northing) {
  return guarded([&] {
    require(out_easting, "out_easting");
    require(out_northing, "out_northing");
    const auto c = geopin::wgs84_to_utm33(geopin::GeoPoint::from_degrees(lat, lon));
    *out_easting = c.easting;
    *out_northing = c.northing;
  });
}

geopin_status geopin_utm33_to_wgs84(double easting, double northing, double* out_lat,
                                    double* out_lon) {
  return guarded([&] {
    require(out_lat, "out_lat");
    require(out_lon, "out_lon");
    const auto p = geopin::utm33_to_wgs84({easting, northing});
    *out_lat = p.lat;
    *out_lon = p.lon;
  });
}

geopin_status geopin_session_load(const char* manifest_path, geopin_session** out) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(out, "out");
    *out = new geopin_session{geopin::load_session(manifest_path)};
  });
}

void geopin_session_free(geopin_session* session) { delete session; }

namespace {

// Caller-supplied overrides are request input, so bad values are BadRequest.
geopin::SessionOptions override_options(const geopin::SessionOptions& base, const char* json) {
  auto merged = geopin::options_to_json(base);
  merged.merge_patch(parse_request(json));
  try {
    return geopin::options_from_json(merged, "options");
  } catch (const geopin::Error& e) {
    if (e.code() != ErrorCode::ParseError) throw;
    throw BadRequest(e.what());
  }
}

}  // namespace

geopin_status geopin_session_with_options(const geopin_session* session, const char* options_json,
                                          geopin_session** out) {
  return guarded([&] {
    require(session, "session");
    require(out, "out");
    auto copy = std::make_unique<geopin_session>(*session);
    copy->rep.options = override_options(session->rep.options, options_json);
    geopin::validate_session(copy->rep);
    *out = copy.release();
  });
}

geopin_status geopin_session_with_annotation(const geopin_session* session,
                                             const char* annotation_json, geopin_session** out) {
  return guarded([&] {
    require(session, "session");
    require(out, "out");
    const auto a = annotation_from_request(parse_request(annotation_json), true);
    geopin::validate_annotation(session->rep, a);
    auto copy = std::make_unique<geopin_session>(*session);
    copy->rep.annotations.push_back(a);
    *out = copy.release();
  });
}

geopin_status geopin_session_append_annotation_file(const geopin_session* session,
                                                    const char* annotation_json) {
  return guarded([&] {
    require(session, "session");
    const auto a = annotation_from_request(parse_request(annotation_json), true);
    geopin::validate_annotation(session->rep, a);
    const auto& path = session->rep.annotations_path;
    if (path.empty()) {
      throw geopin::Error(ErrorCode::IoError, "session has no annotation file");
    }
    std::ofstream log(path, std::ios::binary | std::ios::app);
    if (!log) throw geopin::Error(ErrorCode::IoError, "cannot append to " + path.string());
    log << geopin::annotation_csv_line(a);
    if (!log.flush()) throw geopin::Error(ErrorCode::IoError, "append failed for " + path.string());
  });
}

geopin_status geopin_session_info_json(const geopin_session* session, char** out_json) {
  return guarded([&] {
    require(session, "session");
    require(out_json, "out_json");
    const auto& s = session->rep;
    nlohmann::json info;
    info["cameras"] = nlohmann::json::array();
    for (const auto& c : s.cameras) info["cameras"].push_back(geopin::calibration_to_json(c));
    info["track"] = {{"start_t", s.track.start_time()},
                     {"end_t", s.track.end_time()},
                     {"fixes", s.track.size()},
                     {"long_gaps", s.track.long_gaps()}};
    info["ground_truth"] = nlohmann::json::array();
    for (const auto& t : s.ground_truth) {
      info["ground_truth"].push_back({{"target_id", t.target_id},
                                      {"kind", geopin::to_string(t.kind)},
                                      {"lat", t.pos.lat},
                                      {"lon", t.pos.lon},
                                      {"source", geopin::to_string(t.source)}});
    }
    info["annotations"] = nlohmann::json::array();
    for (const auto& a : s.annotations) {
      info["annotations"].push_back(
          {{"t", a.t}, {"camera_id", a.camera_id}, {"px", a.px}, {"py", a.py}, {"target_id", a.target_id}});
    }
    info["annotation_count"] = s.annotations.size();
    info["annotations_path"] = s.annotations_path.string();
    info["options"] = geopin::options_to_json(s.options);
    info["metadata"] = s.metadata;
    *out_json = dup_string(info.dump());
  });
}

geopin_status geopin_session_save(const geopin_session* session, const char* dir) {
  return guarded([&] {
    require(session, "session");
    require(dir, "dir");
    geopin::save_session(session->rep, dir);
  });
}

geopin_status geopin_geolocate_json(const geopin_session* session, const char* request_json,
                                    char** out_json) {
  return guarded([&] {
    require(session, "session");
    require(out_json, "out_json");
    const auto a = annotation_from_request(parse_request(request_json), false);
    const auto& cam = session->rep.camera(a.camera_id);
    if (!cam.intrinsics.contains(a.px, a.py)) {
      throw geopin::Error(ErrorCode::PixelOutOfBounds,
                          "pixel outside camera '" + cam.id + "' image bounds");
    }
    *out_json = dup_string(geopin::estimate_to_json(geopin::geolocate(a, session->rep)).dump());
  });
}

geopin_status geopin_evaluate(const geopin_session* session, geopin_report** out) {
  return guarded([&] {
    require(session, "session");
    require(out, "out");
    *out = new geopin_report{geopin::evaluate(session->rep)};
  });
}

void geopin_report_free(geopin_report* report) { delete report; }

size_t geopin_report_row_count(const geopin_report* report) {
  return report == nullptr ? 0 : report->rep.rows.size();
}

size_t geopin_report_failure_count(const geopin_report* report) {
  return report == nullptr ? 0 : report->rep.failures.size();
}

geopin_status geopin_report_json(const geopin_report* report, char** out_json) {
  return guarded([&] {
    require(report, "report");
    require(out_json, "out_json");
    *out_json = dup_string(geopin::report_to_json(report->rep).dump());
  });
}

geopin_status geopin_report_export(const geopin_report* report, const char* format,
                                   const char* path) {
  return guarded([&] {
    require(report, "report");
    require(format, "format");
    require(path, "path");
    const auto fmt = geopin::parse_report_format(format);
    if (!fmt) {
      throw geopin::Error(ErrorCode::InvalidArgument,
                          std::string("unknown report format '") + format + "'");
    }
    geopin::export_report(report->rep, *fmt, path);
  });
}

geopin_status geopin_synth_generate(const char* spec_path, const char* out_dir,
                                    const uint64_t* seed, char** out_json) {
  return guarded([&] {
    require(spec_path, "spec_path");
    require(out_dir, "out_dir");
    auto spec = geopin::load_scenario(spec_path);
    if (seed != nullptr) spec.seed = *seed;
    const auto generated = geopin::generate(spec);
    const auto manifest = geopin::save_session(generated.session, out_dir);
    if (out_json != nullptr) {
      const nlohmann::json info = {{"manifest", manifest.string()},
                                   {"fixes", generated.session.track.size()},
                                   {"annotations", generated.session.annotations.size()},
                                   {"targets", generated.session.ground_truth.size()},
                                   {"warnings", generated.warnings},
                                   {"seed", spec.seed}};
      *out_json = dup_string(info.dump());
    }
  });
}

geopin_status geopin_monte_carlo(const char* spec_path, uint64_t trials,
                                 double max_true_distance_m, const char* options_json,
                                 char** out_json) {
  return guarded([&] {
    require(spec_path, "spec_path");
    require(out_json, "out_json");
    auto spec = geopin::load_scenario(spec_path);
    if (options_json != nullptr) {
      spec.options = override_options(spec.options, options_json);
    }
    geopin::MonteCarloOptions opts;
    if (max_true_distance_m > 0.0) opts.max_true_distance_m = max_true_distance_m;
    const auto summary = geopin::monte_carlo(spec, static_cast<std::size_t>(trials), opts);
    *out_json = dup_string(geopin::monte_carlo_to_json(summary).dump());
  });
}

geopin_status geopin_nvdb_fetch_signs(double min_easting, double min_northing, double max_easting,
                                      double max_northing, const char* config_path,
                                      char** out_csv) {
  return guarded([&] {
    require(out_csv, "out_csv");
    std::optional<std::filesystem::path> config;
    if (config_path != nullptr) config = config_path;
    const auto targets = geopin::nvdb_fetch_signs(
        {min_easting, min_northing, max_easting, max_northing}, geopin::resolve_nvdb_config(config));
    *out_csv = dup_string(geopin::ground_truth_to_csv(targets));
  });
}

}  // extern "C"
