#include <algorithm>
#include <cmath>
#include <numbers>
#include <fstream>
#include <random>

#include "doctest.h"
#include "geopin/error.hpp"
#include "geopin/pipeline.hpp"
#include "support.hpp"
#include "../src/text_io.hpp"

using namespace geopin;
using testing::error_code_of;
using testing::fixture;

namespace {

const GeoPoint kOrigin = GeoPoint::from_degrees(63.4195, 10.4065);

CameraCalibration front_camera(double pitch_deg = 10.0, double x = 0.0) {
  return {"front", CameraIntrinsics::pinhole(1920, 1208, {960, 960, 960, 604}),
          {x, 0.0, 1.5, 0.0, pitch_deg, 0.0}, 90.0};
}

// Stationary vehicle at kOrigin heading `heading` for t in [0, 1].
Session stationary_session(double heading = 0.0, double cam_x = 0.0) {
  Session s;
  s.cameras.push_back(front_camera(10.0, cam_x));
  std::vector<GnssFix> fixes;
  for (int i = 0; i <= 5; ++i) fixes.push_back({i * 0.2, kOrigin, heading, 0.0, FixQuality::RtkFixed});
  s.track = GnssTrack(fixes);
  return s;
}

// Pixel at which `cam` sees the rig-frame ground point (fwd, left, 0).
Pixel project(const CameraCalibration& cam, double fwd, double left) {
  const Eigen::Vector3d p(fwd, left, 0.0);
  const Eigen::Vector3d dir =
      cam.extrinsics.rotation().transpose() * (p - cam.extrinsics.position()).normalized();
  return ray_to_pixel(cam.intrinsics, dir);
}

// Adds a surveyed target at rig offset (fwd, left) for a vehicle heading
// north at kOrigin and an exact annotation of it.
void add_target(Session& s, const std::string& id, double fwd, double left, double t) {
  const double range = std::hypot(fwd, left);
  const double bearing = std::atan2(-left, fwd) * 180.0 / std::numbers::pi;
  s.ground_truth.push_back({id, inverse_haversine(kOrigin, range, Bearing::from_degrees(bearing)),
                            TargetKind::ControlMarker, TargetSource::Survey});
  const auto px = project(s.cameras[0], fwd, left);
  s.annotations.push_back({t, "front", px.x, px.y, id});
}

}  // namespace

TEST_CASE("dead-ahead annotation collapses to one destination step") {
  const auto s = load_session(fixture("minimal/session.json"));
  const auto est = geolocate(s.annotations[0], s);
  const double g = 1.5 / std::tan(10.0 * std::numbers::pi / 180.0);
  CHECK(est.ground_m == doctest::Approx(g).epsilon(1e-12));
  CHECK(est.d_m == est.ground_m);
  CHECK(est.bearing.deg == 0.0);
  const auto expected = inverse_haversine(s.track.fixes()[0].pos, g, Bearing::from_degrees(0.0));
  CHECK(est.estimate.lat == doctest::Approx(expected.lat).epsilon(1e-15));
  CHECK(est.estimate.lon == expected.lon);
  REQUIRE(est.error_m);
  CHECK(*est.error_m < 1e-6);
  CHECK(*est.true_distance_m == doctest::Approx(g).epsilon(1e-6));
  CHECK(est.flags.heading_mode == HeadingMode::Linear);
  CHECK(est.flags.distance_mode == DistanceMode::Ground);
}

TEST_CASE("linear and ray headings agree on the principal-point column") {
  auto s = stationary_session(37.0);
  s.annotations.push_back({0.5, "front", 960, 900, "x"});
  const auto lin = geolocate(s.annotations[0], s);
  s.options.heading_mode = HeadingMode::Ray;
  const auto ray = geolocate(s.annotations[0], s);
  CHECK(lin.bearing.deg == doctest::Approx(37.0).epsilon(1e-12));
  CHECK(ray.bearing.deg == doctest::Approx(37.0).epsilon(1e-12));
  CHECK_FALSE(lin.error_m.has_value());
}

TEST_CASE("ray heading recovers off-axis targets exactly") {
  auto s = stationary_session();
  s.options.heading_mode = HeadingMode::Ray;
  add_target(s, "a", 9.0, 2.0, 0.2);
  add_target(s, "b", 14.0, -3.5, 0.4);
  for (const auto& a : s.annotations) {
    const auto e = geolocate(a, s);
    REQUIRE(e.error_m);
    CHECK(*e.error_m < 0.01);
  }
  // The linear model is off for the same pixels (pinhole is not angle-linear).
  s.options.heading_mode = HeadingMode::Linear;
  CHECK(*geolocate(s.annotations[1], s).error_m > 0.01);
}

TEST_CASE("camera mounting offset and lever arm") {
  auto s = stationary_session(0.0, 1.2);
  s.options.heading_mode = HeadingMode::Ray;
  add_target(s, "a", 12.0, 0.0, 0.2);
  auto e = geolocate(s.annotations[0], s);
  CHECK(*e.error_m < 0.01);
  CHECK(e.ground_m == doctest::Approx(10.8));

  // Antenna 1 m behind the rig origin: the rig origin sits 1 m ahead of the fix.
  s.options.lever_arm_forward_m = 1.0;
  e = geolocate(s.annotations[0], s);
  CHECK(haversine_distance(e.vehicle.pos, kOrigin) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(*e.error_m == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("property: slant/ground switch is bounded by the Pythagoras term") {
  auto s = stationary_session(123.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(0, 1920), uy(700, 1208);
  for (int i = 0; i < 500; ++i) {
    s.annotations = {{0.3, "front", ux(rng), uy(rng), "x"}};
    for (auto hm : {HeadingMode::Linear, HeadingMode::Ray}) {
      s.options.heading_mode = hm;
      s.options.distance_mode = DistanceMode::Ground;
      const auto g = geolocate(s.annotations[0], s);
      s.options.distance_mode = DistanceMode::Slant;
      const auto sl = geolocate(s.annotations[0], s);
      const double shift = haversine_distance(g.estimate, sl.estimate);
      REQUIRE(shift <= 1.5 * 1.5 / (2.0 * g.d_m) + 1e-6);
      REQUIRE(sl.d_m >= g.d_m);
    }
  }
}

TEST_CASE("batch isolates bad annotations") {
  auto s = stationary_session();
  add_target(s, "a", 9.0, 0.0, 0.2);
  s.annotations.push_back({0.3, "front", 960, 100, "a"});  // sky
  add_target(s, "b", 12.0, 1.0, 0.4);
  const auto r = evaluate(s);
  CHECK(r.rows.size() == 2);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].code == ErrorCode::AboveHorizon);
  CHECK(r.failures[0].annotation.py == 100);
  const auto j = report_to_json(r);
  CHECK(j["failures"][0]["error"] == "AboveHorizon");
}

TEST_CASE("stationary layout rows sort by true distance") {
  auto s = stationary_session();
  s.options.heading_mode = HeadingMode::Ray;
  add_target(s, "far", 19.3, 0.0, 0.6);
  add_target(s, "near", 9.004, 0.0, 0.2);
  add_target(s, "mid", 11.78 * std::cos(0.08), -11.78 * std::sin(0.08), 0.4);
  const auto r = evaluate(s);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].target_id == "near");
  CHECK(r.rows[1].target_id == "mid");
  CHECK(r.rows[2].target_id == "far");
  CHECK(*r.rows[0].true_distance_m == doctest::Approx(9.004).epsilon(1e-9));
  CHECK(*r.rows[1].true_distance_m == doctest::Approx(11.78).epsilon(1e-9));
  CHECK(*r.rows[2].true_distance_m == doctest::Approx(19.3).epsilon(1e-9));
  CHECK(r.overall.count == 3);
  CHECK(r.overall.max < 0.01);
  // 5 m bins: [5,10), [10,15), [15,20).
  REQUIRE(r.by_distance.size() == 3);
  CHECK(r.by_distance[0].lo == 5.0);
  CHECK(r.by_distance[2].hi == 20.0);
  REQUIRE(r.by_speed.size() == 1);
  CHECK(r.by_speed[0].lo == 0.0);

  auto untracked = s;
  untracked.annotations.push_back({0.5, "front", 960, 900, "unknown"});
  const auto r2 = evaluate(untracked);
  CHECK(r2.rows.back().target_id == "unknown");
  CHECK_FALSE(r2.rows.back().error_m.has_value());
  CHECK(r2.overall.count == 3);
}

TEST_CASE("single annotation aggregates equal its error") {
  auto s = stationary_session();
  add_target(s, "a", 10.0, -2.0, 0.2);
  const auto r = evaluate(s);
  REQUIRE(r.rows.size() == 1);
  const double e = *r.rows[0].error_m;
  CHECK(r.overall.mean == e);
  CHECK(r.overall.median == e);
  CHECK(r.overall.p95 == e);
  CHECK(r.overall.max == e);
}

TEST_CASE("aggregate and bins recompute from rows") {
  const std::vector<double> v = {4, 1, 3, 2};
  const auto a = aggregate(v);
  CHECK(a.count == 4);
  CHECK(a.mean == 2.5);
  CHECK(a.median == 2.5);
  CHECK(a.p95 == doctest::Approx(3.85));
  CHECK(a.max == 4);
  CHECK(aggregate(std::vector<double>{}).count == 0);

  const std::vector<std::pair<double, double>> kv = {{1, 0.1}, {4.99, 0.3}, {5, 0.5}, {17, 1.0}};
  const auto bins = bin_errors(kv, 5.0);
  REQUIRE(bins.size() == 3);
  CHECK(bins[0].stats.count == 2);
  CHECK(bins[0].stats.mean == doctest::Approx(0.2));
  CHECK(bins[1].lo == 5.0);
  CHECK(bins[2].lo == 15.0);
}

TEST_CASE("empty session") {
  auto s = stationary_session();
  CHECK(error_code_of([&] { evaluate(s); }) == ErrorCode::EmptySession);
}

TEST_CASE("export formats") {
  testing::TempDir dir("export");
  EvaluationReport empty;
  export_report(empty, ReportFormat::Csv, dir / "empty.csv");
  CHECK(detail::read_text_file(dir / "empty.csv") ==
        "target_id,true_distance_m,error_m,speed_mps,heading_mode,distance_mode\n");

  auto s = stationary_session();
  add_target(s, "a", 9.004, 0.0, 0.2);
  add_target(s, "b", 11.78, 0.5, 0.4);
  add_target(s, "c", 19.3, -1.0, 0.6);
  s.options.heading_mode = HeadingMode::Ray;
  const auto r = evaluate(s);
  export_report(r, ReportFormat::Csv, dir / "r.csv");
  export_report(r, ReportFormat::Json, dir / "r.json");
  const auto csv = detail::read_text_file(dir / "r.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find(",ray,ground\n") != std::string::npos);

  const auto json = nlohmann::json::parse(detail::read_text_file(dir / "r.json"));
  CHECK(json == report_to_json(r));
  const auto from_json = report_csv_rows(json);
  const auto from_csv = parse_report_csv(csv);
  REQUIRE(from_json.size() == 3);
  CHECK(from_json == from_csv);

  CHECK(parse_report_format("json") == ReportFormat::Json);
  CHECK_FALSE(parse_report_format("xml").has_value());
  CHECK(error_code_of([&] { export_report(r, ReportFormat::Csv, dir / "no/such/dir/r.csv"); }) ==
        ErrorCode::IoError);
}

TEST_CASE("determinism: identical inputs give byte-identical reports") {
  const auto s = load_session(fixture("minimal/session.json"));
  const auto a = report_to_json(evaluate(s)).dump();
  const auto b = report_to_json(evaluate(load_session(fixture("minimal/session.json")))).dump();
  CHECK(a == b);
  CHECK(report_to_csv(evaluate(s)) == report_to_csv(evaluate(s)));
}
