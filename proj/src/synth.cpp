#include "geopin/synth.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <set>
#include <thread>

#include "geopin/error.hpp"
#include "json_fields.hpp"
#include "text_io.hpp"

namespace geopin {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::size_t sample_count(double duration_s, double rate_hz) {
  return static_cast<std::size_t>(std::floor(duration_s * rate_hz + 1e-9)) + 1;
}

[[noreturn]] void spec_fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::InvalidSpec, field + ": " + what);
}

}  // namespace

void ScenarioSpec::validate() const {
  if (!(duration_s > 0.0)) spec_fail("duration_s", "must be > 0");
  if (!(gnss_hz > 0.0)) spec_fail("rates.gnss_hz", "must be > 0");
  if (!(fps > 0.0)) spec_fail("rates.fps", "must be > 0");
  if (!(noise.pos_sigma_m >= 0.0)) spec_fail("noise.pos_sigma_m", "must be >= 0");
  if (!(noise.heading_sigma_deg >= 0.0)) spec_fail("noise.heading_sigma_deg", "must be >= 0");
  if (!(noise.pixel_sigma_px >= 0.0)) spec_fail("noise.pixel_sigma_px", "must be >= 0");
  if (!std::isfinite(noise.latency_s)) spec_fail("noise.latency_s", "must be finite");
  if (!std::isfinite(heading_deg)) spec_fail("heading_deg", "must be finite");
  for (std::size_t i = 0; i < speed_profile.size(); ++i) {
    const auto& seg = speed_profile[i];
    const std::string at = "speed_profile[" + std::to_string(i) + "]";
    if (!(seg.duration_s >= 0.0)) spec_fail(at + ".duration_s", "must be >= 0");
    if (!(seg.speed_mps >= 0.0)) spec_fail(at + ".speed_mps", "must be >= 0");
  }
  if (cameras.empty()) spec_fail("cameras", "at least one camera is required");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].id.empty() || !ids.insert(targets[i].id).second) {
      spec_fail("targets[" + std::to_string(i) + "].id", "must be unique and non-empty");
    }
  }
  if (annotation_radius_m && !(*annotation_radius_m > 0.0)) {
    spec_fail("annotation_radius_m", "must be > 0");
  }
}

ScenarioSpec scenario_from_json(const nlohmann::json& doc, const std::string& source) {
  using detail::JsonFields;
  try {
    JsonFields f(doc, "", source);
    f.allow_only({"start", "heading_deg", "speed_profile", "duration_s", "targets", "cameras",
                  "rates", "noise", "seed", "annotation_radius_m", "options"});
    ScenarioSpec spec;
    const auto start = f.object("start");
    start.allow_only({"lat", "lon"});
    try {
      spec.start = GeoPoint::from_degrees(start.number("lat"), start.number("lon"));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      start.fail("start", e.what());
    }
    spec.heading_deg = f.number("heading_deg");
    spec.duration_s = f.number("duration_s");
    if (f.has("options")) spec.options = options_from_json(f.at("options"), source);

    if (f.has("speed_profile")) {
      const auto& segs = f.array("speed_profile");
      for (std::size_t i = 0; i < segs.size(); ++i) {
        JsonFields s(segs[i], "speed_profile[" + std::to_string(i) + "]", source);
        s.allow_only({"duration_s", "speed_mps"});
        spec.speed_profile.push_back({s.number("duration_s"), s.number("speed_mps")});
      }
    }

    const auto& targets = f.array("targets");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::string at = "targets[" + std::to_string(i) + "]";
      JsonFields t(targets[i], at, source);
      t.allow_only({"id", "kind", "lat", "lon", "range_m", "bearing_deg", "forward_m", "left_m"});
      ScenarioTarget target;
      target.id = t.string("id");
      const std::string kind = t.string_or("kind", "control_marker");
      if (kind == "control_marker") {
        target.kind = TargetKind::ControlMarker;
      } else if (kind == "traffic_sign") {
        target.kind = TargetKind::TrafficSign;
      } else {
        t.fail(at + ".kind", "expected \"control_marker\" or \"traffic_sign\"");
      }
      const double heading = spec.heading_deg;
      const auto& earth = spec.options.earth;
      if (t.has("lat") || t.has("lon")) {
        target.pos = GeoPoint::from_degrees(t.number("lat"), t.number("lon"));
      } else if (t.has("range_m") || t.has("bearing_deg")) {
        const double range = t.number("range_m");
        if (!(range >= 0.0)) t.fail(at + ".range_m", "must be >= 0");
        target.pos = inverse_haversine(spec.start, range,
                                       Bearing::from_degrees(heading + t.number("bearing_deg")), earth);
      } else if (t.has("forward_m") || t.has("left_m")) {
        const double fwd = t.number("forward_m");
        const double left = t.number("left_m");
        const double range = std::hypot(fwd, left);
        target.pos = range == 0.0
                         ? spec.start
                         : inverse_haversine(spec.start, range,
                                             Bearing::from_degrees(heading + std::atan2(-left, fwd) / kDeg),
                                             earth);
      } else {
        t.fail(at, "needs lat/lon, range_m/bearing_deg or forward_m/left_m");
      }
      spec.targets.push_back(std::move(target));
    }

    const auto& cams = f.array("cameras");
    for (std::size_t i = 0; i < cams.size(); ++i) {
      spec.cameras.push_back(
          calibration_from_json(cams[i], source + ": cameras[" + std::to_string(i) + "]"));
    }

    if (f.has("rates")) {
      const auto rates = f.object("rates");
      rates.allow_only({"gnss_hz", "fps"});
      spec.gnss_hz = rates.number_or("gnss_hz", spec.gnss_hz);
      spec.fps = rates.number_or("fps", spec.fps);
    }
    if (f.has("noise")) {
      const auto n = f.object("noise");
      n.allow_only({"pos_sigma_m", "heading_sigma_deg", "pixel_sigma_px", "latency_s"});
      spec.noise = {n.number_or("pos_sigma_m", 0.0), n.number_or("heading_sigma_deg", 0.0),
                    n.number_or("pixel_sigma_px", 0.0), n.number_or("latency_s", 0.0)};
    }
    if (f.has("seed")) {
      const auto& seed = f.at("seed");
      if (seed.is_number_unsigned()) {
        spec.seed = seed.get<std::uint64_t>();
      } else if (seed.is_number_integer() && seed.get<long long>() >= 0) {
        spec.seed = static_cast<std::uint64_t>(seed.get<long long>());
      } else {
        f.fail("seed", "expected a non-negative integer");
      }
    }
    if (f.has("annotation_radius_m")) spec.annotation_radius_m = f.number("annotation_radius_m");
    spec.validate();
    return spec;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidSpec) throw;
    throw Error(ErrorCode::InvalidSpec, e.what());
  }
}

nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
  nlohmann::json j;
  j["start"] = {{"lat", spec.start.lat}, {"lon", spec.start.lon}};
  j["heading_deg"] = spec.heading_deg;
  j["speed_profile"] = nlohmann::json::array();
  for (const auto& s : spec.speed_profile) {
    j["speed_profile"].push_back({{"duration_s", s.duration_s}, {"speed_mps", s.speed_mps}});
  }
  j["duration_s"] = spec.duration_s;
  j["targets"] = nlohmann::json::array();
  for (const auto& t : spec.targets) {
    j["targets"].push_back(
        {{"id", t.id}, {"kind", to_string(t.kind)}, {"lat", t.pos.lat}, {"lon", t.pos.lon}});
  }
  j["cameras"] = nlohmann::json::array();
  for (const auto& c : spec.cameras) j["cameras"].push_back(calibration_to_json(c));
  j["rates"] = {{"gnss_hz", spec.gnss_hz}, {"fps", spec.fps}};
  j["noise"] = {{"pos_sigma_m", spec.noise.pos_sigma_m},
                {"heading_sigma_deg", spec.noise.heading_sigma_deg},
                {"pixel_sigma_px", spec.noise.pixel_sigma_px},
                {"latency_s", spec.noise.latency_s}};
  j["seed"] = spec.seed;
  if (spec.annotation_radius_m) j["annotation_radius_m"] = *spec.annotation_radius_m;
  j["options"] = options_to_json(spec.options);
  return j;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidSpec, path.string() + ": " + e.what());
  }
  return scenario_from_json(doc, path.string());
}

TruthSample true_state(const ScenarioSpec& spec, double t) {
  double travelled = 0.0;
  double speed = 0.0;
  double elapsed = 0.0;
  bool placed = false;
  for (const auto& seg : spec.speed_profile) {
    speed = seg.speed_mps;
    if (t < elapsed + seg.duration_s) {
      travelled += seg.speed_mps * (t - elapsed);
      placed = true;
      break;
    }
    travelled += seg.speed_mps * seg.duration_s;
    elapsed += seg.duration_s;
  }
  if (!placed) travelled += speed * std::max(0.0, t - elapsed);
  travelled = std::max(0.0, travelled);

  const auto& earth = spec.options.earth;
  const Bearing heading = Bearing::from_degrees(spec.heading_deg);
  TruthSample s;
  s.t = t;
  s.speed_mps = speed;
  s.pos = inverse_haversine(spec.start, travelled, heading, earth);
  // Forward azimuth of the great circle at the current point.
  const double delta = travelled / earth.sphere_radius_m;
  const double phi1 = spec.start.lat * kDeg;
  const double theta = heading.deg * kDeg;
  const double fwd = std::atan2(std::sin(theta) * std::cos(phi1),
                                std::cos(delta) * std::cos(phi1) * std::cos(theta) -
                                    std::sin(phi1) * std::sin(delta));
  s.heading_deg = normalize_bearing(fwd / kDeg);
  return s;
}

double GaussianSource::next() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = 1.0 - static_cast<double>(engine_() >> 11) * kScale;  // (0, 1]
  const double u2 = static_cast<double>(engine_() >> 11) * kScale;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

GeneratedScenario generate(const ScenarioSpec& spec) {
  spec.validate();
  const auto& earth = spec.options.earth;
  GaussianSource noise(spec.seed);

  std::vector<GnssFix> fixes;
  const std::size_t n_fixes = sample_count(spec.duration_s, spec.gnss_hz);
  fixes.reserve(n_fixes);
  for (std::size_t k = 0; k < n_fixes; ++k) {
    const double stamp = static_cast<double>(k) / spec.gnss_hz;
    const TruthSample truth = true_state(spec, stamp + spec.noise.latency_s);
    GnssFix fix;
    fix.t = stamp;
    const double north = noise.next(spec.noise.pos_sigma_m);
    const double east = noise.next(spec.noise.pos_sigma_m);
    const double offset = std::hypot(north, east);
    fix.pos = offset == 0.0 ? truth.pos
                            : inverse_haversine(truth.pos, offset,
                                                Bearing::from_degrees(std::atan2(east, north) / kDeg),
                                                earth);
    fix.heading_deg = normalize_bearing(truth.heading_deg + noise.next(spec.noise.heading_sigma_deg));
    fix.speed_mps = truth.speed_mps;
    fix.quality = FixQuality::RtkFixed;
    fixes.push_back(fix);
  }

  GeneratedScenario out;
  std::vector<bool> seen(spec.targets.size(), false);
  const std::size_t n_frames = sample_count(spec.duration_s, spec.fps);
  for (std::size_t k = 0; k < n_frames; ++k) {
    const double t = static_cast<double>(k) / spec.fps;
    const TruthSample truth = true_state(spec, t);
    out.truth.push_back(truth);
    for (const auto& cam : spec.cameras) {
      const Eigen::Matrix3d rig_to_cam = cam.extrinsics.rotation().transpose();
      for (std::size_t i = 0; i < spec.targets.size(); ++i) {
        const auto& target = spec.targets[i];
        const double range = haversine_distance(truth.pos, target.pos, earth);
        if (spec.annotation_radius_m && range > *spec.annotation_radius_m) continue;
        Eigen::Vector3d rig_point = Eigen::Vector3d::Zero();
        if (range > 1e-9) {
          const double rel =
              (initial_bearing(truth.pos, target.pos).deg - truth.heading_deg) * kDeg;
          rig_point = {range * std::cos(rel), -range * std::sin(rel), 0.0};
        }
        const Eigen::Vector3d dir = (rig_to_cam * (rig_point - cam.extrinsics.position())).normalized();
        Pixel px;
        try {
          px = ray_to_pixel(cam.intrinsics, dir);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::BehindCamera || e.code() == ErrorCode::OutsideFieldOfView) {
            continue;
          }
          throw;
        }
        px.x += noise.next(spec.noise.pixel_sigma_px);
        px.y += noise.next(spec.noise.pixel_sigma_px);
        if (!cam.intrinsics.contains(px.x, px.y)) continue;
        seen[i] = true;
        out.session.annotations.push_back({t, cam.id, px.x, px.y, target.id});
      }
    }
  }

  for (std::size_t i = 0; i < spec.targets.size(); ++i) {
    if (!seen[i]) out.warnings.push_back("NoVisibleTarget: " + spec.targets[i].id);
    out.session.ground_truth.push_back(
        {spec.targets[i].id, spec.targets[i].pos, spec.targets[i].kind, TargetSource::Survey});
  }
  out.session.cameras = spec.cameras;
  out.session.track = GnssTrack(std::move(fixes));
  out.session.options = spec.options;
  out.session.metadata = {{"generator", "geopin synth"},
                          {"rng", kRngAlgorithm},
                          {"seed", spec.seed},
                          {"warnings", out.warnings}};
  validate_session(out.session);
  return out;
}

MonteCarloSummary monte_carlo(const ScenarioSpec& spec, std::size_t trials,
                              const MonteCarloOptions& options) {
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  spec.validate();

  struct TrialResult {
    std::vector<std::pair<double, double>> distance_error;
    std::vector<double> speed_kmh;
    std::size_t failures = 0;
    std::exception_ptr error;
  };
  std::vector<TrialResult> results(trials);

  auto run_trial = [&](std::size_t i) {
    auto& r = results[i];
    try {
      ScenarioSpec trial = spec;
      trial.seed = derive_seed(spec.seed, i);
      const auto generated = generate(trial);
      if (generated.session.annotations.empty()) return;
      const auto report = evaluate(generated.session, options.report);
      r.failures = report.failures.size();
      for (const auto& row : report.rows) {
        if (!row.error_m) continue;
        if (options.max_true_distance_m && *row.true_distance_m > *options.max_true_distance_m) {
          continue;
        }
        r.distance_error.emplace_back(*row.true_distance_m, *row.error_m);
        r.speed_kmh.push_back(row.vehicle.speed_mps * 3.6);
      }
    } catch (...) {
      r.error = std::current_exception();
    }
  };

  unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
  if (threads == 1) {
    for (std::size_t i = 0; i < trials; ++i) run_trial(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < trials; i = next++) run_trial(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  MonteCarloSummary summary;
  summary.trials = trials;
  summary.seed = spec.seed;
  std::vector<std::pair<double, double>> by_distance;
  std::vector<std::pair<double, double>> by_speed;
  for (const auto& r : results) {
    if (r.error) std::rethrow_exception(r.error);
    summary.failures += r.failures;
    for (std::size_t k = 0; k < r.distance_error.size(); ++k) {
      summary.errors.push_back(r.distance_error[k].second);
      by_distance.push_back(r.distance_error[k]);
      by_speed.emplace_back(r.speed_kmh[k], r.distance_error[k].second);
    }
  }
  summary.estimates = summary.errors.size();
  summary.overall = aggregate(summary.errors);
  summary.by_distance = bin_errors(by_distance, options.report.distance_bin_m);
  summary.by_speed = bin_errors(by_speed, options.report.speed_bin_kmh);
  return summary;
}

nlohmann::json monte_carlo_to_json(const MonteCarloSummary& s) {
  auto agg = [](const Aggregate& a) {
    return nlohmann::json{{"count", a.count}, {"mean_m", a.mean}, {"median_m", a.median},
                          {"p95_m", a.p95},   {"max_m", a.max}};
  };
  auto bins = [&](const std::vector<BinAggregate>& v) {
    auto out = nlohmann::json::array();
    for (const auto& b : v) {
      auto j = agg(b.stats);
      j["lo"] = b.lo;
      j["hi"] = b.hi;
      out.push_back(std::move(j));
    }
    return out;
  };
  return {{"trials", s.trials},       {"estimates", s.estimates},     {"failures", s.failures},
          {"seed", s.seed},           {"rng", s.rng},                 {"overall", agg(s.overall)},
          {"by_distance", bins(s.by_distance)}, {"by_speed", bins(s.by_speed)}};
}

}  // namespace geopin
