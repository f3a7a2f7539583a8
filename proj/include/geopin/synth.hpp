#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "geopin/camera.hpp"
#include "geopin/geodesy.hpp"
#include "geopin/pipeline.hpp"
#include "geopin/session.hpp"
#include "json.hpp"

namespace geopin {

struct SpeedSegment {
  double duration_s = 0.0;
  double speed_mps = 0.0;
};

struct ScenarioTarget {
  std::string id;
  TargetKind kind = TargetKind::ControlMarker;
  GeoPoint pos;
};

struct NoiseSpec {
  double pos_sigma_m = 0.0;  ///< per horizontal axis
  double heading_sigma_deg = 0.0;
  double pixel_sigma_px = 0.0;  ///< per image axis
  /// GNSS timestamps lag the measured state by this much: the fix stamped t
  /// reports the vehicle at t + latency_s.
  double latency_s = 0.0;
};

/// Straight-line drive along a great circle with a piecewise-constant speed
/// profile. The last segment's speed continues until `duration_s`.
struct ScenarioSpec {
  GeoPoint start;
  double heading_deg = 0.0;
  std::vector<SpeedSegment> speed_profile;
  double duration_s = 0.0;
  std::vector<ScenarioTarget> targets;
  std::vector<CameraCalibration> cameras;
  double gnss_hz = 5.0;
  double fps = 30.0;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  /// Only annotate targets within this ground range of the rig origin.
  std::optional<double> annotation_radius_m;
  SessionOptions options;

  /// Throws InvalidSpec naming the offending field.
  void validate() const;
};

/// Scenario JSON. Targets are given as {id, kind?, lat, lon},
/// {id, kind?, range_m, bearing_deg} (bearing relative to the start heading,
/// clockwise) or {id, kind?, forward_m, left_m}, all relative to `start`.
ScenarioSpec scenario_from_json(const nlohmann::json& doc, const std::string& source);
nlohmann::json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec load_scenario(const std::filesystem::path& path);

struct TruthSample {
  double t = 0.0;
  GeoPoint pos;
  double heading_deg = 0.0;
  double speed_mps = 0.0;
};

/// Exact vehicle state at time t.
TruthSample true_state(const ScenarioSpec& spec, double t);

struct GeneratedScenario {
  Session session;
  std::vector<TruthSample> truth;  ///< one per frame instant
  std::vector<std::string> warnings;
};

inline constexpr const char* kRngAlgorithm = "mt19937_64/box-muller";

/// Standard normal deviates from mt19937_64 via Box-Muller, so sequences are
/// reproducible across standard libraries.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  double next();
  double next(double sigma) { return sigma == 0.0 ? 0.0 : sigma * next(); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Emits GNSS fixes at gnss_hz and, for every frame at fps, one annotation per
/// camera per visible target, forward-projected from the true state.
/// Deterministic for a given spec.
GeneratedScenario generate(const ScenarioSpec& spec);

/// SplitMix64 of (seed, index); used for per-trial seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct MonteCarloOptions {
  /// Only count estimates whose true distance is at most this.
  std::optional<double> max_true_distance_m;
  ReportConfig report;
  unsigned threads = 0;  ///< 0 = hardware concurrency
};

struct MonteCarloSummary {
  std::size_t trials = 0;
  std::size_t estimates = 0;
  std::size_t failures = 0;
  Aggregate overall;
  std::vector<BinAggregate> by_distance;
  std::vector<BinAggregate> by_speed;
  std::uint64_t seed = 0;
  std::string rng = kRngAlgorithm;
  std::vector<double> errors;  ///< pooled, in trial order
};

/// Runs generate + evaluate per trial with seeds derived from spec.seed.
/// Result is independent of thread scheduling.
MonteCarloSummary monte_carlo(const ScenarioSpec& spec, std::size_t trials,
                              const MonteCarloOptions& options = {});
nlohmann::json monte_carlo_to_json(const MonteCarloSummary& summary);

}  // namespace geopin
