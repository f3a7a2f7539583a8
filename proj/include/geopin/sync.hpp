#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geopin/geodesy.hpp"

namespace geopin {

enum class FixQuality { RtkFixed, RtkFloat, Single };

std::string_view to_string(FixQuality q);
std::optional<FixQuality> parse_fix_quality(std::string_view s);

struct GnssFix {
  double t = 0.0;  ///< session clock, seconds
  GeoPoint pos;
  std::optional<double> heading_deg;
  std::optional<double> speed_mps;
  FixQuality quality = FixQuality::RtkFixed;

  friend bool operator==(const GnssFix&, const GnssFix&) = default;
};

struct RigState {
  double t = 0.0;
  GeoPoint pos;
  double theta_car_deg = 0.0;
  double speed_mps = 0.0;
  bool clamped = false;       ///< query fell in the end margin
  bool held_heading = false;  ///< heading carried over from an earlier fix
};

enum class PoseMode { Interpolate, Nearest };

std::string_view to_string(PoseMode m);
std::optional<PoseMode> parse_pose_mode(std::string_view s);

struct DerivedHeading {
  double deg = 0.0;
  bool held = false;
};

/// Speed gate for course over ground.
inline constexpr double kMinCourseSpeedMps = 0.5;
/// Queries may fall this far outside the track and clamp to the end fix.
inline constexpr double kTrackMarginS = 0.2;

/// Course over ground at fix `index` from its neighbours. Below the speed gate
/// the last known heading (INS or moving course) is held and flagged; with
/// nothing to hold it throws StationaryAmbiguous.
DerivedHeading derive_heading(const std::vector<GnssFix>& track, std::size_t index);

/// Immutable, validated GNSS track. Headings and speeds missing from the fixes
/// are resolved once at construction.
class GnssTrack {
 public:
  GnssTrack() = default;
  /// Throws InvalidArgument if empty or timestamps are not strictly increasing.
  explicit GnssTrack(std::vector<GnssFix> fixes);

  const std::vector<GnssFix>& fixes() const { return fixes_; }
  std::size_t size() const { return fixes_.size(); }
  double start_time() const { return fixes_.front().t; }
  double end_time() const { return fixes_.back().t; }

  /// Indices i where the gap to fix i+1 exceeds one second.
  const std::vector<std::size_t>& long_gaps() const { return long_gaps_; }

  const std::optional<DerivedHeading>& resolved_heading(std::size_t i) const {
    return headings_[i];
  }
  double resolved_speed(std::size_t i) const { return speeds_[i]; }

 private:
  std::vector<GnssFix> fixes_;
  std::vector<std::optional<DerivedHeading>> headings_;
  std::vector<double> speeds_;
  std::vector<std::size_t> long_gaps_;
};

/// Vehicle state at camera time `t`, read from the track at
/// t - latency_offset. Throws OutOfTrack or MissingHeading.
RigState pose_at(const GnssTrack& track, double t, PoseMode mode, double latency_offset = 0.0);

/// CSV with header `t,lat,lon,heading,speed,quality`; heading/speed may be
/// empty.
GnssTrack read_track_csv(const std::filesystem::path& path);
std::string track_to_csv(const GnssTrack& track);

}  // namespace geopin
