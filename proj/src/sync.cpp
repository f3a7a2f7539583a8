#include "geopin/sync.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geopin/error.hpp"
#include "text_io.hpp"

namespace geopin {

namespace {

double wrap180(double deg) {
  double r = std::fmod(deg + 180.0, 360.0);
  if (r < 0.0) r += 360.0;
  return r - 180.0;
}

struct Neighbours {
  std::size_t before;
  std::size_t after;
};

Neighbours neighbours(std::size_t n, std::size_t i) {
  return {i == 0 ? 0 : i - 1, std::min(i + 1, n - 1)};
}

double segment_speed(const std::vector<GnssFix>& track, Neighbours nb) {
  const double dt = track[nb.after].t - track[nb.before].t;
  if (dt <= 0.0) return 0.0;
  return haversine_distance(track[nb.before].pos, track[nb.after].pos) / dt;
}

std::optional<double> course_over_ground(const std::vector<GnssFix>& track, std::size_t i) {
  if (track.size() < 2) return std::nullopt;
  const auto nb = neighbours(track.size(), i);
  if (segment_speed(track, nb) < kMinCourseSpeedMps) return std::nullopt;
  return initial_bearing(track[nb.before].pos, track[nb.after].pos).deg;
}

}  // namespace

std::string_view to_string(FixQuality q) {
  switch (q) {
    case FixQuality::RtkFixed: return "rtk_fixed";
    case FixQuality::RtkFloat: return "rtk_float";
    case FixQuality::Single: return "single";
  }
  return "single";
}

std::optional<FixQuality> parse_fix_quality(std::string_view s) {
  if (s == "rtk_fixed") return FixQuality::RtkFixed;
  if (s == "rtk_float") return FixQuality::RtkFloat;
  if (s == "single") return FixQuality::Single;
  return std::nullopt;
}

std::string_view to_string(PoseMode m) {
  return m == PoseMode::Interpolate ? "interpolate" : "nearest";
}

std::optional<PoseMode> parse_pose_mode(std::string_view s) {
  if (s == "interpolate") return PoseMode::Interpolate;
  if (s == "nearest") return PoseMode::Nearest;
  return std::nullopt;
}

DerivedHeading derive_heading(const std::vector<GnssFix>& track, std::size_t index) {
  if (index >= track.size()) throw Error(ErrorCode::InvalidArgument, "fix index out of range");
  if (track.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "course over ground needs neighbouring fixes");
  }
  if (auto cog = course_over_ground(track, index)) return {*cog, false};
  for (std::size_t j = index; j-- > 0;) {
    if (track[j].heading_deg) return {normalize_bearing(*track[j].heading_deg), true};
    if (auto cog = course_over_ground(track, j)) return {*cog, true};
  }
  throw Error(ErrorCode::StationaryAmbiguous,
              "vehicle stationary at t=" + std::to_string(track[index].t) +
                  " s and no earlier heading to hold");
}

GnssTrack::GnssTrack(std::vector<GnssFix> fixes) : fixes_(std::move(fixes)) {
  if (fixes_.empty()) throw Error(ErrorCode::InvalidArgument, "GNSS track is empty");
  for (std::size_t i = 1; i < fixes_.size(); ++i) {
    if (!(fixes_[i].t > fixes_[i - 1].t)) {
      throw Error(ErrorCode::InvalidArgument,
                  "GNSS track not strictly increasing at t=" + std::to_string(fixes_[i].t));
    }
    if (fixes_[i].t - fixes_[i - 1].t > 1.0) long_gaps_.push_back(i - 1);
  }

  headings_.resize(fixes_.size());
  speeds_.resize(fixes_.size());
  std::optional<double> last_known;
  for (std::size_t i = 0; i < fixes_.size(); ++i) {
    const auto& fix = fixes_[i];
    speeds_[i] = fix.speed_mps ? *fix.speed_mps
                               : (fixes_.size() < 2 ? 0.0
                                                    : segment_speed(fixes_, neighbours(fixes_.size(), i)));
    if (fix.heading_deg) {
      headings_[i] = DerivedHeading{normalize_bearing(*fix.heading_deg), false};
    } else if (auto cog = course_over_ground(fixes_, i)) {
      headings_[i] = DerivedHeading{*cog, false};
    } else if (last_known) {
      headings_[i] = DerivedHeading{*last_known, true};
    }
    if (headings_[i]) last_known = headings_[i]->deg;
  }
}

RigState pose_at(const GnssTrack& track, double t, PoseMode mode, double latency_offset) {
  if (track.size() == 0) throw Error(ErrorCode::InvalidArgument, "GNSS track is empty");
  const double query = t - latency_offset;
  const auto& fixes = track.fixes();
  if (query < track.start_time() - kTrackMarginS || query > track.end_time() + kTrackMarginS ||
      !std::isfinite(query)) {
    throw Error(ErrorCode::OutOfTrack, "time " + std::to_string(query) + " s outside track [" +
                                           std::to_string(track.start_time()) + ", " +
                                           std::to_string(track.end_time()) + "]");
  }

  auto state_of = [&](std::size_t i, bool clamped) {
    const auto& heading = track.resolved_heading(i);
    if (!heading) {
      throw Error(ErrorCode::MissingHeading,
                  "no heading source at t=" + std::to_string(fixes[i].t) + " s");
    }
    return RigState{t, fixes[i].pos, heading->deg, track.resolved_speed(i), clamped, heading->held};
  };

  if (query <= track.start_time()) return state_of(0, query < track.start_time());
  if (query >= track.end_time()) return state_of(track.size() - 1, query > track.end_time());

  const auto upper = std::upper_bound(fixes.begin(), fixes.end(), query,
                                      [](double q, const GnssFix& f) { return q < f.t; });
  const std::size_t j = static_cast<std::size_t>(upper - fixes.begin());
  const std::size_t i = j - 1;
  if (fixes[i].t == query) return state_of(i, false);

  if (mode == PoseMode::Nearest) {
    return state_of(query - fixes[i].t <= fixes[j].t - query ? i : j, false);
  }

  const RigState a = state_of(i, false);
  const RigState b = state_of(j, false);
  const double w = (query - fixes[i].t) / (fixes[j].t - fixes[i].t);
  RigState out;
  out.t = t;
  out.pos.lat = a.pos.lat + w * (b.pos.lat - a.pos.lat);
  out.pos.lon = normalize_lon(a.pos.lon + w * wrap180(b.pos.lon - a.pos.lon));
  out.theta_car_deg = normalize_bearing(a.theta_car_deg + w * wrap180(b.theta_car_deg - a.theta_car_deg));
  out.speed_mps = a.speed_mps + w * (b.speed_mps - a.speed_mps);
  out.held_heading = a.held_heading || b.held_heading;
  return out;
}

GnssTrack read_track_csv(const std::filesystem::path& path) {
  std::vector<GnssFix> fixes;
  detail::read_csv(path, "t,lat,lon,heading,speed,quality",
                   [&](const std::vector<std::string_view>& f, std::size_t line) {
                     if (f.size() != 6) detail::csv_fail(path, line, "expected 6 fields");
                     GnssFix fix;
                     auto t = detail::parse_double(f[0]);
                     auto lat = detail::parse_double(f[1]);
                     auto lon = detail::parse_double(f[2]);
                     if (!t || !std::isfinite(*t)) detail::csv_fail(path, line, "bad t");
                     if (!lat || !lon) detail::csv_fail(path, line, "bad lat/lon");
                     try {
                       fix.pos = GeoPoint::from_degrees(*lat, *lon);
                     } catch (const Error& e) {
                       detail::csv_fail(path, line, e.what());
                     }
                     fix.t = *t;
                     if (!f[3].empty()) {
                       auto h = detail::parse_double(f[3]);
                       if (!h || !std::isfinite(*h)) detail::csv_fail(path, line, "bad heading");
                       fix.heading_deg = *h;
                     }
                     if (!f[4].empty()) {
                       auto s = detail::parse_double(f[4]);
                       if (!s || !(*s >= 0.0)) detail::csv_fail(path, line, "bad speed");
                       fix.speed_mps = *s;
                     }
                     auto q = parse_fix_quality(f[5]);
                     if (!q) detail::csv_fail(path, line, "bad quality '" + std::string(f[5]) + "'");
                     fix.quality = *q;
                     if (!fixes.empty() && !(fix.t > fixes.back().t)) {
                       detail::csv_fail(path, line, "timestamps must be strictly increasing");
                     }
                     fixes.push_back(fix);
                   });
  if (fixes.empty()) detail::csv_fail(path, 2, "track has no fixes");
  return GnssTrack(std::move(fixes));
}

std::string track_to_csv(const GnssTrack& track) {
  std::ostringstream out;
  out << "t,lat,lon,heading,speed,quality\n";
  for (const auto& f : track.fixes()) {
    out << detail::format_double(f.t) << ',' << detail::format_double(f.pos.lat) << ','
        << detail::format_double(f.pos.lon) << ','
        << (f.heading_deg ? detail::format_double(*f.heading_deg) : "") << ','
        << (f.speed_mps ? detail::format_double(*f.speed_mps) : "") << ',' << to_string(f.quality)
        << '\n';
  }
  return out.str();
}

}  // namespace geopin
