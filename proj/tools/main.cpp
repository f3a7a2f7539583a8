#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "capi.hpp"
#include "json.hpp"
#include "serve.hpp"

using namespace geopin_tools;

namespace {

// Fixed-point with `decimals`, trailing zeros trimmed but one kept after the
// point, so 15 prints as "15.0".
std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  if (s == "-0.0") s = "0.0";
  return s;
}

void print_aggregate(const char* label, const nlohmann::json& a) {
  std::printf("%-12s n=%-6zu mean=%.3f  median=%.3f  p95=%.3f  max=%.3f\n", label,
              a["count"].get<std::size_t>(), a["mean_m"].get<double>(),
              a["median_m"].get<double>(), a["p95_m"].get<double>(), a["max_m"].get<double>());
}

void print_bins(const char* title, const char* unit, const nlohmann::json& bins) {
  if (bins.empty()) return;
  std::printf("%s\n", title);
  for (const auto& b : bins) {
    char label[64];
    std::snprintf(label, sizeof label, "  [%g, %g) %s", b["lo"].get<double>(), b["hi"].get<double>(),
                  unit);
    print_aggregate(label, b);
  }
}

struct ModeFlags {
  std::optional<std::string> heading_mode;
  std::optional<std::string> distance_mode;
  std::optional<std::string> pose_mode;
  std::optional<double> latency;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--heading-mode", heading_mode, "linear|ray")
        ->check(CLI::IsMember({"linear", "ray"}));
    cmd->add_option("--distance-mode", distance_mode, "ground|slant")
        ->check(CLI::IsMember({"ground", "slant"}));
    cmd->add_option("--pose-mode", pose_mode, "interpolate|nearest")
        ->check(CLI::IsMember({"interpolate", "nearest"}));
    cmd->add_option("--latency", latency, "GNSS latency offset in seconds");
  }

  std::optional<std::string> overrides() const {
    nlohmann::json o = nlohmann::json::object();
    if (heading_mode) o["heading_mode"] = *heading_mode;
    if (distance_mode) o["distance_mode"] = *distance_mode;
    if (pose_mode) o["pose_mode"] = *pose_mode;
    if (latency) o["latency_offset_s"] = *latency;
    if (o.empty()) return std::nullopt;
    return o.dump();
  }
};

int report_error(const ApiError& e) {
  std::cerr << "geopin: " << e.name() << ": " << e.what() << "\n";
  return 1;
}

int cmd_geolocate(const std::string& manifest, const std::string& out, std::string format,
                  const ModeFlags& modes) {
  SessionPtr session;
  try {
    session = load_session(manifest);
    if (auto o = modes.overrides()) session = with_options(session, *o);
  } catch (const ApiError& e) {
    return report_error(e);
  }
  try {
    const auto report = evaluate(session);
    if (format.empty()) {
      format = out.size() >= 5 && out.compare(out.size() - 5, 5, ".json") == 0 ? "json" : "csv";
    }
    if (!out.empty()) check(geopin_report_export(report.get(), format.c_str(), out.c_str()));
    const auto doc = nlohmann::json::parse(report_json(report));

    std::printf("estimates: %zu  failures: %zu\n", geopin_report_row_count(report.get()),
                geopin_report_failure_count(report.get()));
    print_aggregate("error (m)", doc["aggregates"]["overall"]);
    print_bins("by true distance:", "m", doc["aggregates"]["by_distance"]);
    print_bins("by speed:", "km/h", doc["aggregates"]["by_speed"]);
    if (!out.empty()) std::printf("report written to %s\n", out.c_str());
    for (const auto& f : doc["failures"]) {
      std::fprintf(stderr, "annotation t=%s camera=%s target=%s (%s, %s): %s: %s\n",
                   f["t"].dump().c_str(), f["camera_id"].get<std::string>().c_str(),
                   f["target_id"].get<std::string>().c_str(), f["px"].dump().c_str(),
                   f["py"].dump().c_str(), f["error"].get<std::string>().c_str(),
                   f["message"].get<std::string>().c_str());
    }
    return doc["failures"].empty() ? 0 : 2;
  } catch (const ApiError& e) {
    return report_error(e);
  }
}

int cmd_synth(const std::string& spec, const std::string& out, std::optional<std::uint64_t> seed) {
  char* info = nullptr;
  const auto status = geopin_synth_generate(spec.c_str(), out.c_str(), seed ? &*seed : nullptr, &info);
  if (status != GEOPIN_OK) return report_error(ApiError(status, geopin_last_error()));
  const auto doc = nlohmann::json::parse(take_string(info));
  std::printf("session written to %s\n", doc["manifest"].get<std::string>().c_str());
  std::printf("fixes: %zu  annotations: %zu  targets: %zu  seed: %llu\n",
              doc["fixes"].get<std::size_t>(), doc["annotations"].get<std::size_t>(),
              doc["targets"].get<std::size_t>(),
              static_cast<unsigned long long>(doc["seed"].get<std::uint64_t>()));
  for (const auto& w : doc["warnings"]) std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
  return 0;
}

int cmd_convert(const std::vector<double>& to_wgs84, const std::vector<double>& to_utm) {
  double a = 0.0, b = 0.0;
  geopin_status status;
  if (!to_wgs84.empty()) {
    status = geopin_utm33_to_wgs84(to_wgs84[0], to_wgs84[1], &a, &b);
    if (status == GEOPIN_OK) std::printf("%s %s\n", fmt_fixed(a, 10).c_str(), fmt_fixed(b, 10).c_str());
  } else {
    status = geopin_wgs84_to_utm33(to_utm[0], to_utm[1], &a, &b);
    if (status == GEOPIN_OK) std::printf("%s %s\n", fmt_fixed(a, 4).c_str(), fmt_fixed(b, 4).c_str());
  }
  if (status != GEOPIN_OK) return report_error(ApiError(status, geopin_last_error()));
  return 0;
}

int cmd_montecarlo(const std::string& spec, std::uint64_t trials, double max_distance,
                   const ModeFlags& modes, const std::string& out) {
  char* summary = nullptr;
  const auto o = modes.overrides();
  const auto status = geopin_monte_carlo(spec.c_str(), trials, max_distance,
                                         o ? o->c_str() : nullptr, &summary);
  if (status != GEOPIN_OK) return report_error(ApiError(status, geopin_last_error()));
  auto doc = nlohmann::json::parse(take_string(summary));
  std::printf("trials: %zu  estimates: %zu  failures: %zu  rng: %s\n", doc["trials"].get<std::size_t>(),
              doc["estimates"].get<std::size_t>(), doc["failures"].get<std::size_t>(),
              doc["rng"].get<std::string>().c_str());
  print_aggregate("error (m)", doc["overall"]);
  print_bins("by true distance:", "m", doc["by_distance"]);
  print_bins("by speed:", "km/h", doc["by_speed"]);
  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    f << doc.dump(2) << "\n";
    if (!f) {
      std::cerr << "geopin: IoError: cannot write " << out << "\n";
      return 1;
    }
  }
  return 0;
}

int cmd_nvdb(const std::vector<double>& bbox, const std::string& config, const std::string& out) {
  char* csv = nullptr;
  const auto status = geopin_nvdb_fetch_signs(bbox[0], bbox[1], bbox[2], bbox[3],
                                              config.empty() ? nullptr : config.c_str(), &csv);
  if (status != GEOPIN_OK) return report_error(ApiError(status, geopin_last_error()));
  const auto text = take_string(csv);
  if (out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) {
    std::cerr << "geopin: IoError: cannot write " << out << "\n";
    return 1;
  }
  return 0;
}

int cmd_serve(const ServeConfig& config, const std::string& host, int port) {
  try {
    ApiServer server(config);
    const int bound = server.bind(host, port);
    if (bound < 0) {
      std::cerr << "geopin: cannot bind " << host << ":" << port << "\n";
      return 1;
    }
    std::printf("serving %s on http://%s:%d/\n", config.manifest.c_str(), host.c_str(), bound);
    std::fflush(stdout);
    return server.listen() ? 0 : 1;
  } catch (const ApiError& e) {
    return report_error(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocular geolocation of roadside targets from annotated camera frames"};
  app.require_subcommand(1);

  std::string manifest, out, format;
  ModeFlags modes;
  auto* geo = app.add_subcommand("geolocate", "Geolocate every annotation and write a report");
  geo->add_option("--manifest", manifest, "Session manifest JSON")->required();
  geo->add_option("--out", out, "Report path");
  geo->add_option("--format", format, "csv|json (default from --out extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  modes.add_to(geo);

  std::string spec, out_dir;
  std::optional<std::uint64_t> seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic session from a scenario");
  synth->add_option("spec", spec, "Scenario JSON")->required();
  synth->add_option("--out", out_dir, "Output directory")->required();
  synth->add_option("--seed", seed, "Override the scenario seed");

  std::vector<double> to_wgs84, to_utm;
  auto* convert = app.add_subcommand("convert", "Convert between UTM33 and WGS84");
  auto* w = convert->add_option("--to-wgs84", to_wgs84, "EASTING NORTHING")->expected(2);
  auto* u = convert->add_option("--to-utm", to_utm, "LAT LON")->expected(2);
  w->excludes(u);
  convert->require_option(1);

  std::uint64_t trials = 1000;
  double max_distance = 0.0;
  std::string mc_out;
  ModeFlags mc_modes;
  auto* mc = app.add_subcommand("montecarlo", "Monte-Carlo error distribution for a scenario");
  mc->add_option("spec", spec, "Scenario JSON")->required();
  mc->add_option("--trials", trials, "Number of seeded trials")->check(CLI::PositiveNumber);
  mc->add_option("--max-distance", max_distance, "Only score targets within this true distance (m)");
  mc->add_option("--out", mc_out, "Write the summary JSON here");
  mc_modes.add_to(mc);

  std::vector<double> bbox;
  std::string nvdb_config, nvdb_out;
  auto* nvdb = app.add_subcommand("nvdb", "Fetch traffic signs from the road database");
  nvdb->add_option("--bbox", bbox, "MIN_E MIN_N MAX_E MAX_N (UTM33)")->expected(4)->required();
  nvdb->add_option("--config", nvdb_config, "JSON config with nvdb_url");
  nvdb->add_option("--out", nvdb_out, "Ground-truth CSV path (default stdout)");

  ServeConfig serve_config;
  std::string host = "127.0.0.1", ui_dir, frames_dir;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve the annotation API and UI");
  serve->add_option("--manifest", serve_config.manifest, "Session manifest JSON")->required();
  serve->add_option("--port", port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--ui", ui_dir, "Static UI asset directory");
  serve->add_option("--frames", frames_dir, "Frame image directory (<camera_id>/<t>.jpg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*geo) return cmd_geolocate(manifest, out, format, modes);
  if (*synth) return cmd_synth(spec, out_dir, seed);
  if (*convert) return cmd_convert(to_wgs84, to_utm);
  if (*mc) return cmd_montecarlo(spec, trials, max_distance, mc_modes, mc_out);
  if (*nvdb) return cmd_nvdb(bbox, nvdb_config, nvdb_out);
  if (*serve) {
    if (!ui_dir.empty()) serve_config.ui_dir = ui_dir;
    if (!frames_dir.empty()) serve_config.frames_dir = frames_dir;
    return cmd_serve(serve_config, host, port);
  }
  return 1;
}
