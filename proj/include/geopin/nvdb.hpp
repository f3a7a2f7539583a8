#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "geopin/session.hpp"
#include "json.hpp"

namespace geopin {

/// UTM33 rectangle (metres).
struct UtmBox {
  double min_easting = 0.0;
  double min_northing = 0.0;
  double max_easting = 0.0;
  double max_northing = 0.0;
};

struct NvdbConfig {
  std::string base_url = "https://nvdbapiles-v3.atlas.vegvesen.no";
  int object_type = 96;  ///< traffic-sign point objects
  int page_size = 1000;
  int timeout_s = 30;
};

inline constexpr const char* kNvdbUrlEnv = "GEOPIN_NVDB_URL";

/// Base URL precedence: GEOPIN_NVDB_URL, then `nvdb_url` in the JSON config
/// file (when given), then the built-in default.
NvdbConfig resolve_nvdb_config(const std::optional<std::filesystem::path>& config_file);

/// Targets from one response page. Each carries source = Nvdb. Throws
/// SchemaDrift when objects lack point geometry or ids.
std::vector<GroundTruthTarget> parse_nvdb_page(const nlohmann::json& page);

/// Queries traffic-sign objects inside `box`, following the pagination
/// cursor until a page comes back empty. Any non-200 response aborts the
/// whole fetch with HttpError.
std::vector<GroundTruthTarget> nvdb_fetch_signs(const UtmBox& box, const NvdbConfig& config);

}  // namespace geopin
