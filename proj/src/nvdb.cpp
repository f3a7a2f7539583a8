#include "geopin/nvdb.hpp"

#include <cstdlib>
#include <sstream>

#include "geopin/error.hpp"
#include "httplib.h"
#include "text_io.hpp"

namespace geopin {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "road database URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) out.prefix = url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

// "POINT Z (x y z)" or "POINT (x y)".
std::optional<UtmCoord> parse_wkt_point(const std::string& wkt) {
  if (wkt.rfind("POINT", 0) != 0) return std::nullopt;
  const auto open = wkt.find('(');
  const auto close = wkt.find(')', open);
  if (open == std::string::npos || close == std::string::npos) return std::nullopt;
  std::istringstream in(wkt.substr(open + 1, close - open - 1));
  in.imbue(std::locale::classic());
  double e = 0.0, n = 0.0;
  if (!(in >> e >> n)) return std::nullopt;
  return UtmCoord{e, n};
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

}  // namespace

NvdbConfig resolve_nvdb_config(const std::optional<std::filesystem::path>& config_file) {
  NvdbConfig config;
  if (config_file) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(detail::read_text_file(*config_file));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, config_file->string() + ": " + e.what());
    }
    if (doc.contains("nvdb_url")) {
      if (!doc["nvdb_url"].is_string()) {
        throw Error(ErrorCode::ParseError, config_file->string() + ": nvdb_url: expected a string");
      }
      config.base_url = doc["nvdb_url"].get<std::string>();
    }
  }
  if (const char* env = std::getenv(kNvdbUrlEnv); env != nullptr && *env != '\0') {
    config.base_url = env;
  }
  return config;
}

std::vector<GroundTruthTarget> parse_nvdb_page(const nlohmann::json& page) {
  if (!page.is_object() || !page.contains("objekter") || !page["objekter"].is_array()) {
    throw Error(ErrorCode::SchemaDrift, "response has no 'objekter' array");
  }
  std::vector<GroundTruthTarget> out;
  for (const auto& obj : page["objekter"]) {
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_number_integer()) {
      throw Error(ErrorCode::SchemaDrift, "road object without integer 'id'");
    }
    const auto id = obj["id"].get<long long>();
    if (!obj.contains("geometri") || !obj["geometri"].is_object() ||
        !obj["geometri"].contains("wkt") || !obj["geometri"]["wkt"].is_string()) {
      throw Error(ErrorCode::SchemaDrift,
                  "road object " + std::to_string(id) + " lacks geometri.wkt");
    }
    const auto point = parse_wkt_point(obj["geometri"]["wkt"].get<std::string>());
    if (!point) {
      throw Error(ErrorCode::SchemaDrift,
                  "road object " + std::to_string(id) + " geometry is not a point");
    }
    GroundTruthTarget t;
    t.target_id = "nvdb-" + std::to_string(id);
    t.pos = utm33_to_wgs84(*point);
    t.kind = TargetKind::TrafficSign;
    t.source = TargetSource::Nvdb;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<GroundTruthTarget> nvdb_fetch_signs(const UtmBox& box, const NvdbConfig& config) {
  if (!(box.max_easting > box.min_easting) || !(box.max_northing > box.min_northing)) {
    throw Error(ErrorCode::InvalidArgument, "bounding box is degenerate");
  }
  const auto url = split_url(config.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(config.timeout_s);
  client.set_read_timeout(config.timeout_s);
  const httplib::Headers headers = {{"Accept", "application/vnd.vegvesen.nvdb-v3-rev1+json"},
                                    {"X-Client", "geopin"}};

  const std::string extent = detail::format_double(box.min_easting) + "," +
                             detail::format_double(box.min_northing) + "," +
                             detail::format_double(box.max_easting) + "," +
                             detail::format_double(box.max_northing);
  std::vector<GroundTruthTarget> out;
  std::string cursor;
  for (int page_no = 0; page_no < 10000; ++page_no) {
    httplib::Params params = {{"kartutsnitt", extent},
                              {"srid", "5973"},
                              {"inkluder", "geometri"},
                              {"antall", std::to_string(config.page_size)}};
    if (!cursor.empty()) params.emplace("start", cursor);
    const std::string path = url.prefix + "/vegobjekter/" + std::to_string(config.object_type);
    auto res = client.Get(path, params, headers);
    if (!res) {
      throw Error(ErrorCode::HttpError,
                  "request to " + config.base_url + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::HttpError,
                  "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body));
    }
    nlohmann::json page;
    try {
      page = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::SchemaDrift, std::string("response is not JSON: ") + e.what());
    }
    auto targets = parse_nvdb_page(page);
    if (targets.empty()) break;
    out.insert(out.end(), targets.begin(), targets.end());

    const auto& meta = page.value("metadata", nlohmann::json::object());
    if (!meta.contains("neste") || !meta["neste"].contains("start") ||
        !meta["neste"]["start"].is_string()) {
      break;
    }
    const auto next = meta["neste"]["start"].get<std::string>();
    if (next == cursor) break;
    cursor = next;
  }
  return out;
}

}  // namespace geopin
