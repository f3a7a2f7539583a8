#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "capi.hpp"

namespace httplib {
class Server;
}

namespace geopin_tools {

struct ServeConfig {
  std::string manifest;
  std::optional<std::filesystem::path> ui_dir;
  std::optional<std::filesystem::path> frames_dir;
};

/// JSON API over one session:
///   GET  /api/session      cameras, track span, ground truth, frame index
///   POST /api/geolocate    {camera_id, t, px, py, target_id?} -> estimate
///   POST /api/annotations  append one annotation to the session log
///   GET  /api/report       current evaluation report
/// plus static UI assets at / and frame images at /frames/<camera_id>/<t>.jpg.
class ApiServer {
 public:
  /// Loads the session; throws ApiError.
  explicit ApiServer(ServeConfig config);
  ~ApiServer();

  /// Binds to host:port (0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks.
  bool listen();
  void stop();

 private:
  struct Snapshot {
    SessionPtr session;
    std::string report_json;
  };

  void install_routes();
  std::shared_ptr<const Snapshot> snapshot() const;
  static std::string build_report(const SessionPtr& session);
  std::string frame_index() const;

  ServeConfig config_;
  std::unique_ptr<httplib::Server> server_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Snapshot> current_;
  std::mutex append_mu_;
};

}  // namespace geopin_tools
