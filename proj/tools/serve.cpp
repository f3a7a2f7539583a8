#include "serve.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace geopin_tools {

namespace {

int http_status_for(geopin_status s) {
  switch (s) {
    case GEOPIN_E_BAD_REQUEST:
    case GEOPIN_E_PIXEL_OUT_OF_BOUNDS:
      return 400;
    case GEOPIN_E_DANGLING_REFERENCE:
      return 404;
    case GEOPIN_E_IO_ERROR:
    case GEOPIN_E_INTERNAL:
      return 500;
    default:
      return 422;
  }
}

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, const ApiError& e) {
  const nlohmann::json body = {{"error", e.name()}, {"message", e.what()}};
  send_json(res, http_status_for(e.status()), body.dump());
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const ApiError& e) {
      send_error(res, e);
    }
  };
}

const char* kPlaceholderIndex =
    "<!doctype html><title>geopin</title>"
    "<p>No UI assets configured. Start <code>geopin serve</code> with <code>--ui DIR</code>."
    " The JSON API is at <code>/api/session</code>.</p>\n";

}  // namespace

ApiServer::ApiServer(ServeConfig config)
    : config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
  auto session = load_session(config_.manifest);
  current_ = std::make_shared<const Snapshot>(Snapshot{session, build_report(session)});
  install_routes();
}

ApiServer::~ApiServer() = default;

std::string ApiServer::build_report(const SessionPtr& session) {
  geopin_report* raw = nullptr;
  const auto status = geopin_evaluate(session.get(), &raw);
  if (status == GEOPIN_E_EMPTY_SESSION) {
    return nlohmann::json{{"rows", nlohmann::json::array()},
                          {"failures", nlohmann::json::array()},
                          {"aggregates", nullptr}}
        .dump();
  }
  check(status);
  return report_json(ReportPtr(raw));
}

std::shared_ptr<const ApiServer::Snapshot> ApiServer::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return current_;
}

std::string ApiServer::frame_index() const {
  // {camera_id: [t, ...]} from <frames>/<camera_id>/<t>.jpg
  nlohmann::json index = nlohmann::json::object();
  if (!config_.frames_dir || !std::filesystem::is_directory(*config_.frames_dir)) {
    return index.dump();
  }
  for (const auto& cam : std::filesystem::directory_iterator(*config_.frames_dir)) {
    if (!cam.is_directory()) continue;
    std::vector<double> times;
    for (const auto& f : std::filesystem::directory_iterator(cam.path())) {
      if (f.path().extension() != ".jpg") continue;
      const auto stem = f.path().stem().string();
      double t = 0.0;
      const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), t);
      if (ec == std::errc() && ptr == stem.data() + stem.size()) times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    index[cam.path().filename().string()] = times;
  }
  return index.dump();
}

void ApiServer::install_routes() {
  auto& s = *server_;

  s.Get("/api/session", guarded([this](const httplib::Request&, httplib::Response& res) {
          char* info = nullptr;
          check(geopin_session_info_json(snapshot()->session.get(), &info));
          auto doc = nlohmann::json::parse(take_string(info));
          doc["frames"] = nlohmann::json::parse(frame_index());
          send_json(res, 200, doc.dump());
        }));

  s.Post("/api/geolocate", guarded([this](const httplib::Request& req, httplib::Response& res) {
           char* out = nullptr;
           check(geopin_geolocate_json(snapshot()->session.get(), req.body.c_str(), &out));
           send_json(res, 200, take_string(out));
         }));

  s.Post("/api/annotations", guarded([this](const httplib::Request& req, httplib::Response& res) {
           // Appends are serialized; readers keep using the previous snapshot
           // until the new one is swapped in.
           std::lock_guard append(append_mu_);
           const auto before = snapshot();
           geopin_session* next_raw = nullptr;
           check(geopin_session_with_annotation(before->session.get(), req.body.c_str(), &next_raw));
           SessionPtr next(next_raw, SessionDeleter{});
           check(geopin_session_append_annotation_file(before->session.get(), req.body.c_str()));
           auto snap = std::make_shared<const Snapshot>(Snapshot{next, build_report(next)});
           {
             std::lock_guard lock(snapshot_mu_);
             current_ = snap;
           }
           char* info = nullptr;
           check(geopin_session_info_json(next.get(), &info));
           const auto doc = nlohmann::json::parse(take_string(info));
           send_json(res, 201,
                     nlohmann::json{{"annotation_count", doc["annotation_count"]},
                                    {"annotation", doc["annotations"].back()}}
                         .dump());
         }));

  s.Get("/api/report", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, snapshot()->report_json);
  });

  if (config_.frames_dir) s.set_mount_point("/frames", config_.frames_dir->string());
  if (config_.ui_dir) {
    s.set_mount_point("/", config_.ui_dir->string());
  } else {
    s.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderIndex, "text/html");
    });
  }

  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (req.path.rfind("/api/", 0) == 0 && res.body.empty()) {
      const nlohmann::json body = {{"error", res.status == 404 ? "NotFound" : "HttpError"},
                                   {"message", req.method + " " + req.path}};
      res.set_content(body.dump(), "application/json");
    }
  });
}

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen() { return server_->listen_after_bind(); }

void ApiServer::stop() { server_->stop(); }

}  // namespace geopin_tools
