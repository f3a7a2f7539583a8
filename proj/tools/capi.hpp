#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "geopin/geopin.h"

namespace geopin_tools {

class ApiError : public std::runtime_error {
 public:
  ApiError(geopin_status status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  geopin_status status() const { return status_; }
  std::string name() const { return geopin_status_name(status_); }

 private:
  geopin_status status_;
};

inline void check(geopin_status status) {
  if (status != GEOPIN_OK) throw ApiError(status, geopin_last_error());
}

inline std::string take_string(char* s) {
  std::string out = s == nullptr ? std::string() : std::string(s);
  geopin_free_string(s);
  return out;
}

struct SessionDeleter {
  void operator()(geopin_session* s) const { geopin_session_free(s); }
};
struct ReportDeleter {
  void operator()(geopin_report* r) const { geopin_report_free(r); }
};

using SessionPtr = std::shared_ptr<const geopin_session>;
using ReportPtr = std::unique_ptr<geopin_report, ReportDeleter>;

inline SessionPtr load_session(const std::string& manifest) {
  geopin_session* s = nullptr;
  check(geopin_session_load(manifest.c_str(), &s));
  return SessionPtr(s, SessionDeleter{});
}

inline SessionPtr with_options(const SessionPtr& s, const std::string& options_json) {
  geopin_session* out = nullptr;
  check(geopin_session_with_options(s.get(), options_json.c_str(), &out));
  return SessionPtr(out, SessionDeleter{});
}

inline ReportPtr evaluate(const SessionPtr& s) {
  geopin_report* r = nullptr;
  check(geopin_evaluate(s.get(), &r));
  return ReportPtr(r);
}

inline std::string report_json(const ReportPtr& r) {
  char* out = nullptr;
  check(geopin_report_json(r.get(), &out));
  return take_string(out);
}

}  // namespace geopin_tools
