#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "geopin/error.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("geopin-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(GEOPIN_FIXTURE_DIR) / name;
}

template <typename Fn>
geopin::ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const geopin::Error& e) {
    return e.code();
  }
  throw std::logic_error("expected a geopin::Error");
}

}  // namespace testing
