#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

namespace morphocv {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path assets_dir;  // static UI, optional
  std::filesystem::path results_dir;  // defaults to a temp subdirectory
  std::size_t max_upload_mb = 64;
};

// HTTP front end for the analysis pipeline. Handlers keep no state between
// requests; rendered outputs are written content-addressed under
// results_dir and served from /results/<token>/<file>.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the listening socket and returns the port. Throws kPortInUse.
  int bind();
  // Serves until stop(); bind() must have succeeded.
  void run();
  void stop();

  const ServiceConfig& config() const { return config_; }

 private:
  struct Impl;
  ServiceConfig config_;
  std::unique_ptr<Impl> impl_;
};

// 16 hex digits of 64-bit FNV-1a.
std::string content_token(std::string_view bytes);

}  // namespace morphocv
