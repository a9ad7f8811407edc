#include "morphocv/service.hpp"

#include <charconv>
#include <cmath>
#include <mutex>
#include <optional>

#include "httplib.h"
#include "json.hpp"
#include "morphocv/pipeline.hpp"
#include "morphocv/raster_io.hpp"

namespace morphocv {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr std::size_t kMiB = 1024 * 1024;

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  send_json(res, status, ordered_json{{"code", code}, {"message", message}});
}

std::optional<std::string> field(const httplib::Request& req, const std::string& name) {
  if (req.has_file(name)) return req.get_file_value(name).content;
  if (req.has_param(name)) return req.get_param_value(name);
  return std::nullopt;
}

double number_field(const httplib::Request& req, const std::string& name, double fallback) {
  auto text = field(req, name);
  if (!text || text->empty()) return fallback;
  double v = 0.0;
  const char* first = text->data();
  const char* last = first + text->size();
  auto [end, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || end != last || !std::isfinite(v)) {
    throw Error(Errc::kInvalidArgument, "field '" + name + "' is not a number");
  }
  return v;
}

std::size_t count_field(const httplib::Request& req, const std::string& name,
                        std::size_t fallback) {
  const double v = number_field(req, name, static_cast<double>(fallback));
  if (v < 0.0 || v != std::floor(v)) {
    throw Error(Errc::kInvalidArgument, "field '" + name + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

AnalysisRequest request_from_form(const httplib::Request& req, bool three_d) {
  AnalysisRequest request;
  if (auto depth = field(req, "depth")) request.depth = read_depth_csv(*depth);
  if (auto labels = field(req, "labels")) request.labels = read_label_png(*labels);
  if (auto sidecar = field(req, "sidecar"); sidecar && !sidecar->empty()) {
    request.sidecar = parse_sidecar(*sidecar);
  }
  if (auto image = field(req, "image"); image && !three_d) request.image = decode_png(*image);

  request.params.cal.ppm = number_field(req, "ppm", 1.0);
  request.params.cal.camera_to_ground_m = number_field(req, "camera_distance", 2.5);
  request.params.sigma = number_field(req, "sigma", 0.0);
  request.threshold.min_height_m = number_field(req, "min_height", 0.05);
  request.threshold.min_area_px = count_field(req, "min_area", 25);

  if (auto seg = field(req, "segmenter"); seg && !seg->empty()) {
    request.segmenter = parse_segmenter(*seg);
  } else {
    // Without a mask the depth map is segmented directly.
    request.segmenter = request.labels ? Segmenter::kExternal : Segmenter::kThreshold;
  }
  return request;
}

ordered_json params_echo(const AnalysisRequest& r) {
  return {
      {"ppm", r.params.cal.ppm},
      {"camera_distance", r.params.cal.camera_to_ground_m},
      {"sigma", r.params.sigma},
      {"segmenter", r.segmenter == Segmenter::kThreshold ? "threshold" : "external"},
      {"min_height", r.threshold.min_height_m},
      {"min_area", r.threshold.min_area_px},
  };
}

std::string content_type_for(const std::string& name) {
  if (name.ends_with(".png")) return "image/png";
  if (name.ends_with(".csv")) return "text/csv";
  return "application/json";
}

}  // namespace

std::string content_token(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Service::Impl {
  httplib::Server server;
  fs::path results_dir;
  std::mutex state_mutex;
  bool stop_requested = false;
  bool listening = false;

  // Stores files under a token derived from their content and returns it.
  std::string store(const std::vector<OutputFile>& files) {
    std::string all;
    for (const auto& f : files) {
      all += f.name;
      all += '\0';
      all += f.bytes;
    }
    const std::string token = content_token(all);
    write_outputs(results_dir / token, files);
    return token;
  }
};

Service::Service(ServiceConfig config) : config_(std::move(config)), impl_(new Impl) {
  impl_->results_dir = config_.results_dir.empty()
                           ? fs::temp_directory_path() / "morphocv-results"
                           : config_.results_dir;
  fs::create_directories(impl_->results_dir);

  auto& svr = impl_->server;
  Impl* impl = impl_.get();
  svr.set_payload_max_length(config_.max_upload_mb * kMiB);
  // httplib's default adds SO_REUSEPORT, which lets a second server share a
  // busy port instead of failing.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });

  svr.set_error_handler([max_mb = config_.max_upload_mb](const httplib::Request&,
                                                         httplib::Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    if (res.status == 413) {
      send_error(res, 413, code_name(Errc::kUploadTooLarge),
                 "upload exceeds the " + std::to_string(max_mb) + " MiB limit");
    } else {
      send_error(res, res.status, "E_HTTP_" + std::to_string(res.status),
                 httplib::status_message(res.status));
    }
    return httplib::Server::HandlerResponse::Handled;
  });

  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                               std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      const int status = e.code() == Errc::kUploadTooLarge ? 413
                         : e.code() == Errc::kIo           ? 500
                                                           : 400;
      send_error(res, status, e.code_name(), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "E_INTERNAL", e.what());
    } catch (...) {
      send_error(res, 500, "E_INTERNAL", "unknown error");
    }
  });

  svr.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, ordered_json{{"status", "ok"}, {"version", kVersion}});
  });

  const auto analyze = [impl](bool three_d) {
    return [impl, three_d](const httplib::Request& req, httplib::Response& res) {
      const AnalysisRequest request = request_from_form(req, three_d);
      const AnalysisResult result = three_d ? analyze_3d(request) : analyze_2d(request);
      const std::string token = impl->store(analysis_outputs(result));
      const std::string base = "/results/" + token + "/";

      ordered_json body;
      body["features"] = ordered_json::parse(features_json(result.features));
      body["overlay_url"] = base + "overlay.png";
      body["csv_url"] = base + "features.csv";
      body["surface"] =
          result.surface ? ordered_json::parse(surface_to_json(*result.surface)) : ordered_json();
      body["warnings"] = result.warnings;
      body["params"] = params_echo(request);
      send_json(res, 200, body);
    };
  };
  svr.Post("/api/analyze2d", analyze(false));
  svr.Post("/api/analyze3d", analyze(true));

  svr.Post("/api/evaluate", [impl](const httplib::Request& req, httplib::Response& res) {
    auto pred = field(req, "pred");
    auto gt = field(req, "gt");
    if (!pred || !gt) {
      throw Error(Errc::kInvalidArgument, "both 'pred' and 'gt' label PNGs are required");
    }
    const auto sidecar = [&](const char* name) -> std::optional<Sidecar> {
      auto text = field(req, name);
      if (!text || text->empty()) return std::nullopt;
      return parse_sidecar(*text);
    };
    const ScenePair scene{load_external(read_label_png(*pred), sidecar("pred_sidecar")),
                          load_external(read_label_png(*gt), sidecar("gt_sidecar"))};
    const auto thresholds = parse_thresholds(field(req, "iou").value_or("0.5,0.75"));
    const APResult result = evaluate(std::span<const ScenePair>(&scene, 1), thresholds);

    const std::string token = impl->store({{"metrics.csv", metrics_csv(result)}});
    ordered_json body = ordered_json::parse(metrics_json(result));
    body["csv_url"] = "/results/" + token + "/metrics.csv";
    send_json(res, 200, body);
  });

  svr.Get(R"(/results/([0-9a-f]{16})/(overlay\.png|features\.csv|surface\.json|metrics\.csv))",
          [impl](const httplib::Request& req, httplib::Response& res) {
            const fs::path path = impl->results_dir / req.matches[1].str() / req.matches[2].str();
            if (!fs::exists(path)) {
              send_error(res, 404, "E_NOT_FOUND", "no such result");
              return;
            }
            res.set_content(read_file(path), content_type_for(req.matches[2].str()));
          });

  if (!config_.assets_dir.empty()) {
    if (!svr.set_mount_point("/", config_.assets_dir.string())) {
      throw Error(Errc::kInvalidArgument,
                  "assets directory not found: " + config_.assets_dir.string());
    }
  }
}

Service::~Service() { stop(); }

int Service::bind() {
  auto& svr = impl_->server;
  if (config_.port == 0) {
    const int port = svr.bind_to_any_port(config_.host);
    if (port < 0) throw Error(Errc::kPortInUse, "cannot bind any port on " + config_.host);
    config_.port = port;
    return port;
  }
  if (!svr.bind_to_port(config_.host, config_.port)) {
    throw Error(Errc::kPortInUse, "port " + std::to_string(config_.port) + " is in use");
  }
  return config_.port;
}

void Service::run() {
  {
    std::lock_guard lock(impl_->state_mutex);
    if (impl_->stop_requested) return;
    impl_->listening = true;
  }
  impl_->server.listen_after_bind();
}

void Service::stop() {
  if (!impl_) return;
  bool listening = false;
  {
    std::lock_guard lock(impl_->state_mutex);
    impl_->stop_requested = true;
    listening = impl_->listening;
  }
  // httplib ignores stop() until the accept loop is up
  if (listening) {
    impl_->server.wait_until_ready();
    impl_->server.stop();
  }
}

}  // namespace morphocv
