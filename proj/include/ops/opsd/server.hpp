#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include "ops/common/error.hpp"
#include "ops/opsd/api.hpp"

namespace ops::opsd {

OPS_DEFINE_ERROR(BindError, "BIND_ERROR");

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path ui_dir;  // served at /ui when it exists
};

/// "host:port" or ":port".
ServeOptions parse_bind(const std::string& bind);

/// HTTP transport over an Api.
class HttpService {
 public:
  HttpService(Api& api, ServeOptions opt);
  ~HttpService();

  /// Throws BindError. Returns the bound port.
  int bind();
  /// Serves until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// bind() + run(); `on_ready` receives the bound port.
void serve(Api& api, const ServeOptions& opt, const std::function<void(int)>& on_ready = {});

}  // namespace ops::opsd
