#include "ops/opsd/server.hpp"

// bodies are always parsed as JSON, whatever the client claims as content type
#define CPPHTTPLIB_FORM_URL_ENCODED_PAYLOAD_MAX_LENGTH (std::size_t{256} << 20)
#include <httplib.h>

#include <cctype>
#include <charconv>

namespace ops::opsd {

ServeOptions parse_bind(const std::string& bind) {
  ServeOptions opt;
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw BindError("bind address \"" + bind + "\" needs host:port");
  if (colon > 0) opt.host = bind.substr(0, colon);
  const std::string port = bind.substr(colon + 1);
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), opt.port);
  if (ec != std::errc() || p != port.data() + port.size() || opt.port < 0 || opt.port > 65535)
    throw BindError("bad port in bind address \"" + bind + "\"");
  return opt;
}

struct HttpService::Impl {
  Api& api;
  ServeOptions opt;
  httplib::Server server;

  Impl(Api& a, ServeOptions o) : api(a), opt(std::move(o)) {}

  static Request request_of(const httplib::Request& req) {
    Request r;
    r.body = req.body;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    for (const auto& [k, v] : req.headers) {
      std::string name = k;
      for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      r.headers[name] = v;
    }
    return r;
  }

  static void reply(httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  }

  void routes() {
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, api.handle(req.method, req.path, request_of(req)));
    };
    if (!opt.ui_dir.empty() && std::filesystem::is_directory(opt.ui_dir)) {
      server.set_mount_point("/ui", opt.ui_dir.string());
      server.Get("/ui", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ui/"); });
    }
    server.Get(".*", dispatch);
    server.Post(".*", dispatch);
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      const std::string code = res.status == 404 ? "NOT_FOUND" : "BAD_DOCUMENT";
      reply(res, error_response(res.status, code, req.method + " " + req.path + " failed"));
    });
  }
};

HttpService::HttpService(Api& api, ServeOptions opt) : impl_(std::make_unique<Impl>(api, std::move(opt))) { impl_->routes(); }

HttpService::~HttpService() = default;

int HttpService::bind() {
  auto& o = impl_->opt;
  if (o.port == 0) {
    const int port = impl_->server.bind_to_any_port(o.host);
    if (port < 0) throw BindError("cannot bind " + o.host);
    o.port = port;
    return port;
  }
  if (!impl_->server.bind_to_port(o.host, o.port)) throw BindError("cannot bind " + o.host + ":" + std::to_string(o.port));
  return o.port;
}

void HttpService::run() { impl_->server.listen_after_bind(); }

void HttpService::stop() { impl_->server.stop(); }

void serve(Api& api, const ServeOptions& opt, const std::function<void(int)>& on_ready) {
  HttpService svc(api, opt);
  const int port = svc.bind();
  if (on_ready) on_ready(port);
  svc.run();
}

}  // namespace ops::opsd
