#include "flowhub/http.hpp"

#include "httplib.h"

namespace flowhub {

struct HttpServer::Impl {
  ApiService& api;
  httplib::Server server;

  explicit Impl(ApiService& a) : api(a) {}

  void serve(const httplib::Request& in, httplib::Response& out) {
    ApiRequest req;
    req.method = in.method;
    std::string_view target = in.target;
    req.path = std::string(target.substr(0, target.find('?')));
    for (const auto& [k, v] : in.params) req.query.emplace_back(k, v);
    for (const auto& [k, v] : in.headers) req.headers[text::to_lower(k)] = v;
    req.body = in.body;
    ApiResponse res = api.handle(req);
    out.status = res.status;
    for (const auto& [k, v] : res.headers) out.headers.emplace(k, v);
    if (res.status != 204 && res.status != 302) out.set_content(res.body, res.content_type);
    else if (!res.body.empty()) out.set_content(res.body, res.content_type);
  }
};

HttpServer::HttpServer(ApiService& api, std::size_t max_body_bytes) : impl_(std::make_unique<Impl>(api)) {
  auto& s = impl_->server;
  s.set_payload_max_length(max_body_bytes);
  auto handler = [this](const httplib::Request& req, httplib::Response& res) { impl_->serve(req, res); };
  s.Get(".*", handler);
  s.Post(".*", handler);
  s.Put(".*", handler);
  s.Patch(".*", handler);
  s.Delete(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& s = impl_->server;
  if (port == 0) {
    int bound = s.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::io_error, "cannot bind " + host);
    return bound;
  }
  if (!s.bind_to_port(host, port)) throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

struct HttpClient::Impl {
  std::string prefix;
  std::string token;
  std::unique_ptr<httplib::Client> client;
};

HttpClient::HttpClient(const std::string& base_url, std::string token, std::chrono::seconds timeout)
    : impl_(std::make_unique<Impl>()) {
  auto scheme = base_url.find("://");
  if (scheme == std::string::npos) throw TransportError("bad server URL `" + base_url + "`");
  auto slash = base_url.find('/', scheme + 3);
  std::string origin = base_url.substr(0, slash);
  if (slash != std::string::npos) impl_->prefix = base_url.substr(slash);
  while (!impl_->prefix.empty() && impl_->prefix.back() == '/') impl_->prefix.pop_back();
  impl_->token = std::move(token);
  impl_->client = std::make_unique<httplib::Client>(origin);
  if (!impl_->client->is_valid()) throw TransportError("unsupported server URL `" + base_url + "`");
  impl_->client->set_url_encode(false);
  impl_->client->set_read_timeout(timeout);
  impl_->client->set_write_timeout(timeout);
}

HttpClient::~HttpClient() = default;

ApiResponse HttpClient::send(const ApiRequest& request) {
  httplib::Request req;
  req.method = request.method;
  req.path = impl_->prefix + request.path;
  std::string query;
  for (const auto& [k, v] : request.query) query += (query.empty() ? "?" : "&") + text::url_encode(k) + "=" + text::url_encode(v);
  req.path += query;
  for (const auto& [k, v] : request.headers) req.headers.emplace(k, v);
  if (!impl_->token.empty() && !request.headers.count("authorization"))
    req.headers.emplace("Authorization", "Bearer " + impl_->token);
  req.body = request.body;
  if (!request.body.empty() && !request.headers.count("content-type"))
    req.headers.emplace("Content-Type", "application/json");

  httplib::Result result = impl_->client->send(req);
  if (!result) throw TransportError("request failed: " + httplib::to_string(result.error()));
  ApiResponse res;
  res.status = result->status;
  res.content_type = result->get_header_value("Content-Type");
  for (const auto& [k, v] : result->headers) res.headers.emplace_back(k, v);
  res.body = result->body;
  return res;
}

}  // namespace flowhub
