#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>

#include "flowhub/api.hpp"

namespace flowhub {

/// Serves an ApiService over HTTP/1.1.
class HttpServer {
 public:
  HttpServer(ApiService& api, std::size_t max_body_bytes);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws Error(io_error).
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Connection failures, as opposed to error responses.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HttpClient {
 public:
  /// `base_url`: `http://host[:port][/prefix]`.
  explicit HttpClient(const std::string& base_url, std::string token = {},
                      std::chrono::seconds timeout = std::chrono::seconds(60));
  ~HttpClient();

  /// Sends the request as is; the path must already be percent-encoded.
  ApiResponse send(const ApiRequest& request);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace flowhub
