#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gseo::providers {

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;  // lowercase names
};

/// POST-only transport. Throws TransportError when no HTTP response was received.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// HTTPS via cpp-httplib. Every call bumps live_network_calls().
class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(120));
  HttpResponse post(const HttpRequest& request) override;

 private:
  std::chrono::seconds timeout_;
};

/// Process-wide count of requests that reached the network layer.
std::size_t live_network_calls();

}  // namespace gseo::providers
