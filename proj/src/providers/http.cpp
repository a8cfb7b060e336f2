#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "gseo/providers/http.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>

#include "gseo/errors.hpp"

namespace gseo::providers {
namespace {

std::atomic<std::size_t> g_network_calls{0};

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("url has no scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttplibTransport::HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttplibTransport::post(const HttpRequest& request) {
  g_network_calls.fetch_add(1);
  const auto [origin, path] = split_url(request.url);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [name, value] : request.headers) {
    std::string lowered = name;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == "content-type") {
      content_type = value;
    } else {
      headers.emplace(name, value);
    }
  }

  auto result = client.Post(path, headers, request.body, content_type);
  if (!result) {
    throw TransportError("POST " + request.url + " failed: " + httplib::to_string(result.error()));
  }

  HttpResponse response;
  response.status = result->status;
  response.body = result->body;
  for (const auto& [name, value] : result->headers) {
    std::string lowered = name;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    response.headers[lowered] = value;
  }
  return response;
}

std::size_t live_network_calls() { return g_network_calls.load(); }

}  // namespace gseo::providers
