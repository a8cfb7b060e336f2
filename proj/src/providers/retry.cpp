#include "gseo/providers/retry.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <thread>

#include "gseo/errors.hpp"

namespace gseo::providers {
namespace {

std::optional<std::chrono::milliseconds> retry_after(const HttpResponse& response) {
  auto it = response.headers.find("retry-after");
  if (it == response.headers.end()) return std::nullopt;
  char* end = nullptr;
  const double seconds = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || !std::isfinite(seconds) || seconds < 0) return std::nullopt;
  return std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
}

bool is_quota_status(int status) { return status == 402 || status == 432 || status == 433; }

std::string describe(const HttpRequest& request, const HttpResponse& response) {
  std::string body = response.body.substr(0, 300);
  return "POST " + request.url + " returned HTTP " + std::to_string(response.status) + ": " + body;
}

}  // namespace

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

bool is_retryable_status(int status) {
  return status == 408 || status == 409 || status == 429 || status >= 500;
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry) {
  const double raw = static_cast<double>(policy.initial_backoff.count()) *
                     std::pow(policy.multiplier, static_cast<double>(retry));
  const double capped = std::min(raw, static_cast<double>(policy.max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(capped));
}

HttpResponse post_with_retry(HttpTransport& transport, const HttpRequest& request,
                             const RetryPolicy& policy, const Sleeper& sleep,
                             RetryCounters& counters) {
  const int ceiling = std::max(1, policy.max_attempts);
  for (int attempt = 1;; ++attempt) {
    counters.attempts.fetch_add(1);
    std::optional<HttpResponse> response;
    std::string failure;
    try {
      response = transport.post(request);
    } catch (const TransportError& e) {
      failure = e.what();
    }

    if (response && response->status >= 200 && response->status < 300) return *response;

    if (response) {
      if (response->status == 429) counters.rate_limited.fetch_add(1);
      if (is_quota_status(response->status)) throw QuotaError(describe(request, *response));
      if (!is_retryable_status(response->status)) throw ProviderError(describe(request, *response));
      failure = describe(request, *response);
    }

    if (attempt >= ceiling) {
      if (response && response->status == 429) {
        throw RateLimitError("rate limit not cleared after " + std::to_string(attempt) +
                             " attempts: " + failure);
      }
      throw TransportError("giving up after " + std::to_string(attempt) + " attempts: " + failure);
    }

    auto delay = backoff_delay(policy, attempt - 1);
    if (response) {
      if (auto hinted = retry_after(*response)) delay = std::min(std::max(delay, *hinted), policy.max_backoff);
    }
    spdlog::warn("attempt {}/{} failed ({}); retrying in {} ms", attempt, ceiling, failure, delay.count());
    counters.retries.fetch_add(1);
    sleep(delay);
  }
}

}  // namespace gseo::providers
