#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>

#include "gseo/providers/http.hpp"

namespace gseo::providers {

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30'000};
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Sleeps on the calling thread.
Sleeper real_sleeper();

/// Shared by concurrent callers of one client.
struct RetryCounters {
  std::atomic<std::size_t> attempts{0};
  std::atomic<std::size_t> retries{0};
  std::atomic<std::size_t> rate_limited{0};
};

bool is_retryable_status(int status);

/// Delay before retry number `retry` (0-based): initial * multiplier^retry, capped.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry);

/// Sends `request`, retrying transport failures, 408/409/429 and 5xx with
/// exponential backoff until policy.max_attempts is reached. A Retry-After
/// header lengthens the wait (never beyond max_backoff). Returns the first 2xx
/// response; otherwise throws RateLimitError, QuotaError, TransportError, or
/// ProviderError.
HttpResponse post_with_retry(HttpTransport& transport, const HttpRequest& request,
                             const RetryPolicy& policy, const Sleeper& sleep,
                             RetryCounters& counters);

}  // namespace gseo::providers
