#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "moodtune/catalog.hpp"

namespace moodtune::catalog {

/// One provider call in a batch. `provider` names the rate-limit bucket.
template <class T>
struct FetchRequest {
  std::string key;
  std::string provider;
  std::function<T()> call;
};

template <class T>
struct KeyedResult {
  std::string key;
  std::optional<T> value;
  std::optional<CatalogError> error;
  unsigned attempts = 0;

  bool ok() const noexcept { return value.has_value(); }
};

/// Spaces calls to each provider at least 1/rate seconds apart.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second);

  /// Blocks until the next slot for `provider` opens.
  void acquire(const std::string& provider);

 private:
  using Clock = std::chrono::steady_clock;

  Clock::duration interval_;
  std::mutex mutex_;
  std::map<std::string, Clock::time_point> next_slot_;
};

/// Backoff before retry number `retry` (1-based): base * 2^(retry-1), or the
/// provider's retry-after hint when that is longer.
std::chrono::milliseconds backoff_delay(const FetchPolicy& policy, unsigned retry,
                                        const CatalogError& error);

namespace detail {

// Any non-catalog exception escaping a provider becomes a per-key
// provider-unavailable error.
template <class T>
KeyedResult<T> run_with_retries(const FetchRequest<T>& request,
                                const FetchPolicy& policy, RateLimiter& limiter) {
  KeyedResult<T> result{request.key, std::nullopt, std::nullopt, 0};
  for (;;) {
    limiter.acquire(request.provider);
    ++result.attempts;
    try {
      result.value.emplace(request.call());
      result.error.reset();
      return result;
    } catch (const CatalogError& e) {
      result.error.emplace(e);
    } catch (const std::exception& e) {
      result.error.emplace(ErrorKind::ProviderUnavailable,
                           std::string("provider call failed: ") + e.what());
    }
    const unsigned retries_done = result.attempts - 1;
    if (!result.error->retryable() || retries_done >= policy.retry_limit) {
      return result;
    }
    std::this_thread::sleep_for(backoff_delay(policy, retries_done + 1, *result.error));
  }
}

}  // namespace detail

/// Runs every request with at most `policy.max_in_flight` outstanding at
/// once. Results are stored by request position, so the output order equals
/// the input order whatever order calls complete in. A failing request only
/// affects its own result.
template <class T>
std::vector<KeyedResult<T>> fetch_many(const std::vector<FetchRequest<T>>& requests,
                                       const FetchPolicy& policy) {
  policy.validate();
  std::vector<KeyedResult<T>> results(requests.size());
  if (requests.empty()) return results;

  RateLimiter limiter(policy.per_provider_rate);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) {
      results[i] = detail::run_with_retries(requests[i], policy, limiter);
    }
  };

  const std::size_t workers = std::min(policy.max_in_flight, requests.size());
  if (workers == 1) {
    worker();
    return results;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return results;
}

}  // namespace moodtune::catalog
