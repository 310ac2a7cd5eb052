#include "moodtune/fetch.hpp"

#include <algorithm>
#include <cmath>

namespace moodtune::catalog {

RateLimiter::RateLimiter(double requests_per_second)
    : interval_(std::chrono::duration_cast<Clock::duration>(
          std::chrono::duration<double>(1.0 / requests_per_second))) {}

void RateLimiter::acquire(const std::string& provider) {
  Clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const Clock::time_point now = Clock::now();
    auto [it, inserted] = next_slot_.try_emplace(provider, now);
    slot = std::max(it->second, now);
    it->second = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

std::chrono::milliseconds backoff_delay(const FetchPolicy& policy, unsigned retry,
                                        const CatalogError& error) {
  const unsigned shift = std::min(retry - 1, 20u);
  std::chrono::milliseconds delay = policy.backoff_base * (1LL << shift);
  if (error.retry_after() && *error.retry_after() > delay) delay = *error.retry_after();
  return delay;
}

}  // namespace moodtune::catalog
