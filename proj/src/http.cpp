#include "sticky/http.h"

#include <algorithm>
#include <thread>

#include "sticky/error.h"

namespace sticky {

void with_retry(const RetryPolicy& policy, const std::function<void()>& fn) {
  auto backoff = policy.initial_backoff;
  const int attempts = std::max(1, policy.attempts);
  for (int i = 0;; ++i) {
    try {
      fn();
      return;
    } catch (const TransportError&) {
      if (i + 1 >= attempts) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("not a URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) e.base = url.substr(path_start);
  while (!e.base.empty() && e.base.back() == '/') e.base.pop_back();
  return e;
}

}  // namespace sticky
