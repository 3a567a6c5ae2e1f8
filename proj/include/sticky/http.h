#pragma once

#include <chrono>
#include <functional>
#include <string>

namespace sticky {

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
};

// Calls fn until it returns without TransportError, sleeping
// initial_backoff * 2^i between attempts. Rethrows the last TransportError.
void with_retry(const RetryPolicy& policy, const std::function<void()>& fn);

// Splits "http://host:port/base" into scheme+host+port and a path prefix.
struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string base;    // path prefix without trailing slash, may be empty
};
Endpoint parse_endpoint(const std::string& url);

}  // namespace sticky
