#pragma once

// Real network transport for RegistryClient. Include only where network
// access is wanted; HTTPS requires CPPHTTPLIB_OPENSSL_SUPPORT and OpenSSL.

#include <chrono>
#include <string>

#include "httplib.h"
// <resolv.h> defines _res as a macro, which collides with Eigen internals.
#ifdef _res
#undef _res
#endif
#include "vulnrel/registry.hpp"

namespace vulnrel {

inline constexpr const char* kDefaultIndexUrl = "https://pypi.org";

/// Transport against an index base URL such as "https://pypi.org" or
/// "http://127.0.0.1:8080". Redirects are followed.
inline Transport make_http_transport(std::string base_url = kDefaultIndexUrl,
                                     std::chrono::seconds timeout = std::chrono::seconds(30)) {
  return [base_url = std::move(base_url), timeout](const std::string& path) {
    httplib::Client client(base_url);
    client.set_follow_location(true);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    auto result = client.Get(path);
    if (!result) throw RetryableError("request to " + base_url + path + " failed: " + httplib::to_string(result.error()));
    return HttpResponse{result->status, result->body};
  };
}

}  // namespace vulnrel
