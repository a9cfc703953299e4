// cpp-httplib is heavy to compile, so it stays in this translation unit.
#include <httplib.h>

#include "censusflow/iiif.hpp"

namespace censusflow {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string target;  // path and query
};

std::optional<SplitUrl> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return SplitUrl{url, "/"};
  return SplitUrl{url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpTransport::HttpTransport(std::chrono::milliseconds timeout) : timeout_(timeout) {}

TransportResponse HttpTransport::get(const std::string& url) {
  const auto parts = split_url(url);
  if (!parts) return {false, 0, {}, "malformed URL: " + url};
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (parts->origin.rfind("https://", 0) == 0) return {false, 0, {}, "built without TLS support: " + url};
#endif
  // One client per call keeps the transport safe to share between threads.
  httplib::Client client(parts->origin);
  const auto seconds = timeout_.count() / 1000;
  const auto micros = (timeout_.count() % 1000) * 1000;
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_follow_location(true);
  auto response = client.Get(parts->target);
  if (!response) return {false, 0, {}, httplib::to_string(response.error())};
  return {true, response->status, response->body, {}};
}

}  // namespace censusflow
