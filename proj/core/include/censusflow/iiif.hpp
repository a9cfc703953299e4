#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "censusflow/domain.hpp"
#include "censusflow/rng.hpp"

namespace censusflow {

struct RetryPolicy {
  int max_attempts = 3;  // >= 1, counts the first try
  int base_backoff_ms = 200;
};

struct IiifEndpoint {
  std::string base_url;
  int api_version = 3;  // 2 or 3
  std::chrono::milliseconds timeout{10000};
  RetryPolicy retry;

  // Strips trailing slashes and validates; throws Error(ConfigInvalid).
  static IiifEndpoint make(std::string base_url, int api_version = 3, RetryPolicy retry = {},
                           std::chrono::milliseconds timeout = std::chrono::milliseconds{10000});
  void validate() const;
};

// Percent-encodes every byte outside the RFC 3986 unreserved set, so '/'
// becomes %2F.
std::string percent_encode(std::string_view text);
std::string percent_decode(std::string_view text);

// Throw Error(EmptyIdentifier) for an empty identifier.
std::string info_url(const IiifEndpoint& endpoint, std::string_view identifier);
std::string full_image_url(const IiifEndpoint& endpoint, std::string_view identifier);

struct TransportResponse {
  bool ok = false;  // a response arrived; status is meaningful
  int status = 0;
  std::string body;
  std::string error;
};

// Request executor. Implementations must be safe to call from several threads.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResponse get(const std::string& url) = 0;
};

// http:// and https:// through cpp-httplib.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::chrono::milliseconds timeout = std::chrono::milliseconds{10000});
  TransportResponse get(const std::string& url) override;

 private:
  std::chrono::milliseconds timeout_;
};

// file:// URLs over a static IIIF tree; a missing file answers 404.
class FileTransport : public Transport {
 public:
  TransportResponse get(const std::string& url) override;
};

// Stands in for the network on isolated nodes: every call throws
// Error(IsolationViolation).
class NullTransport : public Transport {
 public:
  TransportResponse get(const std::string& url) override;
  std::size_t attempts() const { return attempts_.load(); }

 private:
  std::atomic<std::size_t> attempts_{0};
};

// FileTransport for file:// endpoints, HttpTransport otherwise.
std::unique_ptr<Transport> make_transport(const IiifEndpoint& endpoint);

enum class IntegrityStatus { Ok, Missing, Corrupt, TransportError };
std::string_view to_string(IntegrityStatus status);

struct IntegrityResult {
  ImageRef image;  // width/height/verified filled on OK
  IntegrityStatus status = IntegrityStatus::TransportError;
  std::optional<int> width;
  std::optional<int> height;
  std::string checked_at;  // UTC, ISO 8601
  int attempts = 0;
  std::string detail;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct CheckOptions {
  bool verify_pixels = false;  // also fetch the full image and check its magic bytes
  Sleeper sleeper;             // defaults to std::this_thread::sleep_for
  std::uint64_t jitter_seed = 0;
};

// Full jitter: uniform in [0, base * 2^retry_index] milliseconds.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry_index, Rng& rng);

// True for JPEG, PNG, TIFF, JPEG 2000 and the synthetic image format.
bool looks_like_image(std::string_view bytes);

// Never throws. 404/410 -> MISSING, unparseable info.json or non-positive
// dimensions -> CORRUPT, no response or 5xx/429 after max_attempts ->
// TRANSPORT_ERROR.
IntegrityResult check_integrity(const IiifEndpoint& endpoint, const ImageRef& image, Transport& transport,
                                const CheckOptions& options = {});

// check_integrity with at most `concurrency` requests in flight. Results
// follow input order.
std::vector<IntegrityResult> check_batch(const IiifEndpoint& endpoint, std::span<const ImageRef> images,
                                         Transport& transport, std::size_t concurrency,
                                         const CheckOptions& options = {});

// GET with the endpoint's retry policy. Returns the final response and the
// number of attempts used.
std::pair<TransportResponse, int> get_with_retry(const IiifEndpoint& endpoint, const std::string& url,
                                                 Transport& transport, Rng& rng, const Sleeper& sleeper);

void write_integrity_csv(std::ostream& out, std::span<const IntegrityResult> results);

}  // namespace censusflow
