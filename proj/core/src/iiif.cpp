#include "censusflow/iiif.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "censusflow/clock.hpp"
#include "censusflow/csv.hpp"
#include "censusflow/error.hpp"

namespace censusflow {

namespace {

bool unreserved(unsigned char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
         c == '_' || c == '~';
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string image_base(const IiifEndpoint& endpoint, std::string_view identifier) {
  if (identifier.empty()) throw Error(ErrorCode::EmptyIdentifier, "IIIF identifier is empty");
  return endpoint.base_url + "/" + percent_encode(identifier);
}

bool retryable(const TransportResponse& r) { return !r.ok || r.status >= 500 || r.status == 429; }

Sleeper default_sleeper(const Sleeper& s) {
  if (s) return s;
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

}  // namespace

IiifEndpoint IiifEndpoint::make(std::string base_url, int api_version, RetryPolicy retry,
                                std::chrono::milliseconds timeout) {
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  IiifEndpoint e{std::move(base_url), api_version, timeout, retry};
  e.validate();
  return e;
}

void IiifEndpoint::validate() const {
  if (base_url.empty()) throw Error(ErrorCode::ConfigInvalid, "IIIF base URL is empty");
  if (base_url.back() == '/') throw Error(ErrorCode::ConfigInvalid, "IIIF base URL ends with '/'");
  const bool known_scheme =
      base_url.rfind("http://", 0) == 0 || base_url.rfind("https://", 0) == 0 || base_url.rfind("file://", 0) == 0;
  if (!known_scheme) throw Error(ErrorCode::ConfigInvalid, "IIIF base URL must be http://, https:// or file://");
  if (api_version != 2 && api_version != 3)
    throw Error(ErrorCode::ConfigInvalid, "IIIF API version must be 2 or 3, got " + std::to_string(api_version));
  if (retry.max_attempts < 1) throw Error(ErrorCode::ConfigInvalid, "retry.max_attempts must be >= 1");
  if (retry.base_backoff_ms < 0) throw Error(ErrorCode::ConfigInvalid, "retry.base_backoff_ms must be >= 0");
  if (timeout.count() <= 0) throw Error(ErrorCode::ConfigInvalid, "timeout must be positive");
}

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (unreserved(c)) {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string percent_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%' && i + 2 < text.size()) {
      const int hi = hex_value(text[i + 1]);
      const int lo = hex_value(text[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(text[i]);
  }
  return out;
}

std::string info_url(const IiifEndpoint& endpoint, std::string_view identifier) {
  return image_base(endpoint, identifier) + "/info.json";
}

std::string full_image_url(const IiifEndpoint& endpoint, std::string_view identifier) {
  return image_base(endpoint, identifier) +
         (endpoint.api_version == 2 ? "/full/full/0/default.jpg" : "/full/max/0/default.jpg");
}

TransportResponse FileTransport::get(const std::string& url) {
  constexpr std::string_view kScheme = "file://";
  if (url.rfind(kScheme, 0) != 0) return {false, 0, {}, "not a file:// URL: " + url};
  const std::filesystem::path path = percent_decode(std::string_view(url).substr(kScheme.size()));
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return {true, 404, {}, {}};
  std::ifstream in(path, std::ios::binary);
  if (!in) return {false, 0, {}, "cannot open " + path.string()};
  std::ostringstream body;
  body << in.rdbuf();
  return {true, 200, body.str(), {}};
}

TransportResponse NullTransport::get(const std::string& url) {
  ++attempts_;
  throw Error(ErrorCode::IsolationViolation, "network access from an isolated node: " + url);
}

std::unique_ptr<Transport> make_transport(const IiifEndpoint& endpoint) {
  if (endpoint.base_url.rfind("file://", 0) == 0) return std::make_unique<FileTransport>();
  return std::make_unique<HttpTransport>(endpoint.timeout);
}

std::string_view to_string(IntegrityStatus status) {
  switch (status) {
    case IntegrityStatus::Ok: return "OK";
    case IntegrityStatus::Missing: return "MISSING";
    case IntegrityStatus::Corrupt: return "CORRUPT";
    case IntegrityStatus::TransportError: return "TRANSPORT_ERROR";
  }
  return "TRANSPORT_ERROR";
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry_index, Rng& rng) {
  const int shift = std::clamp(retry_index, 0, 20);
  const auto cap = static_cast<std::uint64_t>(policy.base_backoff_ms) << shift;
  return std::chrono::milliseconds(static_cast<std::int64_t>(rng.below(cap + 1)));
}

bool looks_like_image(std::string_view bytes) {
  using namespace std::string_view_literals;
  auto starts = [&](std::string_view magic) { return bytes.substr(0, magic.size()) == magic; };
  return starts("\xFF\xD8\xFF"sv) || starts("\x89PNG\r\n\x1A\n"sv) || starts("II*\0"sv) || starts("MM\0*"sv) ||
         starts("\0\0\0\x0CjP  "sv) || starts("CFSYNTH "sv);
}

std::pair<TransportResponse, int> get_with_retry(const IiifEndpoint& endpoint, const std::string& url,
                                                 Transport& transport, Rng& rng, const Sleeper& sleeper) {
  const Sleeper sleep = default_sleeper(sleeper);
  TransportResponse response;
  int attempt = 0;
  while (attempt < endpoint.retry.max_attempts) {
    if (attempt > 0) sleep(backoff_delay(endpoint.retry, attempt - 1, rng));
    ++attempt;
    response = transport.get(url);
    if (!retryable(response)) break;
  }
  return {std::move(response), attempt};
}

IntegrityResult check_integrity(const IiifEndpoint& endpoint, const ImageRef& image, Transport& transport,
                                const CheckOptions& options) {
  IntegrityResult result;
  result.image = image;
  result.checked_at = format_utc(now_ms());
  try {
    Rng rng(mix_seed(options.jitter_seed, fnv1a(image.iiif_identifier)));
    auto [response, attempts] = get_with_retry(endpoint, info_url(endpoint, image.iiif_identifier), transport, rng,
                                               options.sleeper);
    result.attempts = attempts;
    if (!response.ok) {
      result.status = IntegrityStatus::TransportError;
      result.detail = response.error;
      return result;
    }
    if (response.status == 404 || response.status == 410) {
      result.status = IntegrityStatus::Missing;
      result.detail = "HTTP " + std::to_string(response.status);
      return result;
    }
    if (response.status < 200 || response.status >= 300) {
      result.status = IntegrityStatus::TransportError;
      result.detail = "HTTP " + std::to_string(response.status);
      return result;
    }
    const auto info = nlohmann::json::parse(response.body, nullptr, false);
    if (info.is_discarded() || !info.is_object() || !info.contains("width") || !info.contains("height") ||
        !info["width"].is_number_integer() || !info["height"].is_number_integer()) {
      result.status = IntegrityStatus::Corrupt;
      result.detail = "info.json lacks integer width/height";
      return result;
    }
    const auto width = info["width"].get<std::int64_t>();
    const auto height = info["height"].get<std::int64_t>();
    if (width <= 0 || height <= 0 || width > INT32_MAX || height > INT32_MAX) {
      result.status = IntegrityStatus::Corrupt;
      result.detail = "dimensions " + std::to_string(width) + "x" + std::to_string(height);
      return result;
    }
    if (options.verify_pixels) {
      auto [pixels, more] = get_with_retry(endpoint, full_image_url(endpoint, image.iiif_identifier), transport, rng,
                                           options.sleeper);
      result.attempts += more;
      if (!pixels.ok || pixels.status >= 500) {
        result.status = IntegrityStatus::TransportError;
        result.detail = pixels.ok ? "image HTTP " + std::to_string(pixels.status) : pixels.error;
        return result;
      }
      if (pixels.status == 404 || pixels.status == 410) {
        result.status = IntegrityStatus::Missing;
        result.detail = "image HTTP " + std::to_string(pixels.status);
        return result;
      }
      if (!looks_like_image(pixels.body)) {
        result.status = IntegrityStatus::Corrupt;
        result.detail = "image bytes are not a known format";
        return result;
      }
    }
    result.status = IntegrityStatus::Ok;
    result.width = static_cast<int>(width);
    result.height = static_cast<int>(height);
    result.image.width = result.width;
    result.image.height = result.height;
    result.image.verified = true;
  } catch (const std::exception& e) {
    result.status = IntegrityStatus::TransportError;
    result.detail = e.what();
  } catch (...) {
    result.status = IntegrityStatus::TransportError;
    result.detail = "unknown failure";
  }
  return result;
}

std::vector<IntegrityResult> check_batch(const IiifEndpoint& endpoint, std::span<const ImageRef> images,
                                         Transport& transport, std::size_t concurrency, const CheckOptions& options) {
  std::vector<IntegrityResult> results(images.size());
  const std::size_t threads = std::max<std::size_t>(1, std::min(concurrency, images.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < images.size(); i = next++)
      results[i] = check_integrity(endpoint, images[i], transport, options);
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  return results;
}

void write_integrity_csv(std::ostream& out, std::span<const IntegrityResult> results) {
  csv::write_row(out, {"register_id", "sequence_index", "iiif_identifier", "status", "width", "height", "attempts",
                       "checked_at", "detail"});
  for (const auto& r : results) {
    csv::write_row(out, {r.image.register_id, std::to_string(r.image.sequence_index), r.image.iiif_identifier,
                         std::string(to_string(r.status)), r.width ? std::to_string(*r.width) : "",
                         r.height ? std::to_string(*r.height) : "", std::to_string(r.attempts), r.checked_at,
                         r.detail});
  }
}

}  // namespace censusflow
