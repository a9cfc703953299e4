#pragma once

#include <atomic>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <censusflow/domain.hpp>
#include <censusflow/iiif.hpp>

namespace cftest {

using namespace censusflow;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "cf") {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Answers each URL from a queue of scripted responses; the last response of
// a queue repeats. Unknown URLs answer 404.
class ScriptedTransport : public Transport {
 public:
  void script(const std::string& url, std::vector<TransportResponse> responses) {
    std::lock_guard lock(mutex_);
    queues_[url] = std::deque<TransportResponse>(responses.begin(), responses.end());
  }
  TransportResponse get(const std::string& url) override {
    std::lock_guard lock(mutex_);
    ++calls_[url];
    auto it = queues_.find(url);
    if (it == queues_.end() || it->second.empty()) return {true, 404, "", ""};
    TransportResponse r = it->second.front();
    if (it->second.size() > 1) it->second.pop_front();
    return r;
  }
  std::size_t calls(const std::string& url) {
    std::lock_guard lock(mutex_);
    return calls_[url];
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::deque<TransportResponse>> queues_;
  std::map<std::string, std::size_t> calls_;
};

inline TransportResponse ok(std::string body) { return {true, 200, std::move(body), ""}; }
inline TransportResponse status(int code) { return {true, code, "", ""}; }
inline TransportResponse network_error() { return {false, 0, "", "connection refused"}; }

inline Sleeper no_sleep() {
  return [](std::chrono::milliseconds) {};
}

// Four rows of a list page: two households, Gendre and Martin.
inline PageTranscript gendre_page() {
  using T = EntityTag;
  PageTranscript page;
  page.page_id = "neuilly-le-real-1901";
  page.records = {
      PersonRecord::of({{T::SurnameHead, "Gendre"},
                        {T::Firstname, "Pierre"},
                        {T::Occupation, "cultivateur"},
                        {T::Link, "chef"},
                        {T::Employer, "patron"},
                        {T::Age, "75"},
                        {T::Nationality, "française"}}),
      PersonRecord::of({{T::Surname, "Paraud"},
                        {T::Firstname, "Marie"},
                        {T::Occupation, "néant"},
                        {T::Link, "épouse"},
                        {T::Employer, "néant"},
                        {T::Age, "66"},
                        {T::Nationality, "idem"}}),
      PersonRecord::of({{T::SurnameHead, "Martin"},
                        {T::Firstname, "Pierre"},
                        {T::Occupation, "métayer"},
                        {T::Link, "chef"},
                        {T::Employer, "patron"},
                        {T::Age, "69"},
                        {T::Nationality, "idem"}}),
      PersonRecord::of({{T::Surname, "Joyoz"},
                        {T::Firstname, "Suzanne"},
                        {T::Occupation, "néant"},
                        {T::Link, "mère"},
                        {T::Employer, "néant"},
                        {T::Age, "72"},
                        {T::Nationality, "idem"}}),
  };
  return page;
}

inline const char* gendre_label() {
  return "<s-h>Gendre <f>Pierre <o>cultivateur <l>chef <e>patron <a>75 <n>française\n"
         "<s>Paraud <f>Marie <o>néant <l>épouse <e>néant <a>66 <n>idem\n"
         "<s-h>Martin <f>Pierre <o>métayer <l>chef <e>patron <a>69 <n>idem\n"
         "<s>Joyoz <f>Suzanne <o>néant <l>mère <e>néant <a>72 <n>idem";
}

}  // namespace cftest

namespace cftest {

using namespace censusflow;

// Exhaustive edit-distance oracle: breadth-first search over the graph of
// all strings of length <= max_len on a small alphabet, one edge per single
// insertion, deletion or substitution. An optimal edit sequence never needs
// a string longer than its longer endpoint, so the bounded graph is exact.
class EditGraphOracle {
 public:
  EditGraphOracle(std::string alphabet, std::size_t max_len) : alphabet_(std::move(alphabet)) {
    strings_.push_back("");
    for (std::size_t begin = 0, len = 1; len <= max_len; ++len) {
      const std::size_t end = strings_.size();
      for (std::size_t i = begin; i < end; ++i) {
        for (char c : alphabet_) strings_.push_back(strings_[i] + c);
      }
      begin = end;
    }
    for (std::size_t i = 0; i < strings_.size(); ++i) index_[strings_[i]] = static_cast<std::uint32_t>(i);
    offsets_.push_back(0);
    for (const auto& s : strings_) {
      for (const auto& n : neighbours(s, max_len)) edges_.push_back(index_.at(n));
      offsets_.push_back(static_cast<std::uint32_t>(edges_.size()));
    }
  }

  const std::vector<std::string>& strings() const { return strings_; }

  // Distances from strings()[source] to every string, by index.
  std::vector<std::uint8_t> distances_from(std::size_t source) const {
    std::vector<std::uint8_t> dist(strings_.size(), 0xff);
    std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(source)}, next;
    dist[source] = 0;
    for (std::uint8_t d = 1; !frontier.empty(); ++d) {
      next.clear();
      for (auto u : frontier) {
        for (auto e = offsets_[u]; e < offsets_[u + 1]; ++e) {
          const auto v = edges_[e];
          if (dist[v] == 0xff) {
            dist[v] = d;
            next.push_back(v);
          }
        }
      }
      frontier.swap(next);
    }
    return dist;
  }

 private:
  std::vector<std::string> neighbours(const std::string& s, std::size_t max_len) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.push_back(s.substr(0, i) + s.substr(i + 1));
      for (char c : alphabet_) {
        if (c != s[i]) out.push_back(s.substr(0, i) + c + s.substr(i + 1));
      }
    }
    if (s.size() < max_len) {
      for (std::size_t i = 0; i <= s.size(); ++i) {
        for (char c : alphabet_) out.push_back(s.substr(0, i) + c + s.substr(i));
      }
    }
    return out;
  }

  std::string alphabet_;
  std::vector<std::string> strings_;
  std::map<std::string, std::uint32_t> index_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> edges_;
};

}  // namespace cftest
