#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "censusflow/domain.hpp"
#include "censusflow/iiif.hpp"
#include "censusflow/manifest.hpp"

namespace censusflow {

// Stand-in image used by fixtures and mock workers:
//   CFSYNTH 1
//   class LIST
//   width 2000
//   height 3000
//   ---
//   <fixture text of the page>
struct SyntheticImage {
  PageClass page_class = PageClass::List;
  int width = 2000;
  int height = 3000;
  PageTranscript transcript;  // ground truth, empty for non-LIST pages
};

std::string encode_synthetic_image(const SyntheticImage& image);
// Throws Error(Parse).
SyntheticImage decode_synthetic_image(std::string_view bytes);

// What a worker may touch while running a task.
struct ExecutionContext {
  Transport& transport;
  Stage stage = Stage::Process;
  int attempt = 1;
};

class Worker {
 public:
  virtual ~Worker() = default;
  virtual PageClass classify(std::string_view image, ExecutionContext& ctx) = 0;
  // Raw label string as a recognizer would emit it.
  virtual std::string recognize(std::string_view image, ExecutionContext& ctx) = 0;
  virtual std::string version() const = 0;
};

struct NoiseProfile {
  double char_substitution = 0.0;  // per value code point, replaced by another letter a-z
  double entity_drop = 0.0;        // per field
  double head_flip = 0.0;          // per record, swaps SURNAME_HEAD and SURNAME
  double crash_rate = 0.0;         // per call, throws Error(WorkerFailure)
};

// Reads the ground truth embedded in synthetic images. Output depends only on
// (seed, image bytes), apart from crashes which also depend on the attempt.
class MockWorker : public Worker {
 public:
  explicit MockWorker(std::uint64_t seed = 0, NoiseProfile noise = {});

  PageClass classify(std::string_view image, ExecutionContext& ctx) override;
  std::string recognize(std::string_view image, ExecutionContext& ctx) override;
  std::string version() const override { return "mock-1"; }

  const NoiseProfile& noise() const { return noise_; }

 private:
  void maybe_crash(std::string_view image, ExecutionContext& ctx, std::uint64_t salt) const;

  std::uint64_t seed_;
  NoiseProfile noise_;
};

// Serializes a page in label syntax without validating values; the
// recognizer path of MockWorker uses it so noisy values always encode.
std::string render_label(const PageTranscript& page, const TagAlphabet& alphabet = TagAlphabet::standard());

// Applies NoiseProfile (except crashes) to a page with the given RNG seed.
PageTranscript apply_noise(const PageTranscript& page, const NoiseProfile& noise, std::uint64_t seed);

// Runs `<command> classify <image> <out>` and `<command> recognize <image> <out>`
// through the shell; the answer is read back from <out>. A non-zero exit
// status throws Error(WorkerFailure).
class ExternalProcessWorker : public Worker {
 public:
  ExternalProcessWorker(std::string command, std::filesystem::path scratch_dir);

  PageClass classify(std::string_view image, ExecutionContext& ctx) override;
  std::string recognize(std::string_view image, ExecutionContext& ctx) override;
  std::string version() const override { return "external:" + command_; }

 private:
  std::string run(std::string_view verb, std::string_view image);

  std::string command_;
  std::filesystem::path scratch_;
};

}  // namespace censusflow
