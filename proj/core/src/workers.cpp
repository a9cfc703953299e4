#include "censusflow/workers.hpp"

#include <atomic>
#include <cstdlib>
#include <sstream>

#include "censusflow/error.hpp"
#include "censusflow/rng.hpp"
#include "censusflow/utf8.hpp"

namespace censusflow {

namespace {

constexpr std::string_view kMagic = "CFSYNTH 1\n";

std::string_view next_line(std::string_view& text) {
  const auto nl = text.find('\n');
  const auto line = text.substr(0, nl);
  text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
  return line;
}

int parse_int_field(std::string_view line, std::string_view key) {
  if (line.substr(0, key.size() + 1) != std::string(key) + " ")
    throw Error(ErrorCode::Parse, "synthetic image: expected '" + std::string(key) + "'");
  try {
    return std::stoi(std::string(line.substr(key.size() + 1)));
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, "synthetic image: bad " + std::string(key));
  }
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  return out + "'";
}

std::string trim_copy(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

}  // namespace

std::string encode_synthetic_image(const SyntheticImage& image) {
  std::ostringstream out;
  out << kMagic << "class " << page_class_name(image.page_class) << "\nwidth " << image.width << "\nheight "
      << image.height << "\n---\n";
  if (image.page_class == PageClass::List) {
    const PageTranscript pages[] = {image.transcript};
    out << write_fixture(pages);
  }
  return out.str();
}

SyntheticImage decode_synthetic_image(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) throw Error(ErrorCode::Parse, "not a synthetic image");
  bytes.remove_prefix(kMagic.size());
  SyntheticImage image;
  const auto class_line = next_line(bytes);
  if (class_line.substr(0, 6) != "class ") throw Error(ErrorCode::Parse, "synthetic image: expected 'class'");
  const auto cls = page_class_from_name(class_line.substr(6));
  if (!cls) throw Error(ErrorCode::Parse, "synthetic image: unknown class '" + std::string(class_line.substr(6)) + "'");
  image.page_class = *cls;
  image.width = parse_int_field(next_line(bytes), "width");
  image.height = parse_int_field(next_line(bytes), "height");
  if (next_line(bytes) != "---") throw Error(ErrorCode::Parse, "synthetic image: expected '---'");
  if (image.page_class == PageClass::List) {
    auto pages = read_fixture(bytes);
    if (!pages.empty()) image.transcript = std::move(pages.front());
  }
  return image;
}

std::string render_label(const PageTranscript& page, const TagAlphabet& alphabet) {
  std::string text;
  for (std::size_t r = 0; r < page.records.size(); ++r) {
    if (r) text.push_back('\n');
    bool first = true;
    for (const auto& [tag, value] : page.records[r].fields) {
      if (!first) text.push_back(' ');
      first = false;
      text += alphabet.surface(tag);
      text += value;
    }
  }
  return text;
}

PageTranscript apply_noise(const PageTranscript& page, const NoiseProfile& noise, std::uint64_t seed) {
  Rng rng(seed);
  PageTranscript out = page;
  for (auto& record : out.records) {
    if (noise.head_flip > 0.0 && rng.bernoulli(noise.head_flip)) {
      if (auto it = record.fields.find(EntityTag::SurnameHead); it != record.fields.end()) {
        record.fields[EntityTag::Surname] = std::move(it->second);
        record.fields.erase(EntityTag::SurnameHead);
        record.is_head = false;
      } else if (auto s = record.fields.find(EntityTag::Surname); s != record.fields.end()) {
        record.fields[EntityTag::SurnameHead] = std::move(s->second);
        record.fields.erase(EntityTag::Surname);
        record.is_head = true;
      }
    }
    if (noise.entity_drop > 0.0) {
      for (auto it = record.fields.begin(); it != record.fields.end();) {
        if (record.fields.size() > 1 && rng.bernoulli(noise.entity_drop)) {
          if (it->first == EntityTag::SurnameHead) record.is_head = false;
          it = record.fields.erase(it);
        } else {
          ++it;
        }
      }
    }
    if (noise.char_substitution > 0.0) {
      for (auto& [tag, value] : record.fields) {
        std::u32string cps = utf8::decode(value);
        for (char32_t& cp : cps) {
          if (!rng.bernoulli(noise.char_substitution)) continue;
          const bool lower = cp >= U'a' && cp <= U'z';
          auto pick = static_cast<char32_t>(U'a' + rng.below(lower ? 25 : 26));
          if (lower && pick >= cp) ++pick;
          cp = pick;
        }
        value = utf8::encode(cps);
      }
    }
  }
  return out;
}

MockWorker::MockWorker(std::uint64_t seed, NoiseProfile noise) : seed_(seed), noise_(noise) {
  for (double p : {noise.char_substitution, noise.entity_drop, noise.head_flip, noise.crash_rate}) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::ConfigInvalid, "noise rates must lie in [0, 1]");
  }
}

void MockWorker::maybe_crash(std::string_view image, ExecutionContext& ctx, std::uint64_t salt) const {
  if (noise_.crash_rate <= 0.0) return;
  Rng rng(mix_seed(mix_seed(seed_, fnv1a(image)), salt * 1000 + static_cast<std::uint64_t>(ctx.attempt)));
  if (rng.bernoulli(noise_.crash_rate)) throw Error(ErrorCode::WorkerFailure, "mock worker crashed");
}

PageClass MockWorker::classify(std::string_view image, ExecutionContext& ctx) {
  maybe_crash(image, ctx, 1);
  return decode_synthetic_image(image).page_class;
}

std::string MockWorker::recognize(std::string_view image, ExecutionContext& ctx) {
  maybe_crash(image, ctx, 2);
  const SyntheticImage decoded = decode_synthetic_image(image);
  return render_label(apply_noise(decoded.transcript, noise_, mix_seed(seed_, fnv1a(image))));
}

ExternalProcessWorker::ExternalProcessWorker(std::string command, std::filesystem::path scratch_dir)
    : command_(std::move(command)), scratch_(std::move(scratch_dir)) {
  if (command_.empty()) throw Error(ErrorCode::ConfigInvalid, "external worker command is empty");
}

std::string ExternalProcessWorker::run(std::string_view verb, std::string_view image) {
  static std::atomic<std::uint64_t> counter{0};
  std::filesystem::create_directories(scratch_);
  const auto stem = scratch_ / ("call-" + std::to_string(counter++));
  const auto in_path = stem.string() + ".img";
  const auto out_path = stem.string() + ".out";
  write_text_file_atomic(in_path, image);
  const std::string cmd =
      command_ + " " + std::string(verb) + " " + shell_quote(in_path) + " " + shell_quote(out_path);
  const int status = std::system(cmd.c_str());
  std::error_code ec;
  std::filesystem::remove(in_path, ec);
  if (status != 0) {
    std::filesystem::remove(out_path, ec);
    throw Error(ErrorCode::WorkerFailure, "'" + cmd + "' exited with status " + std::to_string(status));
  }
  std::string answer = read_text_file(out_path);
  std::filesystem::remove(out_path, ec);
  return answer;
}

PageClass ExternalProcessWorker::classify(std::string_view image, ExecutionContext&) {
  const std::string answer = trim_copy(run("classify", image));
  if (auto cls = page_class_from_name(answer)) return *cls;
  throw Error(ErrorCode::WorkerFailure, "external classifier answered '" + answer + "'");
}

std::string ExternalProcessWorker::recognize(std::string_view image, ExecutionContext&) {
  return run("recognize", image);
}

}  // namespace censusflow
