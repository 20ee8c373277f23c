#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "medtweet/medtweet.hpp"

namespace testsupport {

// Scratch directory wiped on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("medtweet_test_" + tag + "_" + std::to_string(counter_++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string dir() const { return path_.string(); }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

// Encoder with hand-planted vectors, keyed by exact text. Vectors must be
// unit length; unknown text is an error.
class PlantedEncoder : public medtweet::TextEncoder {
 public:
  PlantedEncoder(std::string id, std::size_t dimension,
                 std::map<std::string, std::vector<float>> vectors)
      : id_(std::move(id)), dimension_(dimension), vectors_(std::move(vectors)) {}

  std::string id() const override { return id_; }
  std::size_t dimension() const override { return dimension_; }

  std::vector<float> encode(std::string_view text) const override {
    auto it = vectors_.find(std::string(text));
    if (it == vectors_.end())
      throw medtweet::invalid_input("no planted vector for \"" + std::string(text) + "\"");
    return it->second;
  }

 private:
  std::string id_;
  std::size_t dimension_;
  std::map<std::string, std::vector<float>> vectors_;
};

// Generator that replays a fixed text -> sequence table; unmapped tweets
// yield the no-span sentinel.
class PlantedGenerator : public medtweet::SpanGenerator {
 public:
  PlantedGenerator(std::string id, std::map<std::string, std::string> outputs)
      : id_(std::move(id)), outputs_(std::move(outputs)) {}

  std::string id() const override { return id_; }

  std::string generate(std::string_view tweet_text) const override {
    auto it = outputs_.find(std::string(tweet_text));
    return it == outputs_.end() ? std::string(medtweet::kNoSpanSentinel) : it->second;
  }

 private:
  std::string id_;
  std::map<std::string, std::string> outputs_;
};

// Box-Muller over the library's deterministic generator.
inline double gaussian(medtweet::Rng& rng) {
  double u1 = rng.unit();
  double u2 = rng.unit();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline std::vector<float> random_unit_vector(medtweet::Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0;
  do {
    norm = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      v[i] = gaussian(rng);
      norm += v[i] * v[i];
    }
    norm = std::sqrt(norm);
  } while (norm < 1e-9);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
  // Renormalize in float so downstream unit-norm checks hold exactly.
  double fnorm = 0;
  for (float x : out) fnorm += static_cast<double>(x) * x;
  fnorm = std::sqrt(fnorm);
  for (float& x : out) x = static_cast<float>(x / fnorm);
  return out;
}

// Labeled corpus with exact class counts, ids t<k>, one therapy per tweet.
inline std::vector<medtweet::TweetRecord> synthetic_corpus(std::size_t positive,
                                                           std::size_t negative,
                                                           std::size_t neutral) {
  std::vector<medtweet::TweetRecord> records;
  records.reserve(positive + negative + neutral);
  auto push = [&](std::size_t count, medtweet::SentimentLabel label, const char* text) {
    for (std::size_t i = 0; i < count; ++i) {
      medtweet::TweetRecord r;
      r.tweet_id = "t" + std::to_string(records.size());
      r.text = text + std::string(" case ") + std::to_string(records.size());
      r.therapy = "therapy";
      r.label = label;
      records.push_back(std::move(r));
    }
  };
  push(positive, medtweet::SentimentLabel::positive, "this really helped me");
  push(negative, medtweet::SentimentLabel::negative, "this made everything worse");
  push(neutral, medtweet::SentimentLabel::neutral, "started a new course today");
  return records;
}

// Labeled pairs with the same exact class counts.
inline std::vector<medtweet::SentencePair> synthetic_pairs(std::size_t positive,
                                                           std::size_t negative,
                                                           std::size_t neutral) {
  std::vector<medtweet::SentencePair> pairs;
  medtweet::HypothesisTemplate tmpl;
  for (const medtweet::TweetRecord& r : synthetic_corpus(positive, negative, neutral))
    pairs.push_back(medtweet::build_pair(r, tmpl));
  return pairs;
}

}  // namespace testsupport
