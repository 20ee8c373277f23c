#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "medtweet/binio.hpp"
#include "medtweet/data_io.hpp"
#include "medtweet/errors.hpp"
#include "medtweet/model.hpp"
#include "medtweet/strings.hpp"
#include "medtweet/utf8.hpp"

namespace medtweet {

inline constexpr double kDefaultLinkThreshold = 0.5;

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

struct LexiconEntry {
  std::string concept_id;
  std::string term;

  bool operator==(const LexiconEntry&) const = default;
};

// Lexicon file: UTF-8 TSV `concept_id\tterm`, no header. One concept may own
// many terms; exact duplicate rows collapse to the first occurrence.
inline std::vector<LexiconEntry> load_lexicon(const std::string& path) {
  std::vector<std::string> lines = detail::read_tsv_lines(path);
  std::vector<LexiconEntry> entries;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<std::string> f = detail::split_row(path, i + 1, lines[i], 2);
    if (f[0].empty()) throw format_error(path, i + 1, "blank concept_id");
    if (f[1].empty()) throw format_error(path, i + 1, "blank term");
    std::string key = f[0] + "\t" + f[1];
    if (!seen.insert(key).second) continue;
    entries.push_back(LexiconEntry{std::move(f[0]), std::move(f[1])});
  }
  return entries;
}

// ---------------------------------------------------------------------------
// Embedding index: one unit vector per lexicon entry, immutable once built.
// ---------------------------------------------------------------------------

class EmbeddingIndex {
 public:
  // Encodes every term with the named registered encoder.
  static EmbeddingIndex build(const std::vector<LexiconEntry>& lexicon,
                              const std::string& encoder_id) {
    if (lexicon.empty()) throw invalid_input("cannot build an index over an empty lexicon");
    std::vector<std::string> terms;
    terms.reserve(lexicon.size());
    for (const LexiconEntry& e : lexicon) terms.push_back(e.term);
    std::vector<std::vector<float>> encoded = encode_text(encoder_id, terms);
    std::size_t dim = encoded[0].size();
    std::vector<float> flat;
    flat.reserve(dim * lexicon.size());
    for (const std::vector<float>& v : encoded) flat.insert(flat.end(), v.begin(), v.end());
    return EmbeddingIndex(lexicon, std::move(flat), dim, encoder_id);
  }

  // Assembles an index from precomputed vectors (row-major, one row per
  // entry). Rows must already be unit length.
  static EmbeddingIndex from_vectors(std::vector<LexiconEntry> entries,
                                     std::vector<float> vectors, std::size_t dimension,
                                     std::string encoder_id) {
    return EmbeddingIndex(std::move(entries), std::move(vectors), dimension,
                          std::move(encoder_id));
  }

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::string& encoder_id() const { return encoder_id_; }

  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(vectors_.data() + i * dimension_, dimension_);
  }

  // Directory layout: index.meta (encoder, dimension, count), entries.tsv,
  // vectors.f32 (row-major little-endian float32).
  void save(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    {
      detail::TsvWriter w(dir + "/index.meta");
      w.row({"encoder", encoder_id_});
      w.row({"dimension", std::to_string(dimension_)});
      w.row({"count", std::to_string(entries_.size())});
      w.close();
    }
    {
      detail::TsvWriter w(dir + "/entries.tsv");
      for (const LexiconEntry& e : entries_) w.row({e.concept_id, e.term});
      w.close();
    }
    std::ofstream out(dir + "/vectors.f32", std::ios::binary);
    if (!out) throw io_error("cannot write " + dir + "/vectors.f32");
    detail::write_f32_le(out, vectors_.data(), vectors_.size());
    if (!out) throw io_error("write failed: " + dir + "/vectors.f32");
  }

  static EmbeddingIndex load(const std::string& dir) {
    std::vector<std::string> meta_lines = detail::read_tsv_lines(dir + "/index.meta");
    std::string encoder_id, dim_str, count_str;
    for (const std::string& line : meta_lines) {
      std::size_t tab = line.find('\t');
      if (tab == std::string::npos) continue;
      std::string key = line.substr(0, tab), value = line.substr(tab + 1);
      if (key == "encoder") encoder_id = value;
      else if (key == "dimension") dim_str = value;
      else if (key == "count") count_str = value;
    }
    if (encoder_id.empty() || dim_str.empty() || count_str.empty())
      throw format_error(dir + "/index.meta: missing encoder/dimension/count");
    std::size_t dim = static_cast<std::size_t>(parse_int(dim_str, "dimension"));
    std::size_t count = static_cast<std::size_t>(parse_int(count_str, "count"));

    std::vector<LexiconEntry> entries = load_lexicon(dir + "/entries.tsv");
    if (entries.size() != count)
      throw format_error(dir + ": entry count does not match index.meta");

    std::ifstream in(dir + "/vectors.f32", std::ios::binary);
    if (!in) throw io_error("cannot open " + dir + "/vectors.f32");
    std::vector<float> flat = detail::read_f32_le(in, dim * count);
    char extra;
    if (in.read(&extra, 1)) throw format_error(dir + "/vectors.f32: trailing bytes");
    return EmbeddingIndex(std::move(entries), std::move(flat), dim, std::move(encoder_id));
  }

 private:
  EmbeddingIndex(std::vector<LexiconEntry> entries, std::vector<float> vectors,
                 std::size_t dimension, std::string encoder_id)
      : entries_(std::move(entries)), vectors_(std::move(vectors)), dimension_(dimension),
        encoder_id_(std::move(encoder_id)) {
    if (entries_.empty()) throw invalid_input("cannot build an index over an empty lexicon");
    if (dimension_ == 0 || vectors_.size() != entries_.size() * dimension_)
      throw invalid_input("index vector matrix has the wrong shape");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      double norm = 0;
      for (float x : row(i)) norm += static_cast<double>(x) * x;
      norm = std::sqrt(norm);
      if (std::fabs(norm - 1.0) > 1e-6)
        throw invalid_input("index row " + std::to_string(i) + " is not unit length (norm " +
                            format_fixed(norm, 9) + ")");
    }
  }

  std::vector<LexiconEntry> entries_;
  std::vector<float> vectors_;  // row-major, entries x dimension
  std::size_t dimension_ = 0;
  std::string encoder_id_;
};

// ---------------------------------------------------------------------------
// Cosine similarity
// ---------------------------------------------------------------------------

template <typename T, typename U>
double cosine(std::span<const T> u, std::span<const U> v) {
  if (u.size() != v.size())
    throw invalid_input("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                        std::to_string(v.size()) + ")");
  if (u.empty()) throw invalid_input("cosine: empty vectors");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double a = static_cast<double>(u[i]);
    double b = static_cast<double>(v[i]);
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu <= 0 || nv <= 0) throw invalid_input("cosine: zero vector");
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

template <typename T, typename U>
double cosine(const std::vector<T>& u, const std::vector<U>& v) {
  return cosine(std::span<const T>(u), std::span<const U>(v));
}

// ---------------------------------------------------------------------------
// Linking
// ---------------------------------------------------------------------------

struct LinkResult {
  std::string concept_id;
  std::string term;
  double score = 0;

  bool operator==(const LinkResult&) const = default;
};

// Exhaustive top-1 retrieval for a precomputed unit query vector. Returns a
// result only when the best score strictly exceeds the threshold; score ties
// fall to the lexicographically smallest concept_id, then the earliest entry.
inline std::optional<LinkResult> link_vector(std::span<const float> query,
                                             const EmbeddingIndex& index,
                                             double threshold = kDefaultLinkThreshold) {
  if (query.size() != index.dimension())
    throw config_error("query dimension " + std::to_string(query.size()) +
                       " does not match index dimension " + std::to_string(index.dimension()));
  std::size_t best = 0;
  double best_score = 0;
  bool have = false;
  for (std::size_t i = 0; i < index.size(); ++i) {
    std::span<const float> r = index.row(i);
    double score = 0;
    for (std::size_t d = 0; d < r.size(); ++d)
      score += static_cast<double>(query[d]) * static_cast<double>(r[d]);
    if (!have || score > best_score ||
        (score == best_score && index.entries()[i].concept_id < index.entries()[best].concept_id)) {
      best = i;
      best_score = score;
      have = true;
    }
  }
  best_score = std::clamp(best_score, -1.0, 1.0);
  if (!(best_score > threshold)) return std::nullopt;
  return LinkResult{index.entries()[best].concept_id, index.entries()[best].term, best_score};
}

// Encodes the raw span text with the index's encoder and retrieves top-1.
inline std::optional<LinkResult> link(std::string_view span_text, const EmbeddingIndex& index,
                                      double threshold = kDefaultLinkThreshold) {
  if (span_text.empty()) throw invalid_input("cannot link an empty span");
  if (!BackendRegistry::instance().has_encoder(index.encoder_id()))
    throw config_error("index encoder \"" + index.encoder_id() + "\" is not registered");
  auto encoder = BackendRegistry::instance().encoder(index.encoder_id());
  std::vector<float> q = encoder->encode(span_text);
  return link_vector(q, index, threshold);
}

// First case-insensitive occurrence of span_text in tweet_text, as code-point
// offsets [start, end). Empty when the span does not anchor.
inline std::optional<utf8::CharSpan> resolve_offsets(std::string_view tweet_text,
                                                     std::string_view span_text) {
  if (tweet_text.empty() || span_text.empty())
    throw invalid_input("resolve_offsets needs nonempty tweet and span");
  return utf8::find_fold(tweet_text, span_text);
}

// ---------------------------------------------------------------------------
// Extraction + normalization pipeline
// ---------------------------------------------------------------------------

struct PipelineReport {
  std::size_t tweets = 0;
  std::size_t spans_generated = 0;
  std::size_t unanchored = 0;  // generator output not found in the tweet
  std::size_t unlinked = 0;    // best lexicon score at or below threshold
  std::size_t emitted = 0;
};

// resolve -> link for spans extracted in an earlier stage. Tweets are looked
// up by id; a span naming an unknown tweet is an input error.
inline std::vector<AdeAnnotation> link_extracted(const std::vector<TweetRecord>& tweets,
                                                 const std::vector<ExtractedSpan>& spans,
                                                 const EmbeddingIndex& index, double threshold,
                                                 PipelineReport* report = nullptr) {
  std::unordered_map<std::string, const TweetRecord*> by_id;
  for (const TweetRecord& t : tweets) by_id.emplace(t.tweet_id, &t);
  PipelineReport local;
  local.tweets = tweets.size();
  std::vector<AdeAnnotation> out;
  for (const ExtractedSpan& s : spans) {
    auto it = by_id.find(s.tweet_id);
    if (it == by_id.end())
      throw invalid_input("extracted span names unknown tweet " + s.tweet_id);
    const TweetRecord& tweet = *it->second;
    ++local.spans_generated;
    std::optional<utf8::CharSpan> at = resolve_offsets(tweet.text, s.span_text);
    if (!at) {
      ++local.unanchored;
      continue;
    }
    std::optional<LinkResult> hit = link(s.span_text, index, threshold);
    if (!hit) {
      ++local.unlinked;
      continue;
    }
    AdeAnnotation ann;
    ann.tweet_id = tweet.tweet_id;
    ann.start = at->start;
    ann.end = at->end;
    ann.span_text = std::string(utf8::substr(tweet.text, at->start, at->end));
    ann.concept_id = hit->concept_id;
    out.push_back(std::move(ann));
    ++local.emitted;
  }
  if (report) *report = local;
  return out;
}

// extract -> resolve -> link for every tweet; one annotation per span that
// both anchors and links. The emitted span text is the tweet's own slice.
inline std::vector<AdeAnnotation> normalize_pipeline(const std::vector<TweetRecord>& tweets,
                                                     const std::string& generator_id,
                                                     const EmbeddingIndex& index,
                                                     double threshold,
                                                     PipelineReport* report = nullptr) {
  PipelineReport local;
  std::vector<AdeAnnotation> out;
  for (const TweetRecord& tweet : tweets) {
    ++local.tweets;
    for (const std::string& span : extract_ade_spans(generator_id, tweet.text)) {
      ++local.spans_generated;
      std::optional<utf8::CharSpan> at = resolve_offsets(tweet.text, span);
      if (!at) {
        ++local.unanchored;
        continue;
      }
      std::optional<LinkResult> hit = link(span, index, threshold);
      if (!hit) {
        ++local.unlinked;
        continue;
      }
      AdeAnnotation ann;
      ann.tweet_id = tweet.tweet_id;
      ann.start = at->start;
      ann.end = at->end;
      ann.span_text = std::string(utf8::substr(tweet.text, at->start, at->end));
      ann.concept_id = hit->concept_id;
      out.push_back(std::move(ann));
      ++local.emitted;
    }
  }
  if (report) *report = local;
  return out;
}

}  // namespace medtweet
