#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "medtweet/errors.hpp"
#include "medtweet/strings.hpp"
#include "medtweet/utf8.hpp"

namespace medtweet {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// Canonical label order: positive=0, negative=1, neutral=2.
enum class SentimentLabel : int { positive = 0, negative = 1, neutral = 2 };

inline constexpr int kNumLabels = 3;

inline const char* to_string(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::positive: return "positive";
    case SentimentLabel::negative: return "negative";
    case SentimentLabel::neutral: return "neutral";
  }
  return "?";
}

inline std::optional<SentimentLabel> try_parse_label(std::string_view s) {
  std::string folded = ascii_fold(s);
  if (folded == "positive") return SentimentLabel::positive;
  if (folded == "negative") return SentimentLabel::negative;
  if (folded == "neutral") return SentimentLabel::neutral;
  return std::nullopt;
}

inline SentimentLabel parse_label(std::string_view s) {
  auto label = try_parse_label(s);
  if (!label) throw invalid_input("unknown sentiment label \"" + std::string(s) + "\"");
  return *label;
}

// One row of the sentiment corpus: a tweet, optionally tied to a therapy
// aspect and a gold label. A tweet may repeat with different therapies.
struct TweetRecord {
  std::string tweet_id;
  std::string text;
  std::optional<std::string> therapy;
  std::optional<SentimentLabel> label;

  bool operator==(const TweetRecord&) const = default;
};

// One adverse-event annotation or prediction. Offsets are Unicode
// code points into the tweet text, [start, end).
struct AdeAnnotation {
  std::string tweet_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string span_text;
  std::string concept_id;

  bool operator==(const AdeAnnotation&) const = default;
};

struct AdeTweet {
  TweetRecord tweet;
  std::vector<AdeAnnotation> annotations;

  bool operator==(const AdeTweet&) const = default;
};

// (tweet_id, label) pair: the unit of gold sets and written predictions.
struct IdLabel {
  std::string tweet_id;
  SentimentLabel label = SentimentLabel::neutral;

  bool operator==(const IdLabel&) const = default;
};

// Extraction-stage output row, before offsets and concepts are resolved.
struct ExtractedSpan {
  std::string tweet_id;
  std::string span_text;

  bool operator==(const ExtractedSpan&) const = default;
};

// Throws unless the annotation's offsets and span text agree with the tweet
// text (case-insensitive, code-point offsets).
inline void validate_annotation(const AdeAnnotation& ann, std::string_view tweet_text) {
  std::size_t n = utf8::length(tweet_text);
  if (ann.start >= ann.end || ann.end > n)
    throw invalid_input("annotation offsets [" + std::to_string(ann.start) + "," +
                        std::to_string(ann.end) + ") out of range for tweet " + ann.tweet_id);
  std::string_view actual = utf8::substr(tweet_text, ann.start, ann.end);
  if (ascii_fold(actual) != ascii_fold(ann.span_text))
    throw invalid_input("span text \"" + ann.span_text + "\" does not match tweet " +
                        ann.tweet_id + " at [" + std::to_string(ann.start) + "," +
                        std::to_string(ann.end) + ") (found \"" + std::string(actual) + "\")");
}

// ---------------------------------------------------------------------------
// TSV plumbing. No quoting or escaping: tabs and newlines are banned inside
// fields and rejected on both read and write.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> read_tsv_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline std::vector<std::string> split_row(const std::string& path, std::size_t line_no,
                                          const std::string& line, std::size_t n_cols) {
  if (line.find('\r') != std::string::npos)
    throw format_error(path, line_no, "carriage return inside a field");
  std::vector<std::string> fields = split(std::string_view(line), '\t');
  if (fields.size() != n_cols)
    throw format_error(path, line_no,
                       "expected " + std::to_string(n_cols) + " columns, got " +
                           std::to_string(fields.size()));
  if (!utf8::is_valid(line)) throw format_error(path, line_no, "invalid UTF-8");
  return fields;
}

inline void check_field(std::string_view field, std::string_view what) {
  if (field.find('\t') != std::string_view::npos ||
      field.find('\n') != std::string_view::npos ||
      field.find('\r') != std::string_view::npos)
    throw invalid_input("tab/newline inside " + std::string(what) + " is not representable");
}

class TsvWriter {
 public:
  explicit TsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw io_error("cannot open file for writing: " + path);
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      check_field(fields[i], "TSV field");
      if (i) out_ << '\t';
      out_ << fields[i];
    }
    out_ << '\n';
  }

  void close() {
    out_.flush();
    if (!out_) throw io_error("write failed: " + path_);
    out_.close();
  }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Sentiment corpus: header `tweet_id\ttext\ttherapy\tlabel`. The label
// column (or both therapy and label) may be absent for unlabeled sets.
// ---------------------------------------------------------------------------

inline constexpr const char* kSentimentHeaderFull = "tweet_id\ttext\ttherapy\tlabel";
inline constexpr const char* kSentimentHeaderNoLabel = "tweet_id\ttext\ttherapy";
inline constexpr const char* kSentimentHeaderBare = "tweet_id\ttext";

inline std::vector<TweetRecord> load_sentiment_corpus(const std::string& path) {
  std::vector<std::string> lines = detail::read_tsv_lines(path);
  if (lines.empty()) throw format_error(path, 1, "missing header row");
  std::size_t n_cols;
  if (lines[0] == kSentimentHeaderFull) n_cols = 4;
  else if (lines[0] == kSentimentHeaderNoLabel) n_cols = 3;
  else if (lines[0] == kSentimentHeaderBare) n_cols = 2;
  else throw format_error(path, 1, "unrecognized sentiment corpus header: \"" + lines[0] + "\"");

  std::vector<TweetRecord> records;
  std::unordered_set<std::string> seen_ids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::size_t line_no = i + 1;
    std::vector<std::string> f = detail::split_row(path, line_no, lines[i], n_cols);
    TweetRecord rec;
    rec.tweet_id = f[0];
    rec.text = f[1];
    if (rec.tweet_id.empty()) throw format_error(path, line_no, "empty tweet_id");
    if (!seen_ids.insert(rec.tweet_id).second)
      throw format_error(path, line_no, "duplicate tweet_id \"" + rec.tweet_id + "\"");
    if (n_cols >= 3 && !f[2].empty()) rec.therapy = f[2];
    if (n_cols == 4 && !f[3].empty()) {
      auto label = try_parse_label(f[3]);
      if (!label) throw format_error(path, line_no, "unknown label \"" + f[3] + "\"");
      rec.label = *label;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline void write_sentiment_corpus(const std::vector<TweetRecord>& records,
                                   const std::string& path) {
  detail::TsvWriter w(path);
  w.row({"tweet_id", "text", "therapy", "label"});
  for (const TweetRecord& r : records)
    w.row({r.tweet_id, r.text, r.therapy.value_or(""),
           r.label ? std::string(to_string(*r.label)) : std::string()});
  w.close();
}

// ---------------------------------------------------------------------------
// ADE corpus: header `tweet_id\ttext\thas_ade\tstart\tend\tspan\tconcept_id`.
// Tweets without an ADE carry has_ade=0 and empty span columns; tweets with
// several ADEs repeat across rows, one annotation per row.
// ---------------------------------------------------------------------------

inline constexpr const char* kAdeHeader = "tweet_id\ttext\thas_ade\tstart\tend\tspan\tconcept_id";

inline std::vector<AdeTweet> load_ade_corpus(const std::string& path) {
  std::vector<std::string> lines = detail::read_tsv_lines(path);
  if (lines.empty()) throw format_error(path, 1, "missing header row");
  if (lines[0] != kAdeHeader)
    throw format_error(path, 1, "unrecognized ADE corpus header: \"" + lines[0] + "\"");

  std::vector<AdeTweet> tweets;
  std::unordered_map<std::string, std::size_t> index_of;
  std::vector<char> has_ade_flag;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::size_t line_no = i + 1;
    std::vector<std::string> f = detail::split_row(path, line_no, lines[i], 7);
    const std::string& id = f[0];
    const std::string& text = f[1];
    if (id.empty()) throw format_error(path, line_no, "empty tweet_id");

    std::size_t slot;
    auto it = index_of.find(id);
    if (it == index_of.end()) {
      slot = tweets.size();
      index_of.emplace(id, slot);
      tweets.push_back(AdeTweet{TweetRecord{id, text, std::nullopt, std::nullopt}, {}});
      has_ade_flag.push_back(f[2] == "1" ? 1 : 0);
    } else {
      slot = it->second;
      if (tweets[slot].tweet.text != text)
        throw format_error(path, line_no, "tweet_id \"" + id + "\" repeats with different text");
      if (has_ade_flag[slot] != (f[2] == "1" ? 1 : 0))
        throw format_error(path, line_no,
                           "tweet_id \"" + id + "\" mixes has_ade=0 and has_ade=1 rows");
    }

    if (f[2] == "0") {
      if (!f[3].empty() || !f[4].empty() || !f[5].empty() || !f[6].empty())
        throw format_error(path, line_no, "has_ade=0 row must have empty span columns");
      continue;
    }
    if (f[2] != "1") throw format_error(path, line_no, "has_ade must be 0 or 1");
    if (f[5].empty() || f[6].empty())
      throw format_error(path, line_no, "has_ade=1 row requires span and concept_id");

    AdeAnnotation ann;
    ann.tweet_id = id;
    try {
      ann.start = static_cast<std::size_t>(parse_int(f[3], "start offset"));
      ann.end = static_cast<std::size_t>(parse_int(f[4], "end offset"));
    } catch (const invalid_input& e) {
      throw format_error(path, line_no, e.what());
    }
    ann.span_text = f[5];
    ann.concept_id = f[6];
    try {
      validate_annotation(ann, text);
    } catch (const invalid_input& e) {
      throw format_error(path, line_no, e.what());
    }
    tweets[slot].annotations.push_back(std::move(ann));
  }
  return tweets;
}

inline void write_ade_corpus(const std::vector<AdeTweet>& tweets, const std::string& path) {
  detail::TsvWriter w(path);
  w.row({"tweet_id", "text", "has_ade", "start", "end", "span", "concept_id"});
  for (const AdeTweet& t : tweets) {
    if (t.annotations.empty()) {
      w.row({t.tweet.tweet_id, t.tweet.text, "0", "", "", "", ""});
      continue;
    }
    for (const AdeAnnotation& a : t.annotations)
      w.row({t.tweet.tweet_id, t.tweet.text, "1", std::to_string(a.start),
             std::to_string(a.end), a.span_text, a.concept_id});
  }
  w.close();
}

// ---------------------------------------------------------------------------
// Prediction files, line-delimited without header by default.
//   Task 2 rows: tweet_id\tlabel
//   Task 5 rows: tweet_id\tstart\tend\tspan\tconcept_id
// ---------------------------------------------------------------------------

inline void write_sentiment_predictions(const std::vector<IdLabel>& rows,
                                        const std::string& path, bool with_header = false) {
  detail::TsvWriter w(path);
  if (with_header) w.row({"tweet_id", "label"});
  for (const IdLabel& r : rows) w.row({r.tweet_id, to_string(r.label)});
  w.close();
}

inline std::vector<IdLabel> load_sentiment_predictions(const std::string& path) {
  std::vector<std::string> lines = detail::read_tsv_lines(path);
  std::vector<IdLabel> rows;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i == 0 && lines[i] == "tweet_id\tlabel") continue;  // optional header
    std::vector<std::string> f = detail::split_row(path, i + 1, lines[i], 2);
    auto label = try_parse_label(f[1]);
    if (!label) throw format_error(path, i + 1, "unknown label \"" + f[1] + "\"");
    if (f[0].empty()) throw format_error(path, i + 1, "empty tweet_id");
    rows.push_back(IdLabel{f[0], *label});
  }
  return rows;
}

inline void write_ade_predictions(const std::vector<AdeAnnotation>& rows,
                                  const std::string& path, bool with_header = false) {
  detail::TsvWriter w(path);
  if (with_header) w.row({"tweet_id", "start", "end", "span", "concept_id"});
  for (const AdeAnnotation& r : rows)
    w.row({r.tweet_id, std::to_string(r.start), std::to_string(r.end), r.span_text,
           r.concept_id});
  w.close();
}

inline std::vector<AdeAnnotation> load_ade_predictions(const std::string& path) {
  std::vector<std::string> lines = detail::read_tsv_lines(path);
  std::vector<AdeAnnotation> rows;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i == 0 && lines[i] == "tweet_id\tstart\tend\tspan\tconcept_id") continue;
    std::vector<std::string> f = detail::split_row(path, i + 1, lines[i], 5);
    AdeAnnotation ann;
    ann.tweet_id = f[0];
    try {
      ann.start = static_cast<std::size_t>(parse_int(f[1], "start offset"));
      ann.end = static_cast<std::size_t>(parse_int(f[2], "end offset"));
    } catch (const invalid_input& e) {
      throw format_error(path, i + 1, e.what());
    }
    ann.span_text = f[3];
    ann.concept_id = f[4];
    if (ann.tweet_id.empty()) throw format_error(path, i + 1, "empty tweet_id");
    if (ann.start >= ann.end)
      throw format_error(path, i + 1, "offsets must satisfy start < end");
    rows.push_back(std::move(ann));
  }
  return rows;
}

// Extraction-stage spans: headerless `tweet_id\tspan` rows.
inline void write_extracted_spans(const std::vector<ExtractedSpan>& rows,
                                  const std::string& path) {
  detail::TsvWriter w(path);
  for (const ExtractedSpan& r : rows) w.row({r.tweet_id, r.span_text});
  w.close();
}

inline std::vector<ExtractedSpan> load_extracted_spans(const std::string& path) {
  std::vector<std::string> lines = detail::read_tsv_lines(path);
  std::vector<ExtractedSpan> rows;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<std::string> f = detail::split_row(path, i + 1, lines[i], 2);
    if (f[0].empty()) throw format_error(path, i + 1, "empty tweet_id");
    if (f[1].empty()) throw format_error(path, i + 1, "empty span");
    rows.push_back(ExtractedSpan{f[0], f[1]});
  }
  return rows;
}

}  // namespace medtweet
