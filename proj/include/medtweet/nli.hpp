#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medtweet/data_io.hpp"
#include "medtweet/errors.hpp"
#include "medtweet/preprocess.hpp"

namespace medtweet {

inline constexpr const char* kDefaultHypothesisTemplate = "This is on {therapy}";
inline constexpr const char* kTherapyPlaceholder = "{therapy}";

// A hypothesis pattern with exactly one {therapy} placeholder.
class HypothesisTemplate {
 public:
  explicit HypothesisTemplate(std::string pattern) : pattern_(std::move(pattern)) {
    std::size_t first = pattern_.find(kTherapyPlaceholder);
    if (first == std::string::npos)
      throw invalid_input("hypothesis template is missing the {therapy} placeholder");
    if (pattern_.find(kTherapyPlaceholder, first + 1) != std::string::npos)
      throw invalid_input("hypothesis template must contain {therapy} exactly once");
    placeholder_at_ = first;
  }

  HypothesisTemplate() : HypothesisTemplate(kDefaultHypothesisTemplate) {}

  const std::string& pattern() const { return pattern_; }

  // The therapy string is inserted verbatim; distinct therapies always yield
  // distinct hypotheses.
  std::string instantiate(std::string_view therapy) const {
    if (trim(therapy).empty())
      throw invalid_input("therapy must be nonempty");
    std::string out = pattern_;
    out.replace(placeholder_at_, std::char_traits<char>::length(kTherapyPlaceholder),
                therapy.data(), therapy.size());
    return out;
  }

 private:
  std::string pattern_;
  std::size_t placeholder_at_ = 0;
};

inline std::string build_hypothesis(const HypothesisTemplate& tmpl, std::string_view therapy) {
  return tmpl.instantiate(therapy);
}

// Premise/hypothesis pair; the unit consumed by the pair classifier.
struct SentencePair {
  std::string tweet_id;
  std::string premise;
  std::string hypothesis;
  std::optional<SentimentLabel> label;

  bool operator==(const SentencePair&) const = default;
};

// Tweet text becomes the preprocessed premise; the templated therapy
// statement becomes the hypothesis. The label passes through untouched.
inline SentencePair build_pair(const TweetRecord& record, const HypothesisTemplate& tmpl,
                               const EmoticonMap& map) {
  if (!record.therapy)
    throw invalid_input("tweet " + record.tweet_id + " has no therapy to pair on");
  SentencePair pair;
  pair.tweet_id = record.tweet_id;
  pair.premise = preprocess_tweet(record.text, map);
  pair.hypothesis = tmpl.instantiate(*record.therapy);
  pair.label = record.label;
  if (pair.premise.empty())
    throw invalid_input("tweet " + record.tweet_id + " has an empty premise");
  return pair;
}

inline SentencePair build_pair(const TweetRecord& record, const HypothesisTemplate& tmpl) {
  return build_pair(record, tmpl, default_emoticon_map());
}

// Logical `<cls> premise <sep> hypothesis <sep>` rendering. A model backend
// may inject its own special tokens instead, but must consume premise and
// hypothesis in this order.
inline std::string render_model_input(const SentencePair& pair, std::string_view cls_marker,
                                      std::string_view sep_marker) {
  if (cls_marker.empty() || sep_marker.empty())
    throw invalid_input("cls/sep markers must be nonempty");
  std::string out;
  out.reserve(cls_marker.size() + pair.premise.size() + pair.hypothesis.size() +
              2 * sep_marker.size() + 4);
  out += cls_marker;
  out += ' ';
  out += pair.premise;
  out += ' ';
  out += sep_marker;
  out += ' ';
  out += pair.hypothesis;
  out += ' ';
  out += sep_marker;
  return out;
}

inline std::string render_model_input(const SentencePair& pair) {
  return render_model_input(pair, "[CLS]", "[SEP]");
}

// ---------------------------------------------------------------------------
// Pairs file: header `tweet_id\tpremise\thypothesis\tlabel`; the label cell
// is empty for unlabeled pairs.
// ---------------------------------------------------------------------------

inline constexpr const char* kPairsHeader = "tweet_id\tpremise\thypothesis\tlabel";

inline void write_pairs(const std::vector<SentencePair>& pairs, const std::string& path) {
  detail::TsvWriter w(path);
  w.row({"tweet_id", "premise", "hypothesis", "label"});
  for (const SentencePair& p : pairs)
    w.row({p.tweet_id, p.premise, p.hypothesis,
           p.label ? std::string(to_string(*p.label)) : std::string()});
  w.close();
}

inline std::vector<SentencePair> load_pairs(const std::string& path) {
  std::vector<std::string> lines = detail::read_tsv_lines(path);
  if (lines.empty()) throw format_error(path, 1, "missing header row");
  if (lines[0] != kPairsHeader)
    throw format_error(path, 1, "unrecognized pairs header: \"" + lines[0] + "\"");
  std::vector<SentencePair> pairs;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f = detail::split_row(path, i + 1, lines[i], 4);
    SentencePair p;
    p.tweet_id = f[0];
    p.premise = f[1];
    p.hypothesis = f[2];
    if (p.tweet_id.empty()) throw format_error(path, i + 1, "empty tweet_id");
    if (p.premise.empty() || p.hypothesis.empty())
      throw format_error(path, i + 1, "premise and hypothesis must be nonempty");
    if (!f[3].empty()) {
      auto label = try_parse_label(f[3]);
      if (!label) throw format_error(path, i + 1, "unknown label \"" + f[3] + "\"");
      p.label = *label;
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace medtweet
