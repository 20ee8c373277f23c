#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "medtweet/data_io.hpp"
#include "medtweet/errors.hpp"
#include "medtweet/model.hpp"
#include "medtweet/strings.hpp"

namespace medtweet {

// ---------------------------------------------------------------------------
// Sentiment classification report
// ---------------------------------------------------------------------------

struct PerClassScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

struct ClassificationReport {
  // confusion[gold][pred], canonical label order.
  std::array<std::array<std::size_t, 3>, 3> confusion{};
  std::array<PerClassScores, 3> per_class{};
  double micro_f1 = 0;
  std::size_t total = 0;
};

namespace detail {

inline double safe_div(double num, double den) { return den == 0 ? 0.0 : num / den; }

inline double f1_of(double precision, double recall) {
  return (precision + recall) == 0 ? 0.0 : 2 * precision * recall / (precision + recall);
}

inline std::string id_list(const std::vector<std::string>& ids, std::size_t cap = 8) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < cap; ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  if (ids.size() > cap) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

}  // namespace detail

// Requires exactly one prediction per gold tweet_id, no extras. Micro-F1 over
// single-label multiclass instances equals trace/total.
inline ClassificationReport evaluate_sentiment(const std::vector<IdLabel>& gold,
                                               const std::vector<PredictionRecord>& pred) {
  std::unordered_map<std::string, SentimentLabel> pred_of;
  pred_of.reserve(pred.size());
  for (const PredictionRecord& p : pred)
    if (!pred_of.emplace(p.tweet_id, p.label).second)
      throw eval_error("duplicate prediction for tweet " + p.tweet_id);

  std::unordered_set<std::string> gold_ids;
  gold_ids.reserve(gold.size());
  std::vector<std::string> missing;
  ClassificationReport report;
  for (const IdLabel& g : gold) {
    if (!gold_ids.insert(g.tweet_id).second)
      throw eval_error("duplicate gold label for tweet " + g.tweet_id);
    auto it = pred_of.find(g.tweet_id);
    if (it == pred_of.end()) {
      missing.push_back(g.tweet_id);
      continue;
    }
    ++report.confusion[static_cast<std::size_t>(g.label)][static_cast<std::size_t>(it->second)];
  }
  if (!missing.empty())
    throw eval_error("missing predictions for: " + detail::id_list(missing));

  std::vector<std::string> extras;
  for (const PredictionRecord& p : pred)
    if (!gold_ids.count(p.tweet_id)) extras.push_back(p.tweet_id);
  if (!extras.empty())
    throw eval_error("predictions for unknown tweets: " + detail::id_list(extras));

  std::size_t trace = 0;
  for (int c = 0; c < kNumLabels; ++c) {
    std::size_t row = 0, col = 0;
    for (int k = 0; k < kNumLabels; ++k) {
      row += report.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
      col += report.confusion[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
    }
    std::size_t hit = report.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    trace += hit;
    PerClassScores& s = report.per_class[static_cast<std::size_t>(c)];
    s.support = row;
    s.precision = detail::safe_div(static_cast<double>(hit), static_cast<double>(col));
    s.recall = detail::safe_div(static_cast<double>(hit), static_cast<double>(row));
    s.f1 = detail::f1_of(s.precision, s.recall);
  }
  report.total = gold.size();
  report.micro_f1 =
      detail::safe_div(static_cast<double>(trace), static_cast<double>(report.total));
  return report;
}

// ---------------------------------------------------------------------------
// ADE extraction/normalization report
// ---------------------------------------------------------------------------

enum class EvalScope { overall, unseen };

inline const char* to_string(EvalScope scope) {
  return scope == EvalScope::overall ? "overall" : "unseen";
}

struct ExtractionReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  EvalScope scope = EvalScope::overall;
};

namespace detail {

inline bool spans_overlap(const AdeAnnotation& a, const AdeAnnotation& b) {
  return a.start < b.end && b.start < a.end;
}

// A prediction matches a gold annotation iff the character ranges overlap and
// the concept ids are equal. Swap this function to change the matcher.
inline bool annotation_match(const AdeAnnotation& pred, const AdeAnnotation& gold) {
  return pred.tweet_id == gold.tweet_id && spans_overlap(pred, gold) &&
         pred.concept_id == gold.concept_id;
}

}  // namespace detail

// Greedy matching in prediction order; each gold annotation is consumed at
// most once. The unseen scope keeps only annotations (gold and predicted)
// whose concept_id never occurs in the training concepts.
inline ExtractionReport evaluate_extraction(const std::vector<AdeAnnotation>& gold,
                                            const std::vector<AdeAnnotation>& pred,
                                            const std::set<std::string>& train_concepts,
                                            EvalScope scope) {
  for (const AdeAnnotation& a : gold)
    if (a.start >= a.end) throw invalid_input("gold annotation with empty range on " + a.tweet_id);
  for (const AdeAnnotation& a : pred)
    if (a.start >= a.end)
      throw invalid_input("predicted annotation with empty range on " + a.tweet_id);
  {
    std::unordered_set<std::string> seen;
    for (const AdeAnnotation& a : gold) {
      std::string key = a.tweet_id + "\x1f" + std::to_string(a.start) + "\x1f" +
                        std::to_string(a.end) + "\x1f" + a.concept_id;
      if (!seen.insert(key).second)
        throw format_error("duplicate gold annotation on tweet " + a.tweet_id + " at [" +
                           std::to_string(a.start) + "," + std::to_string(a.end) + ")");
    }
  }

  auto in_scope = [&](const AdeAnnotation& a) {
    return scope == EvalScope::overall || train_concepts.count(a.concept_id) == 0;
  };

  std::unordered_map<std::string, std::vector<std::size_t>> gold_by_tweet;
  std::vector<bool> gold_used(gold.size(), false);
  std::size_t gold_in_scope = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!in_scope(gold[i])) continue;
    ++gold_in_scope;
    gold_by_tweet[gold[i].tweet_id].push_back(i);
  }

  ExtractionReport report;
  report.scope = scope;
  for (const AdeAnnotation& p : pred) {
    if (!in_scope(p)) continue;
    bool matched = false;
    auto it = gold_by_tweet.find(p.tweet_id);
    if (it != gold_by_tweet.end()) {
      for (std::size_t gi : it->second) {
        if (gold_used[gi]) continue;
        if (detail::annotation_match(p, gold[gi])) {
          gold_used[gi] = true;
          matched = true;
          break;
        }
      }
    }
    matched ? ++report.tp : ++report.fp;
  }
  report.fn = gold_in_scope - report.tp;
  report.precision = detail::safe_div(static_cast<double>(report.tp),
                                      static_cast<double>(report.tp + report.fp));
  report.recall = detail::safe_div(static_cast<double>(report.tp),
                                   static_cast<double>(report.tp + report.fn));
  report.f1 = detail::f1_of(report.precision, report.recall);
  return report;
}

// ---------------------------------------------------------------------------
// Rendering: aligned plain-text tables and machine-readable key-value lines.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace detail

inline std::string render_report(const ClassificationReport& report) {
  std::string out;
  out += detail::pad_right("class", 10) + detail::pad_left("precision", 11) +
         detail::pad_left("recall", 9) + detail::pad_left("f1", 9) +
         detail::pad_left("support", 9) + "\n";
  for (int c = 0; c < kNumLabels; ++c) {
    const PerClassScores& s = report.per_class[static_cast<std::size_t>(c)];
    out += detail::pad_right(to_string(static_cast<SentimentLabel>(c)), 10) +
           detail::pad_left(format_fixed(s.precision, 4), 11) +
           detail::pad_left(format_fixed(s.recall, 4), 9) +
           detail::pad_left(format_fixed(s.f1, 4), 9) +
           detail::pad_left(std::to_string(s.support), 9) + "\n";
  }
  out += detail::pad_right("micro-f1", 10) + detail::pad_left(format_fixed(report.micro_f1, 4), 11) +
         detail::pad_left("", 9) + detail::pad_left("", 9) +
         detail::pad_left(std::to_string(report.total), 9) + "\n";
  out += "\nconfusion (rows gold, cols predicted)\n";
  out += detail::pad_right("", 10);
  for (int c = 0; c < kNumLabels; ++c)
    out += detail::pad_left(to_string(static_cast<SentimentLabel>(c)), 10);
  out += "\n";
  for (int g = 0; g < kNumLabels; ++g) {
    out += detail::pad_right(to_string(static_cast<SentimentLabel>(g)), 10);
    for (int p = 0; p < kNumLabels; ++p)
      out += detail::pad_left(
          std::to_string(report.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)]),
          10);
    out += "\n";
  }
  return out;
}

inline std::vector<std::pair<std::string, std::string>> report_kv(
    const ClassificationReport& report) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("micro_f1", format_fixed(report.micro_f1, 6));
  kv.emplace_back("total", std::to_string(report.total));
  for (int c = 0; c < kNumLabels; ++c) {
    std::string name = to_string(static_cast<SentimentLabel>(c));
    const PerClassScores& s = report.per_class[static_cast<std::size_t>(c)];
    kv.emplace_back("precision." + name, format_fixed(s.precision, 6));
    kv.emplace_back("recall." + name, format_fixed(s.recall, 6));
    kv.emplace_back("f1." + name, format_fixed(s.f1, 6));
    kv.emplace_back("support." + name, std::to_string(s.support));
  }
  for (int g = 0; g < kNumLabels; ++g)
    for (int p = 0; p < kNumLabels; ++p)
      kv.emplace_back(std::string("confusion.") + to_string(static_cast<SentimentLabel>(g)) +
                          "." + to_string(static_cast<SentimentLabel>(p)),
                      std::to_string(report.confusion[static_cast<std::size_t>(g)]
                                                     [static_cast<std::size_t>(p)]));
  return kv;
}

inline std::string render_report(const ExtractionReport& report) {
  std::string out;
  out += detail::pad_right(std::string("scope=") + to_string(report.scope), 16);
  out += "tp=" + std::to_string(report.tp) + " fp=" + std::to_string(report.fp) +
         " fn=" + std::to_string(report.fn);
  out += "  precision=" + format_fixed(report.precision, 4) +
         " recall=" + format_fixed(report.recall, 4) + " f1=" + format_fixed(report.f1, 4) + "\n";
  return out;
}

inline std::vector<std::pair<std::string, std::string>> report_kv(const ExtractionReport& report) {
  std::string prefix = std::string(to_string(report.scope)) + ".";
  return {
      {prefix + "tp", std::to_string(report.tp)},
      {prefix + "fp", std::to_string(report.fp)},
      {prefix + "fn", std::to_string(report.fn)},
      {prefix + "precision", format_fixed(report.precision, 6)},
      {prefix + "recall", format_fixed(report.recall, 6)},
      {prefix + "f1", format_fixed(report.f1, 6)},
  };
}

inline void write_kv_records(const std::vector<std::pair<std::string, std::string>>& kv,
                             const std::string& path) {
  detail::TsvWriter w(path);
  for (const auto& [key, value] : kv) w.row({key, value});
  w.close();
}

}  // namespace medtweet
