#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "medtweet/errors.hpp"
#include "medtweet/nli.hpp"
#include "medtweet/rng.hpp"
#include "medtweet/strings.hpp"

namespace medtweet {

// Target class proportions positive:negative:neutral, all components >= 1.
struct ClassRatio {
  std::uint64_t positive = 1;
  std::uint64_t negative = 1;
  std::uint64_t neutral = 2;

  std::uint64_t component(int label_index) const {
    switch (label_index) {
      case 0: return positive;
      case 1: return negative;
      default: return neutral;
    }
  }

  void validate() const {
    if (positive == 0 || negative == 0 || neutral == 0)
      throw invalid_input("ratio components must all be >= 1");
  }

  // Parses "P:N:U", e.g. "1:1:2".
  static ClassRatio parse(std::string_view s) {
    std::vector<std::string> parts = split(s, ':');
    if (parts.size() != 3) throw invalid_input("ratio must look like P:N:U, got \"" +
                                               std::string(s) + "\"");
    ClassRatio r;
    r.positive = static_cast<std::uint64_t>(parse_int(parts[0], "ratio component"));
    r.negative = static_cast<std::uint64_t>(parse_int(parts[1], "ratio component"));
    r.neutral = static_cast<std::uint64_t>(parse_int(parts[2], "ratio component"));
    r.validate();
    return r;
  }

  std::string to_string() const {
    return std::to_string(positive) + ":" + std::to_string(negative) + ":" +
           std::to_string(neutral);
  }
};

enum class UndersampleMode {
  // unit = min_c floor(count_c / ratio_c); every class is cut to ratio_c * unit,
  // so the output hits the requested ratio exactly.
  exact_ratio,
  // Only the neutral class is cut, to ratio_neu * max(count_pos / ratio_pos,
  // count_neg / ratio_neg), capped at its own count. Positive and negative
  // classes are untouched, so the ratio is approximate.
  neutral_only,
};

namespace detail {

inline std::array<std::vector<std::size_t>, 3> indices_by_label(
    const std::vector<SentencePair>& pairs) {
  std::array<std::vector<std::size_t>, 3> by_label;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].label)
      throw invalid_input("unlabeled pair " + pairs[i].tweet_id + " cannot be resampled");
    by_label[static_cast<std::size_t>(*pairs[i].label)].push_back(i);
  }
  for (int c = 0; c < kNumLabels; ++c)
    if (by_label[static_cast<std::size_t>(c)].empty())
      throw invalid_input(std::string("class \"") + to_string(static_cast<SentimentLabel>(c)) +
                          "\" has no pairs");
  return by_label;
}

}  // namespace detail

inline std::array<std::size_t, 3> undersample_targets(const std::array<std::size_t, 3>& counts,
                                                      const ClassRatio& ratio,
                                                      UndersampleMode mode) {
  std::array<std::size_t, 3> targets{};
  if (mode == UndersampleMode::exact_ratio) {
    std::uint64_t unit = UINT64_MAX;
    for (int c = 0; c < kNumLabels; ++c)
      unit = std::min(unit, counts[static_cast<std::size_t>(c)] / ratio.component(c));
    for (int c = 0; c < kNumLabels; ++c)
      targets[static_cast<std::size_t>(c)] =
          static_cast<std::size_t>(ratio.component(c) * unit);
  } else {
    targets[0] = counts[0];
    targets[1] = counts[1];
    std::uint64_t scale = std::max(counts[0] * ratio.neutral / ratio.positive,
                                   counts[1] * ratio.neutral / ratio.negative);
    targets[2] = static_cast<std::size_t>(std::min<std::uint64_t>(counts[2], scale));
  }
  return targets;
}

// Cuts each class to its target size by keeping a uniform random subset
// (classes already at target keep everything), then shuffles the survivors.
// Deterministic in (input order, ratio, seed).
inline std::vector<SentencePair> undersample(const std::vector<SentencePair>& pairs,
                                             const ClassRatio& ratio, std::uint64_t seed,
                                             UndersampleMode mode = UndersampleMode::exact_ratio) {
  ratio.validate();
  std::array<std::vector<std::size_t>, 3> by_label = detail::indices_by_label(pairs);
  std::array<std::size_t, 3> counts{by_label[0].size(), by_label[1].size(), by_label[2].size()};
  std::array<std::size_t, 3> targets = undersample_targets(counts, ratio, mode);

  Rng rng(seed);
  std::vector<std::size_t> kept;
  for (int c = 0; c < kNumLabels; ++c) {
    const std::vector<std::size_t>& members = by_label[static_cast<std::size_t>(c)];
    std::size_t target = targets[static_cast<std::size_t>(c)];
    if (target == members.size()) {
      kept.insert(kept.end(), members.begin(), members.end());
    } else {
      for (std::size_t pick : rng.sample_indices(members.size(), target))
        kept.push_back(members[pick]);
    }
  }
  rng.shuffle(kept);

  std::vector<SentencePair> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(pairs[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Train/dev splitting
// ---------------------------------------------------------------------------

struct SplitConfig {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = false;

  void validate() const {
    if (!(train_fraction > 0 && train_fraction < 1))
      throw invalid_input("train fraction must lie strictly between 0 and 1");
  }
};

template <typename T>
struct SplitResult {
  std::vector<T> train;
  std::vector<T> dev;
};

namespace detail {

// floor(fraction * n), nudged so values within 1e-9 of an integer land on it
// (0.7 * 10 must give 7, not 6).
inline std::size_t floor_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace detail

// Seed-deterministic partition: |train| = floor(train_fraction * n), the rest
// goes to dev. Both halves preserve the input order of their members. When
// stratified, the floor rule applies per class and remainders go to dev.
template <typename T, typename LabelFn>
SplitResult<T> split(const std::vector<T>& items, const SplitConfig& config, LabelFn&& label_of) {
  config.validate();
  if (items.empty()) throw invalid_input("cannot split an empty list");

  std::vector<bool> in_train(items.size(), false);
  Rng rng(config.seed);

  if (!config.stratified) {
    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::size_t k = detail::floor_count(config.train_fraction, items.size());
    for (std::size_t i = 0; i < k; ++i) in_train[order[i]] = true;
  } else {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < items.size(); ++i) by_class[label_of(items[i])].push_back(i);
    for (auto& [cls, members] : by_class) {
      rng.shuffle(members);
      std::size_t k = detail::floor_count(config.train_fraction, members.size());
      for (std::size_t i = 0; i < k; ++i) in_train[members[i]] = true;
    }
  }

  SplitResult<T> result;
  for (std::size_t i = 0; i < items.size(); ++i)
    (in_train[i] ? result.train : result.dev).push_back(items[i]);
  return result;
}

template <typename T>
SplitResult<T> split(const std::vector<T>& items, const SplitConfig& config) {
  if (config.stratified)
    throw invalid_input("stratified split requires a label projection");
  return split(items, config, [](const T&) { return 0; });
}

// Stratified splitting of sentence pairs keys on the sentiment label.
inline SplitResult<SentencePair> split_pairs(const std::vector<SentencePair>& pairs,
                                             const SplitConfig& config) {
  if (config.stratified) {
    for (const SentencePair& p : pairs)
      if (!p.label)
        throw invalid_input("unlabeled pair " + p.tweet_id + " cannot be split stratified");
  }
  return split(pairs, config,
               [](const SentencePair& p) { return static_cast<int>(*p.label); });
}

}  // namespace medtweet
