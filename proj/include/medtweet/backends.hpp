#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "medtweet/binio.hpp"
#include "medtweet/data_io.hpp"
#include "medtweet/errors.hpp"
#include "medtweet/hashing.hpp"
#include "medtweet/model.hpp"
#include "medtweet/rng.hpp"
#include "medtweet/version.hpp"

namespace medtweet {

// ---------------------------------------------------------------------------
// Model directory layout:
//   model.meta        key\tvalue: tool, version, backend, checkpoint, labels
//   training_log.tsv  per-epoch stats (when the backend trained)
//   plus backend-specific parameter files (weights.f64, params.tsv, ...)
// ---------------------------------------------------------------------------

namespace detail {

inline std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::map<std::string, std::string> kv;
  for (const std::string& line : read_tsv_lines(path)) {
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw format_error(path, 0, "expected key\\tvalue lines");
    kv[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return kv;
}

inline std::string kv_get(const std::map<std::string, std::string>& kv, const std::string& key,
                          const std::string& where) {
  auto it = kv.find(key);
  if (it == kv.end()) throw format_error(where + " is missing key \"" + key + "\"");
  return it->second;
}

}  // namespace detail

inline void save_model(const ClassifierHandle& handle, const std::string& dir) {
  std::filesystem::create_directories(dir);
  detail::TsvWriter w(dir + "/model.meta");
  w.row({"tool", kToolName});
  w.row({"version", kVersion});
  w.row({"backend", handle.metadata().backend});
  w.row({"checkpoint", handle.metadata().checkpoint});
  w.row({"labels", "positive,negative,neutral"});
  w.close();
  handle.model().save_params(dir);
  if (!handle.training_log().empty())
    write_training_log(handle.training_log(), dir + "/training_log.tsv");
}

inline ClassifierHandle load_model(const std::string& dir) {
  auto kv = detail::read_kv_file(dir + "/model.meta");
  std::string where = dir + "/model.meta";
  if (detail::kv_get(kv, "labels", where) != "positive,negative,neutral")
    throw config_error("model at " + dir + " uses an unsupported label order");
  ClassifierMetadata meta;
  meta.backend = detail::kv_get(kv, "backend", where);
  meta.checkpoint = detail::kv_get(kv, "checkpoint", where);
  auto backend = BackendRegistry::instance().classifier(meta.backend);
  std::shared_ptr<const PairClassifier> model = backend->load_params(dir, kv);
  TrainingLog log;
  if (std::filesystem::exists(dir + "/training_log.tsv"))
    log = load_training_log(dir + "/training_log.tsv");
  return ClassifierHandle(std::move(model), std::move(meta), std::move(log));
}

// ---------------------------------------------------------------------------
// hash-linear: a softmax classifier over hashed bag-of-words features of the
// premise/hypothesis pair, trained with AdamW (decoupled weight decay).
// Deterministic given (data order, config, seed); small enough to fine-tune
// in milliseconds on a laptop, which is all the desk-scale contract needs.
// ---------------------------------------------------------------------------

class HashLinearClassifier : public PairClassifier {
 public:
  static constexpr std::size_t kBuckets = 1u << 15;

  struct SparseFeatures {
    std::vector<std::pair<std::uint32_t, float>> items;
    bool truncated = false;
  };

  HashLinearClassifier(std::vector<double> weights, std::array<double, 3> bias,
                       int max_sequence_length)
      : weights_(std::move(weights)), bias_(bias), max_sequence_length_(max_sequence_length) {
    if (weights_.size() != 3 * kBuckets)
      throw invalid_input("hash-linear weight vector has the wrong size");
  }

  int max_sequence_length() const { return max_sequence_length_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::array<double, 3>& bias() const { return bias_; }

  // Unigrams and in-segment bigrams, premise and hypothesis hashed into
  // disjoint salted spaces. The token budget covers both segments, premise
  // first; overruns are truncated and flagged.
  static SparseFeatures featurize(const SentencePair& pair, int max_tokens) {
    static const std::uint64_t salts[4] = {fnv1a64("premise-unigram"),
                                           fnv1a64("hypothesis-unigram"),
                                           fnv1a64("premise-bigram"),
                                           fnv1a64("hypothesis-bigram")};
    SparseFeatures out;
    std::vector<std::pair<std::uint32_t, float>>& items = out.items;
    int budget = max_tokens;
    for (int segment = 0; segment < 2; ++segment) {
      const std::string& text = segment == 0 ? pair.premise : pair.hypothesis;
      std::vector<std::string> tokens;
      for (const std::string& t : split(std::string_view(text), ' '))
        if (!t.empty()) tokens.push_back(t);
      if (static_cast<int>(tokens.size()) > budget) {
        tokens.resize(static_cast<std::size_t>(budget));
        out.truncated = true;
      }
      budget -= static_cast<int>(tokens.size());
      for (const std::string& t : tokens)
        items.emplace_back(bucket(fnv1a64(t, salts[segment])), 1.0f);
      for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        std::uint64_t h = fnv1a64(tokens[i + 1], fnv1a64("\x1f", fnv1a64(tokens[i], salts[segment + 2])));
        items.emplace_back(bucket(h), 1.0f);
      }
    }
    // Merge duplicate buckets so each index appears once.
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < items.size(); ++r) {
      if (w > 0 && items[w - 1].first == items[r].first) {
        items[w - 1].second += items[r].second;
      } else {
        items[w++] = items[r];
      }
    }
    items.resize(w);
    return out;
  }

  static std::array<double, 3> scores_of(const std::vector<double>& weights,
                                         const std::array<double, 3>& bias,
                                         const SparseFeatures& f) {
    std::array<double, 3> logits = bias;
    for (const auto& [idx, value] : f.items)
      for (std::size_t c = 0; c < 3; ++c)
        logits[c] += weights[c * kBuckets + idx] * static_cast<double>(value);
    return logits;
  }

  std::array<double, 3> scores(const SparseFeatures& f) const {
    return scores_of(weights_, bias_, f);
  }

  static std::array<double, 3> softmax(const std::array<double, 3>& logits) {
    double mx = std::max({logits[0], logits[1], logits[2]});
    std::array<double, 3> e{std::exp(logits[0] - mx), std::exp(logits[1] - mx),
                            std::exp(logits[2] - mx)};
    double sum = e[0] + e[1] + e[2];
    return {e[0] / sum, e[1] / sum, e[2] / sum};
  }

  std::vector<PredictionRecord> predict(const std::vector<SentencePair>& pairs,
                                        PredictReport* report) const override {
    PredictReport local;
    local.total = pairs.size();
    std::vector<PredictionRecord> out;
    out.reserve(pairs.size());
    for (const SentencePair& p : pairs) {
      SparseFeatures f = featurize(p, max_sequence_length_);
      if (f.truncated) ++local.truncated;
      out.push_back(make_prediction(p.tweet_id, softmax(scores(f))));
    }
    if (report) *report = local;
    return out;
  }

  void save_params(const std::string& dir) const override {
    {
      detail::TsvWriter w(dir + "/hash_linear.tsv");
      w.row({"buckets", std::to_string(kBuckets)});
      w.row({"max_sequence_length", std::to_string(max_sequence_length_)});
      w.close();
    }
    std::ofstream out(dir + "/weights.f64", std::ios::binary);
    if (!out) throw io_error("cannot write " + dir + "/weights.f64");
    detail::write_f64_le(out, weights_.data(), weights_.size());
    detail::write_f64_le(out, bias_.data(), bias_.size());
    if (!out) throw io_error("write failed: " + dir + "/weights.f64");
  }

  static std::shared_ptr<const HashLinearClassifier> from_files(const std::string& dir) {
    auto kv = detail::read_kv_file(dir + "/hash_linear.tsv");
    std::string where = dir + "/hash_linear.tsv";
    std::size_t buckets =
        static_cast<std::size_t>(parse_int(detail::kv_get(kv, "buckets", where), "buckets"));
    if (buckets != kBuckets)
      throw config_error("model bucket count " + std::to_string(buckets) +
                         " does not match this build (" + std::to_string(kBuckets) + ")");
    int max_len = static_cast<int>(
        parse_int(detail::kv_get(kv, "max_sequence_length", where), "max_sequence_length"));
    std::ifstream in(dir + "/weights.f64", std::ios::binary);
    if (!in) throw io_error("cannot open " + dir + "/weights.f64");
    std::vector<double> weights = detail::read_f64_le(in, 3 * kBuckets);
    std::vector<double> bias = detail::read_f64_le(in, 3);
    return std::make_shared<HashLinearClassifier>(
        std::move(weights), std::array<double, 3>{bias[0], bias[1], bias[2]}, max_len);
  }

 private:
  static std::uint32_t bucket(std::uint64_t h) {
    return static_cast<std::uint32_t>(h % kBuckets);
  }

  std::vector<double> weights_;  // row-major [label][bucket]
  std::array<double, 3> bias_;
  int max_sequence_length_;
};

class HashLinearBackend : public ClassifierBackend {
 public:
  std::string id() const override { return "hash-linear"; }

  ClassifierHandle train(const std::vector<SentencePair>& train_pairs,
                         const std::vector<SentencePair>& dev_pairs,
                         const TrainingConfig& config) const override {
    const std::size_t n = train_pairs.size();
    const std::size_t params = 3 * HashLinearClassifier::kBuckets;

    std::vector<HashLinearClassifier::SparseFeatures> feats(n);
    std::vector<int> gold(n);
    for (std::size_t i = 0; i < n; ++i) {
      feats[i] = HashLinearClassifier::featurize(train_pairs[i], config.max_sequence_length);
      gold[i] = static_cast<int>(*train_pairs[i].label);
    }

    std::vector<double> w(params, 0.0), m(params, 0.0), v(params, 0.0), grad(params, 0.0);
    std::array<double, 3> b{}, mb{}, vb{}, gb{};
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::uint64_t step = 0;

    Rng rng(config.seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    TrainingLog log;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      rng.shuffle(order);
      double lr = config.learning_rate *
                  std::pow(config.lr_schedule_decay, static_cast<double>(epoch - 1));
      double loss_sum = 0;

      for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
        std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
        double inv_batch = 1.0 / static_cast<double>(stop - start);

        std::vector<std::uint32_t> touched;
        for (std::size_t k = start; k < stop; ++k) {
          std::size_t i = order[k];
          std::array<double, 3> p =
              HashLinearClassifier::softmax(HashLinearClassifier::scores_of(w, b, feats[i]));
          double pg = std::max(p[static_cast<std::size_t>(gold[i])], 1e-12);
          loss_sum += -std::log(pg);
          for (int c = 0; c < 3; ++c) {
            double delta = (p[static_cast<std::size_t>(c)] - (c == gold[i] ? 1.0 : 0.0)) * inv_batch;
            gb[static_cast<std::size_t>(c)] += delta;
            for (const auto& [idx, value] : feats[i].items) {
              std::size_t slot = static_cast<std::size_t>(c) * HashLinearClassifier::kBuckets + idx;
              if (grad[slot] == 0.0) touched.push_back(static_cast<std::uint32_t>(slot));
              grad[slot] += delta * static_cast<double>(value);
            }
          }
        }

        ++step;
        double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < params; ++i) {
          double g = grad[i];
          w[i] -= lr * config.weight_decay_rate * w[i];
          m[i] = beta1 * m[i] + (1 - beta1) * g;
          v[i] = beta2 * v[i] + (1 - beta2) * g * g;
          w[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
        for (std::size_t c = 0; c < 3; ++c) {
          double g = gb[c];
          mb[c] = beta1 * mb[c] + (1 - beta1) * g;
          vb[c] = beta2 * vb[c] + (1 - beta2) * g * g;
          b[c] -= lr * (mb[c] / bc1) / (std::sqrt(vb[c] / bc2) + eps);
          gb[c] = 0;
        }
        for (std::uint32_t slot : touched) grad[slot] = 0;
      }

      EpochStats stats;
      stats.epoch = epoch;
      stats.train_loss = loss_sum / static_cast<double>(n);
      stats.dev_micro_f1 = std::nan("");
      if (!dev_pairs.empty()) {
        HashLinearClassifier snapshot(w, b, config.max_sequence_length);
        std::vector<PredictionRecord> preds = snapshot.predict(dev_pairs, nullptr);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < dev_pairs.size(); ++i)
          if (preds[i].label == *dev_pairs[i].label) ++correct;
        stats.dev_micro_f1 = static_cast<double>(correct) / static_cast<double>(dev_pairs.size());
      }
      log.push_back(stats);
    }

    auto model =
        std::make_shared<HashLinearClassifier>(std::move(w), b, config.max_sequence_length);
    ClassifierMetadata meta{"hash-linear", config.checkpoint};
    return ClassifierHandle(std::move(model), std::move(meta), std::move(log));
  }

  std::shared_ptr<const PairClassifier> load_params(
      const std::string& dir, const std::map<std::string, std::string>&) const override {
    return HashLinearClassifier::from_files(dir);
  }
};

// ---------------------------------------------------------------------------
// Baseline backends (registry adapters around the baseline constructors)
// ---------------------------------------------------------------------------

class MajorityBackend : public ClassifierBackend {
 public:
  std::string id() const override { return "majority"; }

  ClassifierHandle train(const std::vector<SentencePair>& train_pairs,
                         const std::vector<SentencePair>&,
                         const TrainingConfig&) const override {
    std::vector<SentimentLabel> labels;
    labels.reserve(train_pairs.size());
    for (const SentencePair& p : train_pairs) labels.push_back(*p.label);
    return majority_class_baseline(labels);
  }

  std::shared_ptr<const PairClassifier> load_params(
      const std::string& dir, const std::map<std::string, std::string>&) const override {
    auto kv = detail::read_kv_file(dir + "/params.tsv");
    std::string where = dir + "/params.tsv";
    if (detail::kv_get(kv, "kind", where) != "majority")
      throw config_error("model at " + dir + " is not a majority baseline");
    return std::make_shared<MajorityClassifier>(
        parse_label(detail::kv_get(kv, "label", where)));
  }
};

class DistributionBackend : public ClassifierBackend {
 public:
  std::string id() const override { return "distribution"; }

  ClassifierHandle train(const std::vector<SentencePair>& train_pairs,
                         const std::vector<SentencePair>&,
                         const TrainingConfig& config) const override {
    std::vector<SentimentLabel> labels;
    labels.reserve(train_pairs.size());
    for (const SentencePair& p : train_pairs) labels.push_back(*p.label);
    return distribution_baseline(labels, config.seed);
  }

  std::shared_ptr<const PairClassifier> load_params(
      const std::string& dir, const std::map<std::string, std::string>&) const override {
    auto kv = detail::read_kv_file(dir + "/params.tsv");
    std::string where = dir + "/params.tsv";
    if (detail::kv_get(kv, "kind", where) != "distribution")
      throw config_error("model at " + dir + " is not a distribution baseline");
    std::array<double, 3> dist{};
    for (int i = 0; i < kNumLabels; ++i)
      dist[static_cast<std::size_t>(i)] = parse_double(detail::kv_get(
          kv, std::string("p_") + to_string(static_cast<SentimentLabel>(i)), where));
    std::uint64_t seed =
        static_cast<std::uint64_t>(parse_int(detail::kv_get(kv, "seed", where), "seed"));
    return std::make_shared<DistributionClassifier>(dist, seed);
  }
};

// ---------------------------------------------------------------------------
// hash-ngram: deterministic character-n-gram hashing encoder. Strings that
// share 3/4-grams land near each other, which is enough signal for fuzzy
// lexicon retrieval; heavyweight sentence encoders plug in through the same
// TextEncoder interface.
// ---------------------------------------------------------------------------

class CharNgramEncoder : public TextEncoder {
 public:
  explicit CharNgramEncoder(std::string id = "hash-ngram", std::size_t dimension = 256)
      : id_(std::move(id)), dimension_(dimension) {
    if (dimension_ == 0) throw config_error("encoder dimension must be >= 1");
  }

  std::string id() const override { return id_; }
  std::size_t dimension() const override { return dimension_; }

  std::vector<float> encode(std::string_view text) const override {
    if (text.empty()) throw invalid_input("cannot encode an empty string");
    std::string padded = "^" + ascii_fold(text) + "$";
    std::vector<double> acc(dimension_, 0.0);
    for (std::size_t n = 3; n <= 4; ++n) {
      if (padded.size() < n) continue;
      for (std::size_t i = 0; i + n <= padded.size(); ++i) {
        std::uint64_t h = fnv1a64(std::string_view(padded).substr(i, n));
        double sign = (h >> 63) ? -1.0 : 1.0;
        acc[(h >> 1) % dimension_] += sign;
      }
    }
    double norm = 0;
    for (double x : acc) norm += x * x;
    norm = std::sqrt(norm);
    std::vector<float> out(dimension_, 0.0f);
    if (norm < 1e-12) {
      out[fnv1a64(text) % dimension_] = 1.0f;
      return out;
    }
    for (std::size_t i = 0; i < dimension_; ++i)
      out[i] = static_cast<float>(acc[i] / norm);
    return out;
  }

 private:
  std::string id_;
  std::size_t dimension_;
};

// ---------------------------------------------------------------------------
// gazetteer: phrase-list span generator. Fit collects the distinct annotated
// span texts from a training corpus; generation scans for them with greedy
// leftmost-longest matching at ASCII word boundaries and emits the matched
// tweet slices joined by "; " (or the "none" sentinel).
// ---------------------------------------------------------------------------

class GazetteerGenerator : public SpanGenerator {
 public:
  explicit GazetteerGenerator(std::vector<std::string> phrases, std::string id = "gazetteer")
      : id_(std::move(id)) {
    std::unordered_set<std::string> seen;
    for (std::string& raw : phrases) {
      std::string folded = ascii_fold(trim(raw));
      if (folded.empty()) continue;
      if (folded == kNoSpanSentinel)
        throw invalid_input("gazetteer phrase collides with the no-span sentinel");
      if (folded.find(kSpanSeparator) != std::string::npos)
        throw invalid_input("gazetteer phrase may not contain the span separator: \"" + raw + "\"");
      detail::check_field(folded, "gazetteer phrase");
      if (seen.insert(folded).second) phrases_.push_back(std::move(folded));
    }
    if (phrases_.empty()) throw invalid_input("gazetteer needs at least one phrase");
    std::sort(phrases_.begin(), phrases_.end(), [](const auto& a, const auto& b) {
      return a.size() != b.size() ? a.size() > b.size() : a < b;
    });
  }

  static GazetteerGenerator from_phrase_file(const std::string& path,
                                             std::string id = "gazetteer") {
    std::vector<std::string> phrases;
    for (const std::string& line : detail::read_tsv_lines(path)) {
      std::string_view t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      phrases.emplace_back(t);
    }
    return GazetteerGenerator(std::move(phrases), std::move(id));
  }

  static GazetteerGenerator fit_from_corpus(const std::vector<AdeTweet>& corpus,
                                            std::string id = "gazetteer") {
    std::vector<std::string> phrases;
    for (const AdeTweet& t : corpus)
      for (const AdeAnnotation& a : t.annotations) phrases.push_back(a.span_text);
    return GazetteerGenerator(std::move(phrases), std::move(id));
  }

  std::string id() const override { return id_; }
  std::size_t size() const { return phrases_.size(); }

  std::string generate(std::string_view tweet_text) const override {
    std::string folded = ascii_fold(tweet_text);
    std::vector<std::string> hits;
    std::size_t i = 0;
    while (i < folded.size()) {
      const std::string* match = nullptr;
      for (const std::string& phrase : phrases_) {
        if (phrase.size() > folded.size() - i) continue;
        if (folded.compare(i, phrase.size(), phrase) != 0) continue;
        bool left_ok = (i == 0) || !is_word_char(folded[i - 1]);
        std::size_t after = i + phrase.size();
        bool right_ok = (after == folded.size()) || !is_word_char(folded[after]);
        if (left_ok && right_ok) {
          match = &phrase;
          break;
        }
      }
      if (match) {
        hits.emplace_back(tweet_text.substr(i, match->size()));
        i += match->size();
      } else {
        ++i;
      }
    }
    if (hits.empty()) return kNoSpanSentinel;
    return join(hits, kSpanSeparator);
  }

 private:
  std::string id_;
  std::vector<std::string> phrases_;  // folded, longest first
};

// Registers the built-in backends; safe to call more than once.
inline void register_builtin_backends() {
  BackendRegistry& r = BackendRegistry::instance();
  r.register_classifier(std::make_shared<HashLinearBackend>());
  r.register_classifier(std::make_shared<MajorityBackend>());
  r.register_classifier(std::make_shared<DistributionBackend>());
  r.register_encoder(std::make_shared<CharNgramEncoder>());
}

}  // namespace medtweet
