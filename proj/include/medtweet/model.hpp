#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "medtweet/data_io.hpp"
#include "medtweet/errors.hpp"
#include "medtweet/nli.hpp"
#include "medtweet/rng.hpp"
#include "medtweet/strings.hpp"

namespace medtweet {

// ---------------------------------------------------------------------------
// Training configuration
// ---------------------------------------------------------------------------

struct TrainingConfig {
  int epochs = 10;
  double learning_rate = 5e-6;
  // Decoupled weight-decay coefficient of the AdamW-style optimizer.
  double weight_decay_rate = 0.9;
  // Per-epoch learning-rate multiplier; 1.0 keeps the rate constant.
  double lr_schedule_decay = 1.0;
  int batch_size = 16;
  int max_sequence_length = 128;
  std::uint64_t seed = 0;
  std::string checkpoint = "builtin";
  std::string cache_dir;

  void validate() const {
    if (epochs <= 0) throw config_error("epochs must be >= 1");
    if (!(learning_rate > 0)) throw config_error("learning rate must be positive");
    if (!(weight_decay_rate >= 0 && weight_decay_rate < 1))
      throw config_error("weight decay rate must be in [0, 1)");
    if (!(lr_schedule_decay > 0 && lr_schedule_decay <= 1))
      throw config_error("lr schedule decay must be in (0, 1]");
    if (batch_size <= 0) throw config_error("batch size must be >= 1");
    if (max_sequence_length <= 0) throw config_error("max sequence length must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// Prediction records
// ---------------------------------------------------------------------------

struct PredictionRecord {
  std::string tweet_id;
  SentimentLabel label = SentimentLabel::neutral;
  std::array<double, 3> probabilities{};
};

// Argmax with ties broken by canonical label order.
inline SentimentLabel argmax_label(const std::array<double, 3>& probs) {
  int best = 0;
  for (int i = 1; i < kNumLabels; ++i)
    if (probs[static_cast<std::size_t>(i)] > probs[static_cast<std::size_t>(best)]) best = i;
  return static_cast<SentimentLabel>(best);
}

inline PredictionRecord make_prediction(std::string tweet_id, std::array<double, 3> probs) {
  double sum = probs[0] + probs[1] + probs[2];
  if (!(std::fabs(sum - 1.0) <= 1e-6) || probs[0] < 0 || probs[1] < 0 || probs[2] < 0)
    throw invalid_input("probabilities must be nonnegative and sum to 1");
  PredictionRecord rec;
  rec.tweet_id = std::move(tweet_id);
  rec.probabilities = probs;
  rec.label = argmax_label(probs);
  return rec;
}

inline PredictionRecord one_hot_prediction(std::string tweet_id, SentimentLabel label) {
  std::array<double, 3> probs{};
  probs[static_cast<std::size_t>(label)] = 1.0;
  return make_prediction(std::move(tweet_id), probs);
}

// ---------------------------------------------------------------------------
// Training log: one row per epoch. dev_micro_f1 is NaN when there is no dev
// set to score.
// ---------------------------------------------------------------------------

struct EpochStats {
  int epoch = 0;
  double train_loss = 0;
  double dev_micro_f1 = 0;
};

using TrainingLog = std::vector<EpochStats>;

inline void write_training_log(const TrainingLog& log, const std::string& path) {
  detail::TsvWriter w(path);
  w.row({"epoch", "train_loss", "dev_micro_f1"});
  for (const EpochStats& e : log)
    w.row({std::to_string(e.epoch), format_fixed(e.train_loss, 6),
           std::isnan(e.dev_micro_f1) ? "nan" : format_fixed(e.dev_micro_f1, 6)});
  w.close();
}

inline TrainingLog load_training_log(const std::string& path) {
  std::vector<std::string> lines = detail::read_tsv_lines(path);
  TrainingLog log;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i == 0 && lines[i] == "epoch\ttrain_loss\tdev_micro_f1") continue;
    std::vector<std::string> f = detail::split_row(path, i + 1, lines[i], 3);
    EpochStats e;
    e.epoch = static_cast<int>(parse_int(f[0], "epoch"));
    e.train_loss = parse_double(f[1], "train loss");
    e.dev_micro_f1 = (f[2] == "nan") ? std::nan("") : parse_double(f[2], "dev micro-F1");
    log.push_back(e);
  }
  return log;
}

// ---------------------------------------------------------------------------
// Backend contracts
// ---------------------------------------------------------------------------

struct PredictReport {
  std::size_t total = 0;
  std::size_t truncated = 0;
};

// A trained pair classifier. Prediction is a pure function of (model, input);
// implementations must not keep mutable state across calls.
class PairClassifier {
 public:
  virtual ~PairClassifier() = default;
  virtual std::vector<PredictionRecord> predict(const std::vector<SentencePair>& pairs,
                                                PredictReport* report) const = 0;
  // Backend-specific parameter files inside an existing model directory.
  virtual void save_params(const std::string& dir) const = 0;
};

struct ClassifierMetadata {
  std::string backend;
  std::string checkpoint;
  std::array<SentimentLabel, 3> label_order = {SentimentLabel::positive,
                                               SentimentLabel::negative,
                                               SentimentLabel::neutral};
};

// Value handle around an immutable trained model.
class ClassifierHandle {
 public:
  ClassifierHandle() = default;
  ClassifierHandle(std::shared_ptr<const PairClassifier> model, ClassifierMetadata meta,
                   TrainingLog log = {})
      : model_(std::move(model)), meta_(std::move(meta)), log_(std::move(log)) {}

  bool valid() const { return model_ != nullptr; }
  const ClassifierMetadata& metadata() const { return meta_; }
  const TrainingLog& training_log() const { return log_; }

  std::vector<PredictionRecord> predict(const std::vector<SentencePair>& pairs,
                                        PredictReport* report = nullptr) const {
    if (!model_) throw invalid_input("classifier handle is empty");
    return model_->predict(pairs, report);
  }

  const PairClassifier& model() const {
    if (!model_) throw invalid_input("classifier handle is empty");
    return *model_;
  }

 private:
  std::shared_ptr<const PairClassifier> model_;
  ClassifierMetadata meta_;
  TrainingLog log_;
};

// Factory for one classifier backend id: trains from pairs, reloads saved
// parameter files.
class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;
  virtual std::string id() const = 0;
  virtual ClassifierHandle train(const std::vector<SentencePair>& train_pairs,
                                 const std::vector<SentencePair>& dev_pairs,
                                 const TrainingConfig& config) const = 0;
  virtual std::shared_ptr<const PairClassifier> load_params(
      const std::string& dir, const std::map<std::string, std::string>& meta) const = 0;
};

// Text encoder: fixed dimension, L2-normalized output, deterministic per text.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<float> encode(std::string_view text) const = 0;
};

// Span generator: emits one text sequence per tweet; spans separated by "; ",
// the literal sequence "none" when the tweet carries no ADE.
class SpanGenerator {
 public:
  virtual ~SpanGenerator() = default;
  virtual std::string id() const = 0;
  virtual std::string generate(std::string_view tweet_text) const = 0;
};

inline constexpr const char* kSpanSeparator = "; ";
inline constexpr const char* kNoSpanSentinel = "none";

// Parses a generated sequence into span strings: "none" means no spans;
// otherwise split on "; ", trim, drop empties, keep order and duplicates.
inline std::vector<std::string> parse_generated_spans(std::string_view sequence) {
  std::string_view trimmed = trim(sequence);
  if (trimmed == kNoSpanSentinel) return {};
  std::vector<std::string> out;
  for (const std::string& part : split(trimmed, std::string_view(kSpanSeparator))) {
    std::string_view t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Backend registry, keyed by string id. Registration replaces any previous
// entry under the same id.
// ---------------------------------------------------------------------------

class BackendRegistry {
 public:
  static BackendRegistry& instance() {
    static BackendRegistry registry;
    return registry;
  }

  void register_classifier(std::shared_ptr<const ClassifierBackend> backend) {
    std::lock_guard<std::mutex> lock(mutex_);
    classifiers_[backend->id()] = std::move(backend);
  }
  void register_encoder(std::shared_ptr<const TextEncoder> encoder) {
    std::lock_guard<std::mutex> lock(mutex_);
    encoders_[encoder->id()] = std::move(encoder);
  }
  void register_generator(std::shared_ptr<const SpanGenerator> generator) {
    std::lock_guard<std::mutex> lock(mutex_);
    generators_[generator->id()] = std::move(generator);
  }

  std::shared_ptr<const ClassifierBackend> classifier(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = classifiers_.find(id);
    if (it == classifiers_.end()) throw config_error("unregistered classifier backend: " + id);
    return it->second;
  }
  std::shared_ptr<const TextEncoder> encoder(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = encoders_.find(id);
    if (it == encoders_.end()) throw config_error("unregistered encoder: " + id);
    return it->second;
  }
  std::shared_ptr<const SpanGenerator> generator(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = generators_.find(id);
    if (it == generators_.end()) throw config_error("unregistered generator: " + id);
    return it->second;
  }

  bool has_encoder(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return encoders_.count(id) > 0;
  }

 private:
  BackendRegistry() = default;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const ClassifierBackend>> classifiers_;
  std::map<std::string, std::shared_ptr<const TextEncoder>> encoders_;
  std::map<std::string, std::shared_ptr<const SpanGenerator>> generators_;
};

// ---------------------------------------------------------------------------
// Top-level operations
// ---------------------------------------------------------------------------

inline ClassifierHandle train_classifier(const std::vector<SentencePair>& train_pairs,
                                         const std::vector<SentencePair>& dev_pairs,
                                         const TrainingConfig& config,
                                         const std::string& backend_id) {
  config.validate();
  if (train_pairs.empty()) throw invalid_input("training set is empty");
  for (const SentencePair& p : train_pairs)
    if (!p.label) throw invalid_input("unlabeled training pair " + p.tweet_id);
  for (const SentencePair& p : dev_pairs)
    if (!p.label) throw invalid_input("unlabeled dev pair " + p.tweet_id);
  auto backend = BackendRegistry::instance().classifier(backend_id);
  return backend->train(train_pairs, dev_pairs, config);
}

inline std::vector<PredictionRecord> predict(const ClassifierHandle& handle,
                                             const std::vector<SentencePair>& pairs,
                                             PredictReport* report = nullptr) {
  return handle.predict(pairs, report);
}

inline std::vector<std::string> extract_ade_spans(const std::string& generator_id,
                                                  std::string_view tweet_text) {
  auto generator = BackendRegistry::instance().generator(generator_id);
  return parse_generated_spans(generator->generate(tweet_text));
}

inline std::vector<std::vector<float>> encode_text(const std::string& encoder_id,
                                                   const std::vector<std::string>& texts) {
  auto encoder = BackendRegistry::instance().encoder(encoder_id);
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) {
    if (text.empty()) throw invalid_input("cannot encode an empty string");
    std::vector<float> v = encoder->encode(text);
    double norm = 0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (std::fabs(norm - 1.0) > 1e-6)
      throw error("encoder " + encoder_id + " produced a non-unit vector (norm " +
                  format_fixed(norm, 9) + ")");
    out.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Baselines: backend-free, depend only on training labels (and seed).
// ---------------------------------------------------------------------------

namespace detail {

inline std::array<std::size_t, 3> label_counts(const std::vector<SentimentLabel>& labels) {
  std::array<std::size_t, 3> counts{};
  for (SentimentLabel l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

}  // namespace detail

class MajorityClassifier : public PairClassifier {
 public:
  explicit MajorityClassifier(SentimentLabel label) : label_(label) {}

  SentimentLabel label() const { return label_; }

  std::vector<PredictionRecord> predict(const std::vector<SentencePair>& pairs,
                                        PredictReport* report) const override {
    if (report) *report = PredictReport{pairs.size(), 0};
    std::vector<PredictionRecord> out;
    out.reserve(pairs.size());
    for (const SentencePair& p : pairs) out.push_back(one_hot_prediction(p.tweet_id, label_));
    return out;
  }

  void save_params(const std::string& dir) const override;

 private:
  SentimentLabel label_;
};

class DistributionClassifier : public PairClassifier {
 public:
  DistributionClassifier(std::array<double, 3> distribution, std::uint64_t seed)
      : distribution_(distribution), seed_(seed) {}

  const std::array<double, 3>& distribution() const { return distribution_; }
  std::uint64_t seed() const { return seed_; }

  // A fresh generator per call keeps prediction a pure function of
  // (model, input): repeated calls on the same list agree exactly.
  std::vector<PredictionRecord> predict(const std::vector<SentencePair>& pairs,
                                        PredictReport* report) const override {
    if (report) *report = PredictReport{pairs.size(), 0};
    Rng rng(seed_);
    std::vector<PredictionRecord> out;
    out.reserve(pairs.size());
    for (const SentencePair& p : pairs) {
      double u = rng.unit();
      int picked = kNumLabels - 1;
      double cum = 0;
      for (int i = 0; i < kNumLabels; ++i) {
        cum += distribution_[static_cast<std::size_t>(i)];
        if (u < cum) {
          picked = i;
          break;
        }
      }
      out.push_back(one_hot_prediction(p.tweet_id, static_cast<SentimentLabel>(picked)));
    }
    return out;
  }

  void save_params(const std::string& dir) const override;

 private:
  std::array<double, 3> distribution_;
  std::uint64_t seed_;
};

// Always predicts the most frequent training label; ties fall to the
// earlier label in canonical order.
inline ClassifierHandle majority_class_baseline(const std::vector<SentimentLabel>& labels) {
  if (labels.empty()) throw invalid_input("majority baseline needs at least one label");
  std::array<std::size_t, 3> counts = detail::label_counts(labels);
  int best = 0;
  for (int i = 1; i < kNumLabels; ++i)
    if (counts[static_cast<std::size_t>(i)] > counts[static_cast<std::size_t>(best)]) best = i;
  auto model = std::make_shared<MajorityClassifier>(static_cast<SentimentLabel>(best));
  return ClassifierHandle(model, ClassifierMetadata{"majority", "none"});
}

// Predicts labels sampled i.i.d. from the empirical training distribution.
inline ClassifierHandle distribution_baseline(const std::vector<SentimentLabel>& labels,
                                              std::uint64_t seed) {
  if (labels.empty()) throw invalid_input("distribution baseline needs at least one label");
  std::array<std::size_t, 3> counts = detail::label_counts(labels);
  std::array<double, 3> dist{};
  for (int i = 0; i < kNumLabels; ++i)
    dist[static_cast<std::size_t>(i)] =
        static_cast<double>(counts[static_cast<std::size_t>(i)]) /
        static_cast<double>(labels.size());
  auto model = std::make_shared<DistributionClassifier>(dist, seed);
  return ClassifierHandle(model, ClassifierMetadata{"distribution", "none"});
}

inline void MajorityClassifier::save_params(const std::string& dir) const {
  detail::TsvWriter w(dir + "/params.tsv");
  w.row({"kind", "majority"});
  w.row({"label", to_string(label_)});
  w.close();
}

inline void DistributionClassifier::save_params(const std::string& dir) const {
  detail::TsvWriter w(dir + "/params.tsv");
  w.row({"kind", "distribution"});
  for (int i = 0; i < kNumLabels; ++i)
    w.row({std::string("p_") + to_string(static_cast<SentimentLabel>(i)),
           format_fixed(distribution_[static_cast<std::size_t>(i)], 17)});
  w.row({"seed", std::to_string(seed_)});
  w.close();
}

}  // namespace medtweet
