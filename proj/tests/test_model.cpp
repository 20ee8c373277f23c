#include <catch2/catch.hpp>

#include <cmath>

#include "medtweet/backends.hpp"
#include "medtweet/model.hpp"
#include "support.hpp"

using namespace medtweet;
using testsupport::TempDir;

namespace {

std::vector<SentencePair> toy_pairs() {
  std::vector<SentencePair> pairs;
  auto add = [&](SentimentLabel label, const std::string& stem, int k) {
    for (int i = 0; i < k; ++i) {
      SentencePair p;
      p.tweet_id = "t" + std::to_string(pairs.size());
      p.premise = stem + " case " + std::to_string(pairs.size());
      p.hypothesis = "This is on therapy";
      p.label = label;
      pairs.push_back(std::move(p));
    }
  };
  add(SentimentLabel::positive, "the new therapy felt wonderful and brought real relief", 11);
  add(SentimentLabel::negative, "this drug made everything awful and strictly worse", 11);
  add(SentimentLabel::neutral, "started the standard course yesterday morning", 10);
  return pairs;
}

TrainingConfig toy_config() {
  TrainingConfig config;
  config.epochs = 10;
  config.learning_rate = 5e-6 * 1e4;  // base rate scaled for the miniature backend
  config.seed = 7;
  return config;
}

double training_accuracy(const ClassifierHandle& handle, const std::vector<SentencePair>& pairs) {
  std::vector<PredictionRecord> preds = handle.predict(pairs);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (preds[i].label == *pairs[i].label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

}  // namespace

TEST_CASE("training config validation") {
  register_builtin_backends();
  TrainingConfig config;
  config.epochs = 0;
  CHECK_THROWS_AS(config.validate(), config_error);
  config = TrainingConfig{};
  config.learning_rate = 0;
  CHECK_THROWS_AS(config.validate(), config_error);
  config = TrainingConfig{};
  config.weight_decay_rate = 1.0;
  CHECK_THROWS_AS(config.validate(), config_error);
  config = TrainingConfig{};
  CHECK_NOTHROW(config.validate());
  CHECK(config.epochs == 10);
  CHECK(config.learning_rate == 5e-6);
  CHECK(config.weight_decay_rate == 0.9);
  CHECK(config.batch_size == 16);
  CHECK(config.max_sequence_length == 128);
}

TEST_CASE("train_classifier validates inputs and backend ids") {
  register_builtin_backends();
  auto pairs = toy_pairs();
  CHECK_THROWS_AS(train_classifier({}, {}, toy_config(), "hash-linear"), invalid_input);
  CHECK_THROWS_AS(train_classifier(pairs, {}, toy_config(), "no-such-backend"), config_error);
  TrainingConfig bad = toy_config();
  bad.epochs = 0;
  CHECK_THROWS_AS(train_classifier(pairs, {}, bad, "hash-linear"), config_error);
  auto unlabeled = pairs;
  unlabeled[0].label.reset();
  CHECK_THROWS_AS(train_classifier(unlabeled, {}, toy_config(), "hash-linear"), invalid_input);
}

TEST_CASE("hash-linear overfits the 32-pair toy set in 10 epochs") {
  register_builtin_backends();
  auto pairs = toy_pairs();
  REQUIRE(pairs.size() == 32);
  ClassifierHandle handle = train_classifier(pairs, pairs, toy_config(), "hash-linear");

  const TrainingLog& log = handle.training_log();
  REQUIRE(log.size() == 10);
  CHECK(log.front().epoch == 1);
  CHECK(log.back().epoch == 10);
  CHECK(log.back().train_loss < log.front().train_loss);
  CHECK_FALSE(std::isnan(log.back().dev_micro_f1));

  CHECK(training_accuracy(handle, pairs) >= 0.95);
}

TEST_CASE("seeded training is bit-reproducible") {
  register_builtin_backends();
  auto pairs = toy_pairs();
  ClassifierHandle a = train_classifier(pairs, {}, toy_config(), "hash-linear");
  ClassifierHandle b = train_classifier(pairs, {}, toy_config(), "hash-linear");
  std::vector<PredictionRecord> pa = a.predict(pairs);
  std::vector<PredictionRecord> pb = b.predict(pairs);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].label == pb[i].label);
    CHECK(pa[i].probabilities == pb[i].probabilities);
  }
}

TEST_CASE("predict keeps order, probability simplex, and argmax consistency") {
  register_builtin_backends();
  auto pairs = toy_pairs();
  ClassifierHandle handle = train_classifier(pairs, {}, toy_config(), "hash-linear");

  CHECK(handle.predict({}).empty());

  std::vector<PredictionRecord> preds = handle.predict(pairs);
  REQUIRE(preds.size() == pairs.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CHECK(preds[i].tweet_id == pairs[i].tweet_id);
    double sum = preds[i].probabilities[0] + preds[i].probabilities[1] + preds[i].probabilities[2];
    CHECK(std::fabs(sum - 1.0) <= 1e-6);
    CHECK(preds[i].label == argmax_label(preds[i].probabilities));
  }

  // Repeated calls agree exactly.
  std::vector<PredictionRecord> again = handle.predict(pairs);
  for (std::size_t i = 0; i < preds.size(); ++i)
    CHECK(preds[i].probabilities == again[i].probabilities);
}

TEST_CASE("prediction truncates over-budget pairs and counts them") {
  register_builtin_backends();
  auto pairs = toy_pairs();
  TrainingConfig config = toy_config();
  config.max_sequence_length = 3;
  ClassifierHandle handle = train_classifier(pairs, {}, config, "hash-linear");
  PredictReport report;
  handle.predict(pairs, &report);
  CHECK(report.total == pairs.size());
  CHECK(report.truncated == pairs.size());  // every premise exceeds 3 tokens

  config.max_sequence_length = 128;
  ClassifierHandle roomy = train_classifier(pairs, {}, config, "hash-linear");
  PredictReport wide;
  roomy.predict(pairs, &wide);
  CHECK(wide.truncated == 0);
}

TEST_CASE("model save/load roundtrip preserves predictions exactly") {
  register_builtin_backends();
  TempDir tmp("model_rt");
  auto pairs = toy_pairs();
  ClassifierHandle handle = train_classifier(pairs, pairs, toy_config(), "hash-linear");
  save_model(handle, tmp.file("model"));
  ClassifierHandle loaded = load_model(tmp.file("model"));
  CHECK(loaded.metadata().backend == "hash-linear");
  CHECK(loaded.training_log().size() == 10);

  std::vector<PredictionRecord> a = handle.predict(pairs);
  std::vector<PredictionRecord> b = loaded.predict(pairs);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].probabilities == b[i].probabilities);
  }
}

TEST_CASE("parse_generated_spans follows the separator/sentinel rules") {
  CHECK(parse_generated_spans("nausea; dizziness") ==
        std::vector<std::string>{"nausea", "dizziness"});
  CHECK(parse_generated_spans("none").empty());
  CHECK(parse_generated_spans(" none ").empty());
  CHECK(parse_generated_spans("hives") == std::vector<std::string>{"hives"});
  CHECK(parse_generated_spans("a; ; b") == std::vector<std::string>{"a", "b"});
  CHECK(parse_generated_spans("a;b") == std::vector<std::string>{"a;b"});
  CHECK(parse_generated_spans("x; x") == std::vector<std::string>{"x", "x"});
  CHECK(parse_generated_spans("").empty());
}

TEST_CASE("extract_ade_spans parses the registered generator's output") {
  BackendRegistry::instance().register_generator(std::make_shared<testsupport::PlantedGenerator>(
      "planted-gen", std::map<std::string, std::string>{
                         {"tweet one", "nausea; dizziness"},
                         {"tweet two", "none"},
                     }));
  CHECK(extract_ade_spans("planted-gen", "tweet one") ==
        std::vector<std::string>{"nausea", "dizziness"});
  CHECK(extract_ade_spans("planted-gen", "tweet two").empty());
  CHECK_THROWS_AS(extract_ade_spans("missing-gen", "x"), config_error);
}

TEST_CASE("gazetteer generator finds known phrases at word boundaries") {
  GazetteerGenerator gaz({"nausea", "bad headache", "hives"});
  CHECK(gaz.generate("Nausea again, plus a bad headache") == "Nausea; bad headache");
  CHECK(gaz.generate("nothing to report") == "none");
  CHECK(gaz.generate("hivest is not hives but hives is") == "hives; hives");
  CHECK_THROWS_AS(GazetteerGenerator({"none"}), invalid_input);
  CHECK_THROWS_AS(GazetteerGenerator({"a; b"}), invalid_input);
  CHECK_THROWS_AS(GazetteerGenerator(std::vector<std::string>{}), invalid_input);
}

TEST_CASE("majority baseline follows counts and tie rules") {
  register_builtin_backends();
  {
    std::vector<SentimentLabel> labels;
    for (int i = 0; i < 20; ++i) labels.push_back(SentimentLabel::positive);
    for (int i = 0; i < 14; ++i) labels.push_back(SentimentLabel::negative);
    for (int i = 0; i < 66; ++i) labels.push_back(SentimentLabel::neutral);
    ClassifierHandle handle = majority_class_baseline(labels);
    auto preds = handle.predict({SentencePair{"t1", ".", ".", std::nullopt}});
    REQUIRE(preds.size() == 1);
    CHECK(preds[0].label == SentimentLabel::neutral);
    CHECK(preds[0].probabilities[2] == 1.0);
  }
  {
    std::vector<SentimentLabel> labels(5, SentimentLabel::positive);
    labels.insert(labels.end(), 5, SentimentLabel::negative);
    ClassifierHandle handle = majority_class_baseline(labels);
    auto preds = handle.predict({SentencePair{"t1", ".", ".", std::nullopt}});
    CHECK(preds[0].label == SentimentLabel::positive);  // tie falls to label order
  }
  {
    ClassifierHandle handle = majority_class_baseline({SentimentLabel::negative});
    auto preds = handle.predict({SentencePair{"t1", ".", ".", std::nullopt}});
    CHECK(preds[0].label == SentimentLabel::negative);
  }
  CHECK_THROWS_AS(majority_class_baseline({}), invalid_input);
}

TEST_CASE("distribution baseline is seeded and degenerate-safe") {
  std::vector<SentencePair> probes;
  for (int i = 0; i < 200; ++i)
    probes.push_back(SentencePair{"t" + std::to_string(i), ".", ".", std::nullopt});

  std::vector<SentimentLabel> labels;
  for (int i = 0; i < 20; ++i) labels.push_back(SentimentLabel::positive);
  for (int i = 0; i < 14; ++i) labels.push_back(SentimentLabel::negative);
  for (int i = 0; i < 66; ++i) labels.push_back(SentimentLabel::neutral);

  ClassifierHandle handle = distribution_baseline(labels, 99);
  auto a = handle.predict(probes);
  auto b = handle.predict(probes);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].label == b[i].label);

  // All three classes appear over 200 draws from a 0.2/0.14/0.66 distribution.
  std::array<std::size_t, 3> seen{};
  for (const auto& p : a) ++seen[static_cast<std::size_t>(p.label)];
  CHECK(seen[0] > 0);
  CHECK(seen[1] > 0);
  CHECK(seen[2] > 0);

  ClassifierHandle degenerate =
      distribution_baseline(std::vector<SentimentLabel>(100, SentimentLabel::neutral), 1);
  for (const auto& p : degenerate.predict(probes)) CHECK(p.label == SentimentLabel::neutral);
}

TEST_CASE("baseline save/load roundtrip") {
  register_builtin_backends();
  TempDir tmp("baseline_rt");
  std::vector<SentimentLabel> labels = {SentimentLabel::neutral, SentimentLabel::neutral,
                                        SentimentLabel::positive};
  ClassifierHandle majority = majority_class_baseline(labels);
  save_model(majority, tmp.file("maj"));
  ClassifierHandle majority2 = load_model(tmp.file("maj"));
  std::vector<SentencePair> probes = {{"t1", ".", ".", std::nullopt}};
  CHECK(majority2.predict(probes)[0].label == SentimentLabel::neutral);

  ClassifierHandle dist = distribution_baseline(labels, 31);
  save_model(dist, tmp.file("dist"));
  ClassifierHandle dist2 = load_model(tmp.file("dist"));
  std::vector<SentencePair> many;
  for (int i = 0; i < 50; ++i) many.push_back({"t" + std::to_string(i), ".", ".", std::nullopt});
  auto p1 = dist.predict(many);
  auto p2 = dist2.predict(many);
  for (std::size_t i = 0; i < many.size(); ++i) CHECK(p1[i].label == p2[i].label);
}

TEST_CASE("encode_text returns unit vectors deterministically") {
  register_builtin_backends();
  auto vectors = encode_text("hash-ngram", {"headache", "headaches", "fatigue"});
  REQUIRE(vectors.size() == 3);
  for (const auto& v : vectors) {
    double norm = 0;
    for (float x : v) norm += static_cast<double>(x) * x;
    CHECK(std::fabs(std::sqrt(norm) - 1.0) <= 1e-6);
  }
  auto again = encode_text("hash-ngram", {"headache"});
  CHECK(vectors[0] == again[0]);

  // Related surface forms score higher than unrelated ones.
  double near = cosine(vectors[0], vectors[1]);
  double far = cosine(vectors[0], vectors[2]);
  CHECK(near > far);

  CHECK_THROWS_AS(encode_text("hash-ngram", {""}), invalid_input);
  CHECK_THROWS_AS(encode_text("no-such-encoder", {"x"}), config_error);
}

TEST_CASE("make_prediction enforces the probability contract") {
  CHECK_THROWS_AS(make_prediction("t", {0.5, 0.2, 0.2}), invalid_input);
  CHECK_THROWS_AS(make_prediction("t", {1.5, -0.5, 0.0}), invalid_input);
  PredictionRecord tie = make_prediction("t", {0.4, 0.4, 0.2});
  CHECK(tie.label == SentimentLabel::positive);  // first maximum wins
  PredictionRecord rec = make_prediction("t", {0.2, 0.3, 0.5});
  CHECK(rec.label == SentimentLabel::neutral);
}

TEST_CASE("training log writes and reloads") {
  TempDir tmp("tlog");
  TrainingLog log = {{1, 1.09, std::nan("")}, {2, 0.85, 0.75}};
  write_training_log(log, tmp.file("log.tsv"));
  TrainingLog loaded = load_training_log(tmp.file("log.tsv"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].epoch == 1);
  CHECK(std::isnan(loaded[0].dev_micro_f1));
  CHECK(loaded[1].dev_micro_f1 == Approx(0.75));
}
