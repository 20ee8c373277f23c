#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "medtweet/backends.hpp"
#include "medtweet/data_io.hpp"
#include "medtweet/errors.hpp"
#include "medtweet/linker.hpp"
#include "medtweet/manifest.hpp"
#include "medtweet/metrics.hpp"
#include "medtweet/model.hpp"
#include "medtweet/nli.hpp"
#include "medtweet/preprocess.hpp"
#include "medtweet/sampling.hpp"
#include "medtweet/version.hpp"

namespace medtweet::cli {

namespace detail {

using medtweet::detail::read_tsv_lines;

// Flat key=value config file; command-line flags override file values.
// Implemented by injecting `--key=value` tokens ahead of the user's flags
// with take-last option semantics.
inline void expand_config_files(std::vector<std::string>& args) {
  std::size_t insert_at = 1;
  for (std::size_t i = 1; i < args.size();) {
    std::string path;
    std::size_t remove = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      remove = 2;
    } else if (starts_with(args[i], "--config=")) {
      path = args[i].substr(std::string("--config=").size());
      remove = 1;
    }
    if (remove == 0) {
      ++i;
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + remove));

    std::vector<std::string> tokens;
    std::vector<std::string> lines = read_tsv_lines(path);
    for (std::size_t line_no = 1; line_no <= lines.size(); ++line_no) {
      std::string_view line = trim(lines[line_no - 1]);
      if (line.empty() || line[0] == '#') continue;
      std::size_t eq = line.find('=');
      if (eq == std::string_view::npos)
        throw format_error(path, line_no, "config lines must look like key=value");
      std::string key(trim(line.substr(0, eq)));
      std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw format_error(path, line_no, "config line with empty key");
      tokens.push_back("--" + key + "=" + value);
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(insert_at, i)), tokens.begin(),
                tokens.end());
    insert_at += tokens.size();
    i += tokens.size();
  }
}

inline void ensure_parent_dir(const std::string& path) {
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::exists(parent))
    throw io_error("output directory does not exist: " + parent.string());
}

// Tweets for inference can arrive as any sentiment-corpus header variant or
// as an ADE corpus; both reduce to (tweet_id, text).
inline std::vector<TweetRecord> load_tweets_flexible(const std::string& path) {
  std::vector<std::string> lines = read_tsv_lines(path);
  if (lines.empty()) throw format_error(path, 1, "missing header row");
  if (lines[0] == kAdeHeader) {
    std::vector<TweetRecord> tweets;
    for (AdeTweet& t : load_ade_corpus(path)) tweets.push_back(std::move(t.tweet));
    return tweets;
  }
  return load_sentiment_corpus(path);
}

// Training labels can come from a pairs file, a labeled sentiment corpus, or
// a prediction-format (tweet_id\tlabel) file.
inline std::vector<SentimentLabel> load_labels_flexible(const std::string& path) {
  std::vector<std::string> lines = read_tsv_lines(path);
  std::vector<SentimentLabel> labels;
  if (!lines.empty() && lines[0] == kPairsHeader) {
    for (const SentencePair& p : load_pairs(path)) {
      if (!p.label) throw invalid_input(path + ": unlabeled pair " + p.tweet_id);
      labels.push_back(*p.label);
    }
    return labels;
  }
  if (!lines.empty() &&
      (lines[0] == kSentimentHeaderFull || lines[0] == kSentimentHeaderNoLabel ||
       lines[0] == kSentimentHeaderBare)) {
    for (const TweetRecord& r : load_sentiment_corpus(path)) {
      if (!r.label) throw invalid_input(path + ": unlabeled tweet " + r.tweet_id);
      labels.push_back(*r.label);
    }
    return labels;
  }
  for (const IdLabel& r : load_sentiment_predictions(path)) labels.push_back(r.label);
  return labels;
}

// Tweet ids to predict on, from a pairs file, corpus, or prediction rows.
inline std::vector<std::string> load_ids_flexible(const std::string& path) {
  std::vector<std::string> lines = read_tsv_lines(path);
  std::vector<std::string> ids;
  if (!lines.empty() && lines[0] == kPairsHeader) {
    for (const SentencePair& p : load_pairs(path)) ids.push_back(p.tweet_id);
    return ids;
  }
  if (!lines.empty() &&
      (lines[0] == kSentimentHeaderFull || lines[0] == kSentimentHeaderNoLabel ||
       lines[0] == kSentimentHeaderBare)) {
    for (const TweetRecord& r : load_sentiment_corpus(path)) ids.push_back(r.tweet_id);
    return ids;
  }
  for (const IdLabel& r : load_sentiment_predictions(path)) ids.push_back(r.tweet_id);
  return ids;
}

// Gold labels for eval-sentiment: a fully labeled corpus or (id, label) rows.
inline std::vector<IdLabel> load_gold_labels(const std::string& path) {
  std::vector<std::string> lines = read_tsv_lines(path);
  if (!lines.empty() && lines[0] == kSentimentHeaderFull) {
    std::vector<IdLabel> gold;
    for (const TweetRecord& r : load_sentiment_corpus(path)) {
      if (!r.label) throw eval_error(path + ": gold tweet " + r.tweet_id + " has no label");
      gold.push_back(IdLabel{r.tweet_id, *r.label});
    }
    return gold;
  }
  if (!lines.empty() && (lines[0] == kSentimentHeaderNoLabel || lines[0] == kSentimentHeaderBare))
    throw eval_error(path + ": gold corpus has no label column");
  return load_sentiment_predictions(path);
}

inline std::set<std::string> load_concept_set(const std::string& path) {
  std::set<std::string> concepts;
  for (const std::string& line : read_tsv_lines(path)) {
    std::string_view t = trim(line);
    if (!t.empty()) concepts.insert(std::string(t));
  }
  return concepts;
}

inline EmoticonMap resolve_emoticon_map(const std::string& override_path) {
  return override_path.empty() ? default_emoticon_map() : load_emoticon_map(override_path);
}

// Builds and registers the generator named by --generator. The builtin
// "gazetteer" is assembled from --phrases and/or --fit-from; any other id
// must already be registered (e.g. by an embedding caller).
inline void prepare_generator(const std::string& generator_id, const std::string& phrases_path,
                              const std::string& fit_from_path, RunManifest& manifest) {
  if (generator_id == "gazetteer" && phrases_path.empty() && fit_from_path.empty())
    throw config_error("the gazetteer generator needs --phrases and/or --fit-from");
  if (!phrases_path.empty() || !fit_from_path.empty()) {
    std::vector<std::string> phrases;
    if (!phrases_path.empty()) {
      for (const std::string& line : read_tsv_lines(phrases_path)) {
        std::string_view t = trim(line);
        if (!t.empty() && t[0] != '#') phrases.emplace_back(t);
      }
      manifest.add_input(phrases_path);
    }
    if (!fit_from_path.empty()) {
      for (const AdeTweet& t : load_ade_corpus(fit_from_path))
        for (const AdeAnnotation& a : t.annotations) phrases.push_back(a.span_text);
      manifest.add_input(fit_from_path);
    }
    auto generator = std::make_shared<GazetteerGenerator>(std::move(phrases), generator_id);
    BackendRegistry::instance().register_generator(generator);
  }
}

inline void report_pipeline(const PipelineReport& report) {
  std::cerr << "spans generated: " << report.spans_generated
            << ", unanchored: " << report.unanchored << ", unlinked: " << report.unlinked
            << ", emitted: " << report.emitted << "\n";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommand options
// ---------------------------------------------------------------------------

namespace detail {

struct PreprocessOpts {
  std::string in, out, emoticon_map;
};

struct PairOpts {
  std::string in, out, emoticon_map;
  std::string hypothesis_template = kDefaultHypothesisTemplate;
};

struct ResampleOpts {
  std::string in, out;
  std::string ratio = "1:1:2";
  std::uint64_t seed = 0;
  std::string only_downsample;
};

struct SplitOpts {
  std::string in, train_out, dev_out;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = false;
};

struct TrainOpts {
  std::string train, dev, model_dir;
  std::string backend = "hash-linear";
  std::string checkpoint = "builtin";
  std::string cache_dir;
  int epochs = 10;
  double learning_rate = 5e-6;
  double weight_decay = 0.9;
  double lr_decay = 1.0;
  int batch_size = 16;
  int max_seq_len = 128;
  std::uint64_t seed = 0;
};

struct PredictOpts {
  std::string model_dir, in, out;
};

struct EvalSentimentOpts {
  std::string gold, pred, out;
};

struct BaselineOpts {
  std::string kind, train, in, out;
  std::uint64_t seed = 0;
};

struct ExtractOpts {
  std::string in, out;
  std::string generator = "gazetteer";
  std::string phrases, fit_from;
};

struct BuildIndexOpts {
  std::string lexicon, index_dir;
  std::string encoder = "hash-ngram";
};

struct LinkOpts {
  std::string tweets, index_dir, out, spans;
  std::string generator = "gazetteer";
  std::string phrases, fit_from;
  double threshold = kDefaultLinkThreshold;
};

struct EvalAdeOpts {
  std::string gold, pred, out, train_concepts;
  std::string scope = "overall";
};

// ---------------------------------------------------------------------------
// Subcommand handlers
// ---------------------------------------------------------------------------

inline int cmd_preprocess(const PreprocessOpts& o) {
  EmoticonMap map = resolve_emoticon_map(o.emoticon_map);
  std::vector<TweetRecord> records = load_sentiment_corpus(o.in);
  for (TweetRecord& r : records) r.text = preprocess_tweet(r.text, map);
  ensure_parent_dir(o.out);
  write_sentiment_corpus(records, o.out);

  RunManifest m("preprocess");
  m.set("in", o.in);
  m.set("out", o.out);
  m.set("emoticon-map", o.emoticon_map.empty() ? "(builtin)" : o.emoticon_map);
  m.add_input(o.in);
  if (!o.emoticon_map.empty()) m.add_input(o.emoticon_map);
  m.write(o.out + ".manifest");
  return 0;
}

inline int cmd_pair(const PairOpts& o) {
  EmoticonMap map = resolve_emoticon_map(o.emoticon_map);
  HypothesisTemplate tmpl(o.hypothesis_template);
  std::vector<TweetRecord> records = load_sentiment_corpus(o.in);
  std::vector<SentencePair> pairs;
  pairs.reserve(records.size());
  for (const TweetRecord& r : records) pairs.push_back(build_pair(r, tmpl, map));
  ensure_parent_dir(o.out);
  write_pairs(pairs, o.out);

  RunManifest m("pair");
  m.set("in", o.in);
  m.set("out", o.out);
  m.set("hypothesis-template", o.hypothesis_template);
  m.set("emoticon-map", o.emoticon_map.empty() ? "(builtin)" : o.emoticon_map);
  m.add_input(o.in);
  if (!o.emoticon_map.empty()) m.add_input(o.emoticon_map);
  m.write(o.out + ".manifest");
  return 0;
}

inline int cmd_resample(const ResampleOpts& o) {
  ClassRatio ratio = ClassRatio::parse(o.ratio);
  UndersampleMode mode = UndersampleMode::exact_ratio;
  if (!o.only_downsample.empty()) {
    if (o.only_downsample != "neutral")
      throw config_error("--only-downsample supports only \"neutral\"");
    mode = UndersampleMode::neutral_only;
  }
  std::vector<SentencePair> pairs = load_pairs(o.in);
  std::vector<SentencePair> kept = undersample(pairs, ratio, o.seed, mode);
  if (kept.empty())
    std::cerr << "warning: ratio " << o.ratio << " cannot be met by any nonempty subset\n";
  ensure_parent_dir(o.out);
  write_pairs(kept, o.out);
  std::cerr << "kept " << kept.size() << " of " << pairs.size() << " pairs\n";

  RunManifest m("resample");
  m.set("in", o.in);
  m.set("out", o.out);
  m.set("ratio", ratio.to_string());
  m.set("seed", o.seed);
  m.set("only-downsample", o.only_downsample.empty() ? "(off)" : o.only_downsample);
  m.add_input(o.in);
  m.write(o.out + ".manifest");
  return 0;
}

inline int cmd_split(const SplitOpts& o) {
  std::vector<SentencePair> pairs = load_pairs(o.in);
  SplitConfig config{o.train_fraction, o.seed, o.stratified};
  SplitResult<SentencePair> result = split_pairs(pairs, config);
  ensure_parent_dir(o.train_out);
  ensure_parent_dir(o.dev_out);
  write_pairs(result.train, o.train_out);
  write_pairs(result.dev, o.dev_out);
  std::cerr << "train: " << result.train.size() << ", dev: " << result.dev.size() << "\n";

  RunManifest m("split");
  m.set("in", o.in);
  m.set("train-out", o.train_out);
  m.set("dev-out", o.dev_out);
  m.set("train-fraction", o.train_fraction);
  m.set("seed", o.seed);
  m.set("stratified", o.stratified);
  m.add_input(o.in);
  m.write(o.train_out + ".manifest");
  return 0;
}

inline int cmd_train_sentiment(const TrainOpts& o) {
  register_builtin_backends();
  std::vector<SentencePair> train = load_pairs(o.train);
  std::vector<SentencePair> dev;
  if (!o.dev.empty()) dev = load_pairs(o.dev);

  TrainingConfig config;
  config.epochs = o.epochs;
  config.learning_rate = o.learning_rate;
  config.weight_decay_rate = o.weight_decay;
  config.lr_schedule_decay = o.lr_decay;
  config.batch_size = o.batch_size;
  config.max_sequence_length = o.max_seq_len;
  config.seed = o.seed;
  config.checkpoint = o.checkpoint;
  config.cache_dir = o.cache_dir;

  ClassifierHandle handle = train_classifier(train, dev, config, o.backend);
  save_model(handle, o.model_dir);
  if (!handle.training_log().empty()) {
    const EpochStats& last = handle.training_log().back();
    std::cerr << "epoch " << last.epoch << ": train_loss=" << format_fixed(last.train_loss, 6)
              << " dev_micro_f1="
              << (std::isnan(last.dev_micro_f1) ? "nan" : format_fixed(last.dev_micro_f1, 6))
              << "\n";
  }

  RunManifest m("train-sentiment");
  m.set("train", o.train);
  m.set("dev", o.dev.empty() ? "(none)" : o.dev);
  m.set("model-dir", o.model_dir);
  m.set("backend", o.backend);
  m.set("checkpoint", o.checkpoint);
  m.set("cache-dir", o.cache_dir.empty() ? "(none)" : o.cache_dir);
  m.set("epochs", o.epochs);
  m.set("learning-rate", o.learning_rate, 12);
  m.set("weight-decay", o.weight_decay, 12);
  m.set("lr-decay", o.lr_decay, 12);
  m.set("batch-size", o.batch_size);
  m.set("max-seq-len", o.max_seq_len);
  m.set("seed", o.seed);
  m.add_input(o.train);
  if (!o.dev.empty()) m.add_input(o.dev);
  m.write(o.model_dir + "/manifest.tsv");
  return 0;
}

inline int cmd_predict_sentiment(const PredictOpts& o) {
  register_builtin_backends();
  ClassifierHandle handle = load_model(o.model_dir);
  std::vector<SentencePair> pairs = load_pairs(o.in);
  PredictReport report;
  std::vector<PredictionRecord> preds = predict(handle, pairs, &report);
  std::vector<IdLabel> rows;
  rows.reserve(preds.size());
  for (const PredictionRecord& p : preds) rows.push_back(IdLabel{p.tweet_id, p.label});
  ensure_parent_dir(o.out);
  write_sentiment_predictions(rows, o.out);
  if (report.truncated > 0)
    std::cerr << "truncated " << report.truncated << " of " << report.total << " pairs\n";

  RunManifest m("predict-sentiment");
  m.set("model-dir", o.model_dir);
  m.set("in", o.in);
  m.set("out", o.out);
  m.set("truncated", static_cast<std::uint64_t>(report.truncated));
  m.add_input(o.in);
  m.write(o.out + ".manifest");
  return 0;
}

inline int cmd_eval_sentiment(const EvalSentimentOpts& o) {
  std::vector<IdLabel> gold = load_gold_labels(o.gold);
  std::vector<PredictionRecord> preds;
  for (const IdLabel& r : load_sentiment_predictions(o.pred))
    preds.push_back(one_hot_prediction(r.tweet_id, r.label));
  ClassificationReport report = evaluate_sentiment(gold, preds);
  std::cout << render_report(report);

  if (!o.out.empty()) {
    ensure_parent_dir(o.out);
    write_kv_records(report_kv(report), o.out);
    RunManifest m("eval-sentiment");
    m.set("gold", o.gold);
    m.set("pred", o.pred);
    m.set("out", o.out);
    m.add_input(o.gold);
    m.add_input(o.pred);
    m.write(o.out + ".manifest");
  }
  return 0;
}

inline int cmd_baseline(const BaselineOpts& o) {
  register_builtin_backends();
  std::vector<SentimentLabel> labels = load_labels_flexible(o.train);
  ClassifierHandle handle;
  if (o.kind == "majority") {
    handle = majority_class_baseline(labels);
  } else if (o.kind == "distribution") {
    handle = distribution_baseline(labels, o.seed);
  } else {
    throw config_error("--kind must be majority or distribution");
  }

  std::vector<SentencePair> probes;
  for (std::string& id : load_ids_flexible(o.in)) {
    SentencePair p;
    p.tweet_id = std::move(id);
    p.premise = ".";
    p.hypothesis = ".";
    probes.push_back(std::move(p));
  }
  std::vector<PredictionRecord> preds = handle.predict(probes);
  std::vector<IdLabel> rows;
  rows.reserve(preds.size());
  for (const PredictionRecord& p : preds) rows.push_back(IdLabel{p.tweet_id, p.label});
  ensure_parent_dir(o.out);
  write_sentiment_predictions(rows, o.out);

  RunManifest m("baseline");
  m.set("kind", o.kind);
  m.set("train", o.train);
  m.set("in", o.in);
  m.set("out", o.out);
  m.set("seed", o.seed);
  m.add_input(o.train);
  m.add_input(o.in);
  m.write(o.out + ".manifest");
  return 0;
}

inline int cmd_extract_ade(const ExtractOpts& o) {
  register_builtin_backends();
  RunManifest m("extract-ade");
  detail::prepare_generator(o.generator, o.phrases, o.fit_from, m);
  std::vector<TweetRecord> tweets = load_tweets_flexible(o.in);
  std::vector<ExtractedSpan> rows;
  for (const TweetRecord& t : tweets)
    for (const std::string& span : extract_ade_spans(o.generator, t.text))
      rows.push_back(ExtractedSpan{t.tweet_id, span});
  ensure_parent_dir(o.out);
  write_extracted_spans(rows, o.out);
  std::cerr << "extracted " << rows.size() << " spans from " << tweets.size() << " tweets\n";

  m.set("in", o.in);
  m.set("out", o.out);
  m.set("generator", o.generator);
  m.set("phrases", o.phrases.empty() ? "(none)" : o.phrases);
  m.set("fit-from", o.fit_from.empty() ? "(none)" : o.fit_from);
  m.add_input(o.in);
  m.write(o.out + ".manifest");
  return 0;
}

inline int cmd_build_index(const BuildIndexOpts& o) {
  register_builtin_backends();
  std::vector<LexiconEntry> lexicon = load_lexicon(o.lexicon);
  EmbeddingIndex index = EmbeddingIndex::build(lexicon, o.encoder);
  index.save(o.index_dir);
  std::cerr << "indexed " << index.size() << " terms at dimension " << index.dimension() << "\n";

  RunManifest m("build-index");
  m.set("lexicon", o.lexicon);
  m.set("encoder", o.encoder);
  m.set("index-dir", o.index_dir);
  m.add_input(o.lexicon);
  m.write(o.index_dir + "/manifest.tsv");
  return 0;
}

inline int cmd_link(const LinkOpts& o) {
  register_builtin_backends();
  RunManifest m("link");
  EmbeddingIndex index = EmbeddingIndex::load(o.index_dir);
  std::vector<TweetRecord> tweets = load_tweets_flexible(o.tweets);

  PipelineReport report;
  std::vector<AdeAnnotation> annotations;
  if (!o.spans.empty()) {
    std::vector<ExtractedSpan> spans = load_extracted_spans(o.spans);
    annotations = link_extracted(tweets, spans, index, o.threshold, &report);
    m.add_input(o.spans);
  } else {
    detail::prepare_generator(o.generator, o.phrases, o.fit_from, m);
    annotations = normalize_pipeline(tweets, o.generator, index, o.threshold, &report);
  }
  ensure_parent_dir(o.out);
  write_ade_predictions(annotations, o.out);
  report_pipeline(report);

  m.set("tweets", o.tweets);
  m.set("index-dir", o.index_dir);
  m.set("threshold", o.threshold, 6);
  m.set("out", o.out);
  m.set("spans", o.spans.empty() ? "(generator)" : o.spans);
  if (o.spans.empty()) m.set("generator", o.generator);
  m.add_input(o.tweets);
  m.write(o.out + ".manifest");
  return 0;
}

inline int cmd_eval_ade(const EvalAdeOpts& o) {
  std::vector<AdeTweet> gold_corpus = load_ade_corpus(o.gold);
  std::unordered_map<std::string, const std::string*> text_of;
  std::vector<AdeAnnotation> gold;
  for (const AdeTweet& t : gold_corpus) {
    text_of.emplace(t.tweet.tweet_id, &t.tweet.text);
    for (const AdeAnnotation& a : t.annotations) gold.push_back(a);
  }

  std::vector<AdeAnnotation> preds = load_ade_predictions(o.pred);
  for (const AdeAnnotation& p : preds) {
    auto it = text_of.find(p.tweet_id);
    if (it == text_of.end())
      throw eval_error("prediction names a tweet outside the gold corpus: " + p.tweet_id);
    validate_annotation(p, *it->second);
  }

  if (o.scope != "overall" && o.scope != "unseen" && o.scope != "both")
    throw config_error("--scope must be overall, unseen, or both");
  std::set<std::string> train_concepts;
  if (!o.train_concepts.empty()) train_concepts = load_concept_set(o.train_concepts);
  if (o.scope != "overall" && o.train_concepts.empty())
    throw config_error("--scope " + o.scope + " requires --train-concepts");

  std::vector<std::pair<std::string, std::string>> kv;
  if (o.scope == "overall" || o.scope == "both") {
    ExtractionReport report = evaluate_extraction(gold, preds, train_concepts, EvalScope::overall);
    std::cout << render_report(report);
    for (auto& item : report_kv(report)) kv.push_back(std::move(item));
  }
  if (o.scope == "unseen" || o.scope == "both") {
    ExtractionReport report = evaluate_extraction(gold, preds, train_concepts, EvalScope::unseen);
    std::cout << render_report(report);
    for (auto& item : report_kv(report)) kv.push_back(std::move(item));
  }

  if (!o.out.empty()) {
    ensure_parent_dir(o.out);
    write_kv_records(kv, o.out);
    RunManifest m("eval-ade");
    m.set("gold", o.gold);
    m.set("pred", o.pred);
    m.set("scope", o.scope);
    m.set("train-concepts", o.train_concepts.empty() ? "(none)" : o.train_concepts);
    m.set("out", o.out);
    m.add_input(o.gold);
    m.add_input(o.pred);
    if (!o.train_concepts.empty()) m.add_input(o.train_concepts);
    m.write(o.out + ".manifest");
  }
  return 0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entry point. args excludes the program name, e.g. {"resample", "--in", ...}.
// Exit codes: 0 success, 1 runtime/IO error, 2 usage error.
// ---------------------------------------------------------------------------

inline int run(std::vector<std::string> args) {
  using namespace detail;
  try {
    expand_config_files(args);

    CLI::App app{"social-media therapy-sentiment and ADE normalization toolkit", kToolName};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    int exit_code = 0;

    PreprocessOpts pre;
    CLI::App* sub = app.add_subcommand("preprocess", "normalize tweet text in a corpus file");
    sub->add_option("--in", pre.in, "input sentiment corpus TSV")->required();
    sub->add_option("--out", pre.out, "output corpus TSV")->required();
    sub->add_option("--emoticon-map", pre.emoticon_map, "emoticon map override TSV");
    sub->callback([&]() { exit_code = cmd_preprocess(pre); });

    PairOpts pair;
    sub = app.add_subcommand("pair", "build premise/hypothesis pairs from a corpus");
    sub->add_option("--in", pair.in, "input sentiment corpus TSV")->required();
    sub->add_option("--out", pair.out, "output pairs TSV")->required();
    sub->add_option("--hypothesis-template", pair.hypothesis_template,
                    "template with one {therapy} placeholder")
        ->capture_default_str();
    sub->add_option("--emoticon-map", pair.emoticon_map, "emoticon map override TSV");
    sub->callback([&]() { exit_code = cmd_pair(pair); });

    ResampleOpts res;
    sub = app.add_subcommand("resample", "undersample classes to a target ratio");
    sub->add_option("--in", res.in, "input pairs TSV")->required();
    sub->add_option("--out", res.out, "output pairs TSV")->required();
    sub->add_option("--ratio", res.ratio, "target ratio P:N:U")->capture_default_str();
    sub->add_option("--seed", res.seed, "PRNG seed")->capture_default_str();
    sub->add_option("--only-downsample", res.only_downsample,
                    "cut only the named class (supports: neutral)");
    sub->callback([&]() { exit_code = cmd_resample(res); });

    SplitOpts spl;
    sub = app.add_subcommand("split", "split pairs into train and dev");
    sub->add_option("--in", spl.in, "input pairs TSV")->required();
    sub->add_option("--train-out", spl.train_out, "output train pairs TSV")->required();
    sub->add_option("--dev-out", spl.dev_out, "output dev pairs TSV")->required();
    sub->add_option("--train-fraction", spl.train_fraction, "train share in (0,1)")
        ->capture_default_str();
    sub->add_option("--seed", spl.seed, "PRNG seed")->capture_default_str();
    sub->add_flag("--stratified", spl.stratified, "apply the floor rule per class");
    sub->callback([&]() { exit_code = cmd_split(spl); });

    TrainOpts tr;
    sub = app.add_subcommand("train-sentiment", "fine-tune a pair classifier");
    sub->add_option("--train", tr.train, "training pairs TSV")->required();
    sub->add_option("--dev", tr.dev, "dev pairs TSV");
    sub->add_option("--model-dir", tr.model_dir, "output model directory")->required();
    sub->add_option("--backend", tr.backend, "classifier backend id")->capture_default_str();
    sub->add_option("--checkpoint", tr.checkpoint, "pretrained checkpoint identifier")
        ->capture_default_str();
    sub->add_option("--cache-dir", tr.cache_dir, "checkpoint cache directory")
        ->envname("MEDTWEET_CACHE_DIR");
    sub->add_option("--epochs", tr.epochs, "training epochs")->capture_default_str();
    sub->add_option("--learning-rate", tr.learning_rate, "optimizer learning rate")
        ->capture_default_str();
    sub->add_option("--weight-decay", tr.weight_decay, "decoupled weight decay rate")
        ->capture_default_str();
    sub->add_option("--lr-decay", tr.lr_decay, "per-epoch learning-rate decay")
        ->capture_default_str();
    sub->add_option("--batch-size", tr.batch_size, "minibatch size")->capture_default_str();
    sub->add_option("--max-seq-len", tr.max_seq_len, "token budget per pair")
        ->capture_default_str();
    sub->add_option("--seed", tr.seed, "PRNG seed")->capture_default_str();
    sub->callback([&]() { exit_code = cmd_train_sentiment(tr); });

    PredictOpts prd;
    sub = app.add_subcommand("predict-sentiment", "predict labels for pairs");
    sub->add_option("--model-dir", prd.model_dir, "trained model directory")->required();
    sub->add_option("--in", prd.in, "input pairs TSV")->required();
    sub->add_option("--out", prd.out, "output predictions TSV")->required();
    sub->callback([&]() { exit_code = cmd_predict_sentiment(prd); });

    EvalSentimentOpts evs;
    sub = app.add_subcommand("eval-sentiment", "score predictions against gold labels");
    sub->add_option("--gold", evs.gold, "gold labels (corpus or id/label rows)")->required();
    sub->add_option("--pred", evs.pred, "predicted id/label rows")->required();
    sub->add_option("--out", evs.out, "also write key-value records here");
    sub->callback([&]() { exit_code = cmd_eval_sentiment(evs); });

    BaselineOpts bas;
    sub = app.add_subcommand("baseline", "majority or distribution baseline predictions");
    sub->add_option("--kind", bas.kind, "majority or distribution")->required();
    sub->add_option("--train", bas.train, "labeled training file")->required();
    sub->add_option("--in", bas.in, "tweets/pairs to predict on")->required();
    sub->add_option("--out", bas.out, "output predictions TSV")->required();
    sub->add_option("--seed", bas.seed, "PRNG seed (distribution baseline)")
        ->capture_default_str();
    sub->callback([&]() { exit_code = cmd_baseline(bas); });

    ExtractOpts ext;
    sub = app.add_subcommand("extract-ade", "generate candidate ADE spans per tweet");
    sub->add_option("--in", ext.in, "tweets (ADE or sentiment corpus TSV)")->required();
    sub->add_option("--out", ext.out, "output spans TSV (tweet_id, span)")->required();
    sub->add_option("--generator", ext.generator, "span generator backend id")
        ->capture_default_str();
    sub->add_option("--phrases", ext.phrases, "phrase list file for the gazetteer");
    sub->add_option("--fit-from", ext.fit_from, "ADE corpus TSV to fit the gazetteer on");
    sub->callback([&]() { exit_code = cmd_extract_ade(ext); });

    BuildIndexOpts bix;
    sub = app.add_subcommand("build-index", "embed a lexicon into a retrieval index");
    sub->add_option("--lexicon", bix.lexicon, "lexicon TSV (concept_id, term)")->required();
    sub->add_option("--encoder", bix.encoder, "text encoder backend id")->capture_default_str();
    sub->add_option("--index-dir", bix.index_dir, "output index directory")->required();
    sub->callback([&]() { exit_code = cmd_build_index(bix); });

    LinkOpts lnk;
    sub = app.add_subcommand("link", "normalize spans to lexicon concept ids");
    sub->add_option("--tweets", lnk.tweets, "tweets (ADE or sentiment corpus TSV)")->required();
    sub->add_option("--index-dir", lnk.index_dir, "retrieval index directory")->required();
    sub->add_option("--out", lnk.out, "output predictions TSV")->required();
    sub->add_option("--spans", lnk.spans, "precomputed spans TSV (skip generation)");
    sub->add_option("--threshold", lnk.threshold, "minimum cosine score (strict)")
        ->capture_default_str();
    sub->add_option("--generator", lnk.generator, "span generator backend id")
        ->capture_default_str();
    sub->add_option("--phrases", lnk.phrases, "phrase list file for the gazetteer");
    sub->add_option("--fit-from", lnk.fit_from, "ADE corpus TSV to fit the gazetteer on");
    sub->callback([&]() { exit_code = cmd_link(lnk); });

    EvalAdeOpts eva;
    sub = app.add_subcommand("eval-ade", "score ADE predictions against a gold corpus");
    sub->add_option("--gold", eva.gold, "gold ADE corpus TSV")->required();
    sub->add_option("--pred", eva.pred, "predicted annotation rows")->required();
    sub->add_option("--scope", eva.scope, "overall, unseen, or both")->capture_default_str();
    sub->add_option("--train-concepts", eva.train_concepts,
                    "file of training concept ids (one per line)");
    sub->add_option("--out", eva.out, "also write key-value records here");
    sub->callback([&]() { exit_code = cmd_eval_ade(eva); });

    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 2;
    }
    return exit_code;
  } catch (const medtweet::error& e) {
    std::cerr << kToolName << ": error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << kToolName << ": error: " << e.what() << "\n";
    return 1;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args));
}

}  // namespace medtweet::cli
