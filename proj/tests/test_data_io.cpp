#include <catch2/catch.hpp>

#include "medtweet/data_io.hpp"
#include "medtweet/hashing.hpp"
#include "medtweet/rng.hpp"
#include "support.hpp"

using namespace medtweet;
using testsupport::TempDir;
using testsupport::read_file;
using testsupport::write_file;

TEST_CASE("sentiment corpus: basic row parses") {
  TempDir tmp("sc_basic");
  write_file(tmp.file("c.tsv"), "tweet_id\ttext\ttherapy\tlabel\nt1\tI love it\tCBT\tpositive\n");
  auto records = load_sentiment_corpus(tmp.file("c.tsv"));
  REQUIRE(records.size() == 1);
  CHECK(records[0].tweet_id == "t1");
  CHECK(records[0].text == "I love it");
  CHECK(records[0].therapy == "CBT");
  CHECK(records[0].label == SentimentLabel::positive);
}

TEST_CASE("sentiment corpus: header-only file gives an empty list") {
  TempDir tmp("sc_empty");
  write_file(tmp.file("c.tsv"), "tweet_id\ttext\ttherapy\tlabel\n");
  CHECK(load_sentiment_corpus(tmp.file("c.tsv")).empty());
}

TEST_CASE("sentiment corpus: labels parse case-insensitively") {
  TempDir tmp("sc_case");
  write_file(tmp.file("c.tsv"),
             "tweet_id\ttext\ttherapy\tlabel\n"
             "t1\tok\tCBT\tPositive\n"
             "t2\tok too\tCBT\tNEUTRAL\n");
  auto records = load_sentiment_corpus(tmp.file("c.tsv"));
  CHECK(records[0].label == SentimentLabel::positive);
  CHECK(records[1].label == SentimentLabel::neutral);
}

TEST_CASE("sentiment corpus: unlabeled variants and empty cells") {
  TempDir tmp("sc_unlab");
  write_file(tmp.file("a.tsv"), "tweet_id\ttext\ttherapy\nt1\thello\tyoga\n");
  auto a = load_sentiment_corpus(tmp.file("a.tsv"));
  REQUIRE(a.size() == 1);
  CHECK(a[0].therapy == "yoga");
  CHECK_FALSE(a[0].label.has_value());

  write_file(tmp.file("b.tsv"), "tweet_id\ttext\nt1\thello\n");
  auto b = load_sentiment_corpus(tmp.file("b.tsv"));
  CHECK_FALSE(b[0].therapy.has_value());

  write_file(tmp.file("c.tsv"), "tweet_id\ttext\ttherapy\tlabel\nt1\thello\t\t\n");
  auto c = load_sentiment_corpus(tmp.file("c.tsv"));
  CHECK_FALSE(c[0].therapy.has_value());
  CHECK_FALSE(c[0].label.has_value());
}

TEST_CASE("sentiment corpus: errors carry line numbers") {
  TempDir tmp("sc_err");
  write_file(tmp.file("bad_label.tsv"),
             "tweet_id\ttext\ttherapy\tlabel\nt1\tok\tCBT\tmeh\n");
  CHECK_THROWS_WITH(load_sentiment_corpus(tmp.file("bad_label.tsv")),
                    Catch::Contains(":2:") && Catch::Contains("meh"));

  write_file(tmp.file("dup.tsv"),
             "tweet_id\ttext\ttherapy\tlabel\nt1\ta\tCBT\tpositive\nt1\tb\tCBT\tneutral\n");
  CHECK_THROWS_AS(load_sentiment_corpus(tmp.file("dup.tsv")), format_error);

  CHECK_THROWS_AS(load_sentiment_corpus(tmp.file("missing.tsv")), io_error);

  write_file(tmp.file("cols.tsv"), "tweet_id\ttext\ttherapy\tlabel\nt1\tonly-two\n");
  CHECK_THROWS_AS(load_sentiment_corpus(tmp.file("cols.tsv")), format_error);
}

TEST_CASE("sentiment corpus: write/load roundtrip") {
  TempDir tmp("sc_round");
  std::vector<TweetRecord> records = {
      {"t1", "I love it", "CBT", SentimentLabel::positive},
      {"t2", "no opinion", std::nullopt, std::nullopt},
      {"t3", "mixed été", "physical therapy", SentimentLabel::negative},
  };
  write_sentiment_corpus(records, tmp.file("c.tsv"));
  CHECK(load_sentiment_corpus(tmp.file("c.tsv")) == records);
}

TEST_CASE("write rejects tabs and newlines inside fields") {
  TempDir tmp("sc_tab");
  std::vector<TweetRecord> records = {{"t1", "bad\ttext", std::nullopt, std::nullopt}};
  CHECK_THROWS_AS(write_sentiment_corpus(records, tmp.file("c.tsv")), invalid_input);
  records[0].text = "bad\ntext";
  CHECK_THROWS_AS(write_sentiment_corpus(records, tmp.file("c.tsv")), invalid_input);
}

TEST_CASE("ade corpus: annotated row parses and validates offsets") {
  TempDir tmp("ade_basic");
  write_file(tmp.file("a.tsv"),
             "tweet_id\ttext\thas_ade\tstart\tend\tspan\tconcept_id\n"
             "t9\tdrug X gave me hives\t1\t15\t20\thives\tC100\n");
  auto tweets = load_ade_corpus(tmp.file("a.tsv"));
  REQUIRE(tweets.size() == 1);
  REQUIRE(tweets[0].annotations.size() == 1);
  const AdeAnnotation& ann = tweets[0].annotations[0];
  CHECK(ann.start == 15);
  CHECK(ann.end == 20);
  CHECK(ann.span_text == "hives");
  CHECK(ann.concept_id == "C100");
}

TEST_CASE("ade corpus: no-ADE rows and multi-annotation grouping") {
  TempDir tmp("ade_group");
  write_file(tmp.file("a.tsv"),
             "tweet_id\ttext\thas_ade\tstart\tend\tspan\tconcept_id\n"
             "t2\tfine today\t0\t\t\t\t\n"
             "t3\tnausea then headache\t1\t0\t6\tnausea\tC001\n"
             "t3\tnausea then headache\t1\t12\t20\theadache\tC002\n");
  auto tweets = load_ade_corpus(tmp.file("a.tsv"));
  REQUIRE(tweets.size() == 2);
  CHECK(tweets[0].annotations.empty());
  REQUIRE(tweets[1].annotations.size() == 2);
  CHECK(tweets[1].annotations[0].span_text == "nausea");
  CHECK(tweets[1].annotations[1].span_text == "headache");
}

TEST_CASE("ade corpus: span validation is case-insensitive, offsets are code points") {
  TempDir tmp("ade_utf8");
  write_file(tmp.file("a.tsv"),
             "tweet_id\ttext\thas_ade\tstart\tend\tspan\tconcept_id\n"
             "t1\tcafé gave me Hives\t1\t13\t18\thives\tC100\n");
  auto tweets = load_ade_corpus(tmp.file("a.tsv"));
  REQUIRE(tweets.size() == 1);
  CHECK(tweets[0].annotations[0].span_text == "hives");
}

TEST_CASE("ade corpus: malformed rows are rejected with line numbers") {
  TempDir tmp("ade_err");
  write_file(tmp.file("mismatch.tsv"),
             "tweet_id\ttext\thas_ade\tstart\tend\tspan\tconcept_id\n"
             "t1\tdrug X gave me hives\t1\t15\t20\trash\tC100\n");
  CHECK_THROWS_WITH(load_ade_corpus(tmp.file("mismatch.tsv")), Catch::Contains(":2:"));

  write_file(tmp.file("nonint.tsv"),
             "tweet_id\ttext\thas_ade\tstart\tend\tspan\tconcept_id\n"
             "t1\tdrug X gave me hives\t1\tfifteen\t20\thives\tC100\n");
  CHECK_THROWS_AS(load_ade_corpus(tmp.file("nonint.tsv")), format_error);

  write_file(tmp.file("badrange.tsv"),
             "tweet_id\ttext\thas_ade\tstart\tend\tspan\tconcept_id\n"
             "t1\tshort\t1\t3\t99\tort\tC100\n");
  CHECK_THROWS_AS(load_ade_corpus(tmp.file("badrange.tsv")), format_error);

  write_file(tmp.file("mixed.tsv"),
             "tweet_id\ttext\thas_ade\tstart\tend\tspan\tconcept_id\n"
             "t1\tfine\t0\t1\t2\tin\tC1\n");
  CHECK_THROWS_AS(load_ade_corpus(tmp.file("mixed.tsv")), format_error);

  write_file(tmp.file("contradict.tsv"),
             "tweet_id\ttext\thas_ade\tstart\tend\tspan\tconcept_id\n"
             "t1\tno ADE then one\t1\t0\t2\tno\tC1\n"
             "t1\tno ADE then one\t0\t\t\t\t\n");
  CHECK_THROWS_AS(load_ade_corpus(tmp.file("contradict.tsv")), format_error);
}

TEST_CASE("ade corpus: write/load roundtrip") {
  TempDir tmp("ade_round");
  std::vector<AdeTweet> tweets = {
      {{"t1", "no problems", std::nullopt, std::nullopt}, {}},
      {{"t2", "nausea and hives", std::nullopt, std::nullopt},
       {{"t2", 0, 6, "nausea", "C001"}, {"t2", 11, 16, "hives", "C003"}}},
  };
  write_ade_corpus(tweets, tmp.file("a.tsv"));
  CHECK(load_ade_corpus(tmp.file("a.tsv")) == tweets);
}

TEST_CASE("sentiment predictions: exact bytes and roundtrip") {
  TempDir tmp("pred");
  write_sentiment_predictions({{"t1", SentimentLabel::positive}}, tmp.file("p.tsv"));
  CHECK(read_file(tmp.file("p.tsv")) == "t1\tpositive\n");

  write_sentiment_predictions({}, tmp.file("empty.tsv"));
  CHECK(read_file(tmp.file("empty.tsv")).empty());
  CHECK(load_sentiment_predictions(tmp.file("empty.tsv")).empty());

  std::vector<IdLabel> rows = {{"t1", SentimentLabel::positive},
                               {"t2", SentimentLabel::neutral},
                               {"t3", SentimentLabel::negative}};
  write_sentiment_predictions(rows, tmp.file("r.tsv"));
  CHECK(load_sentiment_predictions(tmp.file("r.tsv")) == rows);

  write_sentiment_predictions(rows, tmp.file("h.tsv"), true);
  CHECK(load_sentiment_predictions(tmp.file("h.tsv")) == rows);
}

TEST_CASE("ade predictions: format and roundtrip") {
  TempDir tmp("adepred");
  std::vector<AdeAnnotation> rows = {{"t1", 15, 20, "hives", "C100"},
                                     {"t2", 0, 6, "nausea", "C001"}};
  write_ade_predictions(rows, tmp.file("p.tsv"));
  CHECK(read_file(tmp.file("p.tsv")) == "t1\t15\t20\thives\tC100\nt2\t0\t6\tnausea\tC001\n");
  CHECK(load_ade_predictions(tmp.file("p.tsv")) == rows);

  write_file(tmp.file("bad.tsv"), "t1\t9\t3\tx\tC1\n");
  CHECK_THROWS_AS(load_ade_predictions(tmp.file("bad.tsv")), format_error);
}

TEST_CASE("prediction roundtrip holds for randomized record lists") {
  TempDir tmp("pred_prop");
  Rng rng(41);
  for (int round = 0; round < 20; ++round) {
    std::vector<IdLabel> rows;
    std::size_t n = rng.below(30);
    for (std::size_t i = 0; i < n; ++i)
      rows.push_back({"id" + std::to_string(rng.next() % 100000) + "_" + std::to_string(i),
                      static_cast<SentimentLabel>(rng.below(3))});
    write_sentiment_predictions(rows, tmp.file("p.tsv"));
    REQUIRE(load_sentiment_predictions(tmp.file("p.tsv")) == rows);
  }
}

TEST_CASE("extracted spans roundtrip") {
  TempDir tmp("spans");
  std::vector<ExtractedSpan> rows = {{"t1", "nausea"}, {"t1", "dizziness"}, {"t2", "hives"}};
  write_extracted_spans(rows, tmp.file("s.tsv"));
  CHECK(load_extracted_spans(tmp.file("s.tsv")) == rows);
}

TEST_CASE("file digests pin the FNV-1a 64 reference values") {
  TempDir tmp("digest");
  write_file(tmp.file("empty"), "");
  CHECK(file_digest(tmp.file("empty")) == "fnv1a64:cbf29ce484222325");
  write_file(tmp.file("a"), "a");
  CHECK(file_digest(tmp.file("a")) == "fnv1a64:af63dc4c8601ec8c");
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK_THROWS_AS(file_digest(tmp.file("missing")), io_error);
}

TEST_CASE("loading rejects invalid UTF-8") {
  TempDir tmp("utf8");
  std::string content = "tweet_id\ttext\ttherapy\tlabel\nt1\tbad \xFF byte\tCBT\tpositive\n";
  write_file(tmp.file("c.tsv"), content);
  CHECK_THROWS_AS(load_sentiment_corpus(tmp.file("c.tsv")), format_error);
}
