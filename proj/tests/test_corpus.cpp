#include <map>
#include <set>
#include <string>

#include "doctest.h"
#include "postclust/corpus.hpp"
#include "postclust/dbscan.hpp"
#include "postclust/error.hpp"
#include "postclust/vectorize.hpp"
#include "test_util.hpp"

using namespace postclust;

TEST_CASE("jsonl corpus loads records in file order") {
  TempDir dir;
  write_file(dir / "c.jsonl",
             R"({"thread_id":"t1","author":"ann","title":"Hello","date":"2014-02-01","content":"First post"})" "\n"
             R"({"thread_id":"t1","author":"bob","title":"Re: Hello","date":"2014-02-02","content":"Second"})" "\n"
             "\n"
             R"({"thread_id":"t2","author":"cat","title":"Q","date":"2014-03-01","content":"Third é"})" "\n");
  const Corpus c = load_corpus(dir / "c.jsonl", CorpusFormat::jsonl);
  REQUIRE(c.size() == 3);
  CHECK(c.posts[0] == Post{"t1", "ann", "Hello", "2014-02-01", "First post"});
  CHECK(c.posts[1].author == "bob");
  CHECK(c.posts[2].content == "Third \xC3\xA9");
  CHECK(c.dropped == 0);
  CHECK(c.source == (dir / "c.jsonl").string());
}

TEST_CASE("records with empty content are skipped and counted") {
  TempDir dir;
  write_file(dir / "c.jsonl",
             R"({"thread_id":"t1","author":"a","title":"x","date":"2014-02-01","content":"kept"})" "\n"
             R"({"thread_id":"t1","author":"b","title":"y","date":"2014-02-02","content":""})" "\n");
  const Corpus c = load_corpus(dir / "c.jsonl", CorpusFormat::jsonl);
  CHECK(c.size() == 1);
  CHECK(c.dropped == 1);
}

TEST_CASE("csv corpus handles quoted commas, quotes and newlines") {
  TempDir dir;
  write_file(dir / "c.csv",
             "thread_id,author,title,date,content\n"
             "t9,ann,\"Chemo, week 2\",2015-06-07,\"She said \"\"hang in there\"\", then left\"\n"
             "t9,bob,Re,2015-06-08,\"two\nlines\"\n");
  const Corpus c = load_corpus(dir / "c.csv", CorpusFormat::csv);
  REQUIRE(c.size() == 2);
  CHECK(c.posts[0] == Post{"t9", "ann", "Chemo, week 2", "2015-06-07", "She said \"hang in there\", then left"});
  CHECK(c.posts[1].content == "two\nlines");
}

TEST_CASE("malformed records report their line number") {
  TempDir dir;
  write_file(dir / "bad.jsonl",
             R"({"thread_id":"t1","author":"a","title":"x","date":"2014-02-01","content":"ok"})" "\n"
             R"({"thread_id":"t1","author":"a","title":"x","date":"2014-02-01"})" "\n");
  try {
    load_corpus(dir / "bad.jsonl", CorpusFormat::jsonl);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("content") != std::string::npos);
  }

  write_file(dir / "bad2.jsonl", "{not json}\n");
  CHECK_THROWS_AS(load_corpus(dir / "bad2.jsonl", CorpusFormat::jsonl), ParseError);

  write_file(dir / "bad.csv", "thread_id,author,title,date,content\nt1,a,b,2014-01-01\n");
  try {
    load_corpus(dir / "bad.csv", CorpusFormat::csv);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  write_file(dir / "open.csv", "thread_id,author,title,date,content\nt1,a,b,2014-01-01,\"never closed\n");
  CHECK_THROWS_AS(load_corpus(dir / "open.csv", CorpusFormat::csv), ParseError);
}

TEST_CASE("unknown format and missing file are usage errors") {
  CHECK_THROWS_AS(parse_corpus_format("xml"), UsageError);
  CHECK(parse_corpus_format("csv") == CorpusFormat::csv);
  CHECK(parse_corpus_format("jsonl") == CorpusFormat::jsonl);
  CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl", CorpusFormat::jsonl), UsageError);
}

TEST_CASE("save and load round-trip in both formats") {
  TempDir dir;
  Corpus c = generate_synthetic(40, 3, 11);
  c.posts[0].content = "Comma, \"quote\" and\nnewline";
  for (auto format : {CorpusFormat::jsonl, CorpusFormat::csv}) {
    const auto path = dir / (format == CorpusFormat::csv ? "r.csv" : "r.jsonl");
    save_corpus(c, path, format);
    const Corpus back = load_corpus(path, format);
    CHECK(back.posts == c.posts);
  }
}

TEST_CASE("post keys number posts within each thread") {
  Corpus c;
  c.posts = {{"a", "", "", "", "x"}, {"b", "", "", "", "x"}, {"a", "", "", "", "x"}, {"a", "", "", "", "x"}};
  CHECK(post_keys(c) == std::vector<std::string>{"a#0", "b#0", "a#1", "a#2"});
}

TEST_CASE("synthetic corpus is deterministic and well formed") {
  const Corpus a = generate_synthetic(300, 4, 99);
  const Corpus b = generate_synthetic(300, 4, 99);
  const Corpus other = generate_synthetic(300, 4, 100);
  CHECK(a == b);
  CHECK(a.posts != other.posts);
  REQUIRE(a.size() == 300);
  const auto keys = post_keys(a);
  CHECK(std::set<std::string>(keys.begin(), keys.end()).size() == keys.size());
  for (const auto& p : a.posts) {
    CHECK_FALSE(p.content.empty());
    CHECK(p.date.size() == 10);
  }
}

TEST_CASE("single topic synthetic corpus mentions only that topic") {
  const Corpus c = generate_synthetic(100, 1, 7);
  const auto terms = synthetic_topic_terms(12);
  for (const auto& p : c.posts)
    for (std::size_t t = 1; t < terms.size(); ++t) CHECK(p.content.find(terms[t] + " cancer") == std::string::npos);
}

TEST_CASE("synthetic generator rejects impossible topic counts") {
  CHECK_THROWS_AS(generate_synthetic(3, 5, 1), ArgumentError);
  CHECK_THROWS_AS(generate_synthetic(10, 0, 1), ArgumentError);
  CHECK(generate_synthetic(5, 5, 1).size() == 5);
  CHECK(synthetic_topic_terms(15).size() == 15);
}

TEST_CASE("synthetic topics form one density cluster each at a wide radius") {
  const Corpus c = generate_synthetic(1000, 5, 42);
  const TfIdfMatrix m = FeaturePipeline::defaults().featurize(c);
  const auto terms = synthetic_topic_terms(5);
  for (std::size_t min_points : {5u, 20u}) {
    const auto a = dbscan(m.rows, DbscanParams{0.8, min_points});
    std::map<std::size_t, std::set<std::int32_t>> topic_labels;
    std::set<std::int32_t> stock_labels;
    std::size_t topic_posts = 0, clustered = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c.posts[i].author == "moderator") {
        stock_labels.insert(a.labels[i]);
        continue;
      }
      std::size_t topic = terms.size();
      for (std::size_t t = 0; t < terms.size(); ++t)
        if (c.posts[i].content.find("with " + terms[t] + " cancer") != std::string::npos) topic = t;
      REQUIRE(topic < terms.size());
      ++topic_posts;
      if (a.labels[i] == kNoise) continue;
      ++clustered;
      topic_labels[topic].insert(a.labels[i]);
    }
    CHECK(static_cast<double>(clustered) >= 0.8 * static_cast<double>(topic_posts));
    REQUIRE(topic_labels.size() == 5);
    std::set<std::int32_t> distinct;
    for (const auto& [topic, labels] : topic_labels) {
      CHECK(labels.size() == 1);
      distinct.insert(*labels.begin());
    }
    CHECK(distinct.size() == 5);
    for (std::int32_t l : stock_labels) CHECK_FALSE(distinct.count(l));
  }
}
