#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "postclust/classify.hpp"
#include "postclust/error.hpp"
#include "postclust/rng.hpp"
#include "test_util.hpp"

using namespace postclust;

namespace {

LabeledDoc ex(std::vector<std::string> tokens, ClassLabel label) { return {TokenList{std::move(tokens), {}}, label}; }
TokenList toks(std::vector<std::string> tokens) { return TokenList{std::move(tokens), {}}; }

}  // namespace

TEST_CASE("hand-computed four document model") {
  const std::vector<LabeledDoc> train = {ex({"a", "a", "b"}, ClassLabel::Cure), ex({"a"}, ClassLabel::Cure),
                                         ex({"b", "c"}, ClassLabel::Disease), ex({"c"}, ClassLabel::Disease)};
  const NbModel model = train_nb(train);
  CHECK(model.vocabulary == std::vector<std::string>{"a", "b", "c"});
  const auto cure = static_cast<Eigen::Index>(ClassLabel::Cure);
  const auto disease = static_cast<Eigen::Index>(ClassLabel::Disease);
  CHECK(model.class_log_priors[cure] == doctest::Approx(std::log(0.5)));
  CHECK(model.class_log_priors[disease] == doctest::Approx(std::log(0.5)));
  CHECK(std::isinf(model.class_log_priors[static_cast<Eigen::Index>(ClassLabel::Treatment)]));
  // Cure: counts a=3 b=1 c=0 over 4 tokens; Disease: a=0 b=1 c=2 over 3.
  CHECK(model.term_log_likelihoods(cure, 0) == doctest::Approx(std::log(4.0 / 7.0)));
  CHECK(model.term_log_likelihoods(cure, 1) == doctest::Approx(std::log(2.0 / 7.0)));
  CHECK(model.term_log_likelihoods(cure, 2) == doctest::Approx(std::log(1.0 / 7.0)));
  CHECK(model.term_log_likelihoods(disease, 0) == doctest::Approx(std::log(1.0 / 6.0)));
  CHECK(model.term_log_likelihoods(disease, 2) == doctest::Approx(std::log(3.0 / 6.0)));

  const Prediction p = predict_nb(model, toks({"a", "zzz"}));
  CHECK(p.label == ClassLabel::Cure);
  CHECK(p.log_scores[0] == doctest::Approx(std::log(0.5) + std::log(4.0 / 7.0)));
  CHECK(predict_nb(model, toks({"c", "c"})).label == ClassLabel::Disease);
  // Equal priors and no evidence: the earlier label wins.
  CHECK(predict_nb(model, toks({})).label == ClassLabel::Cure);
}

TEST_CASE("likelihood rows are probability distributions") {
  Rng rng(3);
  std::vector<LabeledDoc> train;
  for (int i = 0; i < 60; ++i) {
    std::vector<std::string> t;
    for (int k = 0; k < 5; ++k) t.push_back("w" + std::to_string(rng.uniform_index(30)));
    train.push_back(ex(t, kAllLabels[rng.uniform_index(kNumLabels)]));
  }
  const NbModel model = train_nb(train);
  for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(kNumLabels); ++l)
    CHECK(model.term_log_likelihoods.row(l).array().exp().sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empty or unknown document gets the most frequent training label") {
  const std::vector<LabeledDoc> train = {ex({"x"}, ClassLabel::Treatment), ex({"y"}, ClassLabel::Treatment),
                                         ex({"z"}, ClassLabel::SideEffect)};
  const NbModel model = train_nb(train);
  CHECK(predict_nb(model, toks({})).label == ClassLabel::Treatment);
  CHECK(predict_nb(model, toks({"never", "seen"})).label == ClassLabel::Treatment);
}

TEST_CASE("separable classes are recovered") {
  std::vector<LabeledDoc> train;
  Rng rng(5);
  for (ClassLabel label : kAllLabels)
    for (int i = 0; i < 8; ++i) {
      std::vector<std::string> t;
      for (int k = 0; k < 6; ++k)
        t.push_back(std::string(to_string(label)) + std::to_string(rng.uniform_index(4)));
      t.push_back("shared");
      train.push_back(ex(t, label));
    }
  const NbModel model = train_nb(train);
  for (ClassLabel label : kAllLabels)
    CHECK(predict_nb(model, toks({std::string(to_string(label)) + "2", "shared"})).label == label);
}

TEST_CASE("duplicating the training set does not change predictions") {
  const auto texts = load_training_file(default_training_file());
  const auto docs = to_labeled_docs(texts, StopwordSet::load(POSTCLUST_DATA_DIR "/stopwords.txt"));
  std::vector<LabeledDoc> twice = docs;
  twice.insert(twice.end(), docs.begin(), docs.end());
  const NbModel a = train_nb(docs), b = train_nb(twice);
  CHECK(a.class_log_priors.isApprox(b.class_log_priors));
  for (const auto& d : docs) CHECK(predict_nb(a, d.tokens).label == predict_nb(b, d.tokens).label);
}

TEST_CASE("shipped seed set covers every label and fits itself well") {
  const auto texts = load_training_file(default_training_file());
  CHECK(texts.size() >= 60);
  LabelCounts seen{};
  for (const auto& t : texts) ++seen[static_cast<std::size_t>(t.label)];
  for (auto c : seen) CHECK(c > 0);
  const auto docs = to_labeled_docs(texts, StopwordSet::load(POSTCLUST_DATA_DIR "/stopwords.txt"));
  const NbModel model = train_nb(docs);
  std::size_t correct = 0;
  for (const auto& d : docs) correct += predict_nb(model, d.tokens).label == d.label ? 1 : 0;
  CHECK(static_cast<double>(correct) / static_cast<double>(docs.size()) >= 0.9);
}

TEST_CASE("empty training set is rejected") {
  CHECK_THROWS_AS(train_nb(std::vector<LabeledDoc>{}), ArgumentError);
}

TEST_CASE("label distribution groups predictions by cluster") {
  ClusterAssignment a;
  a.labels = {0, 0, 1, kNoise, 1, 0};
  a.n_clusters = 2;
  const std::vector<ClassLabel> pred = {ClassLabel::Cure, ClassLabel::Cure, ClassLabel::Disease,
                                        ClassLabel::Irrelevant, ClassLabel::Cure, ClassLabel::SideEffect};
  const auto d = label_distribution(a, pred);
  REQUIRE(d.per_cluster.size() == 2);
  CHECK(d.per_cluster[0] == LabelCounts{2, 0, 0, 0, 1, 0});
  CHECK(d.per_cluster[1] == LabelCounts{1, 0, 1, 0, 0, 0});
  CHECK(d.noise == LabelCounts{0, 0, 0, 0, 0, 1});
  CHECK(d.totals == LabelCounts{3, 0, 1, 0, 1, 1});
  const std::vector<ClassLabel> short_pred(3, ClassLabel::Cure);
  CHECK_THROWS_AS(label_distribution(a, short_pred), ArgumentError);
}

TEST_CASE("label names parse exactly") {
  for (ClassLabel l : kAllLabels) CHECK(parse_label(to_string(l)) == l);
  try {
    parse_label("cure");
    FAIL("expected LookupError");
  } catch (const LookupError& e) {
    const std::string msg = e.what();
    for (ClassLabel l : kAllLabels) CHECK(msg.find(std::string(to_string(l))) != std::string::npos);
  }
}

TEST_CASE("biotext relations map to labels") {
  std::istringstream in(
      "<DIS>Prostate cancer</DIS> was cured by <TREAT>radical prostatectomy</TREAT> .||Cure\n"
      "Patients died despite <TREAT>chemotherapy</TREAT>||NO Cure\n"
      "<DIS>Melanoma</DIS> incidence rises||Only DIS\n"
      "<TREAT>Tamoxifen</TREAT> dosing||Only TREAT\n"
      "Nausea after <TREAT>cisplatin</TREAT>||Side Effect\n"
      "Unrelated sentence with || inside||Vague\n"
      "\n");
  const auto out = convert_biotext(in);
  REQUIRE(out.size() == 6);
  CHECK(out[0].label == ClassLabel::Cure);
  CHECK(out[0].text.find('<') == std::string::npos);
  CHECK(out[0].text.find("Prostate cancer") != std::string::npos);
  CHECK(out[1].label == ClassLabel::NoCure);
  CHECK(out[2].label == ClassLabel::Disease);
  CHECK(out[3].label == ClassLabel::Treatment);
  CHECK(out[4].label == ClassLabel::SideEffect);
  CHECK(out[5].label == ClassLabel::Irrelevant);
  CHECK(out[5].text.find("||") != std::string::npos);
}

TEST_CASE("training file round trip and line numbers") {
  TempDir dir;
  const std::vector<LabeledText> texts = {{"chemo again", ClassLabel::Treatment}, {"thank you", ClassLabel::Irrelevant}};
  save_training_file(texts, dir / "t.jsonl");
  const auto back = load_training_file(dir / "t.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0].text == "chemo again");
  CHECK(back[1].label == ClassLabel::Irrelevant);
  write_file(dir / "bad.jsonl", "{\"text\":\"a\",\"label\":\"Cure\"}\n\n{\"text\":\"b\",\"label\":\"Nope\"}\n");
  try {
    load_training_file(dir / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}
