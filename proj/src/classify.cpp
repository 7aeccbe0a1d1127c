#include "postclust/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>

#include "json.hpp"
#include "postclust/error.hpp"
#include "postclust/vectorize.hpp"

namespace postclust {

std::string_view to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::Cure:
      return "Cure";
    case ClassLabel::NoCure:
      return "NoCure";
    case ClassLabel::Disease:
      return "Disease";
    case ClassLabel::Treatment:
      return "Treatment";
    case ClassLabel::SideEffect:
      return "SideEffect";
    case ClassLabel::Irrelevant:
      return "Irrelevant";
  }
  return "Irrelevant";
}

ClassLabel parse_label(std::string_view name) {
  for (ClassLabel l : kAllLabels)
    if (to_string(l) == name) return l;
  std::string valid;
  for (ClassLabel l : kAllLabels) valid += (valid.empty() ? "" : ", ") + std::string(to_string(l));
  throw LookupError("unknown label '" + std::string(name) + "' (valid labels: " + valid + ")");
}

NbModel train_nb(std::span<const LabeledDoc> examples) {
  if (examples.empty()) throw ArgumentError("training set is empty");

  // One pass: per-label document counts and per-(label, term) token counts.
  std::array<std::size_t, kNumLabels> docs{};
  std::map<std::string, std::array<double, kNumLabels>> counts;
  for (const LabeledDoc& ex : examples) {
    const auto l = static_cast<std::size_t>(ex.label);
    ++docs[l];
    for (const std::string& t : ex.tokens.tokens) counts[t][l] += 1.0;
  }

  NbModel model;
  const auto v = static_cast<Eigen::Index>(counts.size());
  Eigen::MatrixXd c(static_cast<Eigen::Index>(kNumLabels), v);
  model.vocabulary.reserve(counts.size());
  Eigen::Index col = 0;
  for (const auto& [term, per_label] : counts) {
    for (std::size_t l = 0; l < kNumLabels; ++l) c(static_cast<Eigen::Index>(l), col) = per_label[l];
    model.term_index.emplace(term, col++);
    model.vocabulary.push_back(term);
  }

  const double n = static_cast<double>(examples.size());
  for (std::size_t l = 0; l < kNumLabels; ++l)
    model.class_log_priors[static_cast<Eigen::Index>(l)] =
        docs[l] > 0 ? std::log(static_cast<double>(docs[l]) / n) : -std::numeric_limits<double>::infinity();

  // log((count + 1) / (label total + |V|)) for each label row.
  const Eigen::VectorXd denom = (c.rowwise().sum().array() + static_cast<double>(v)).matrix();
  model.term_log_likelihoods = ((c.array() + 1.0).colwise() / denom.array()).log().matrix();
  return model;
}

Prediction predict_nb(const NbModel& model, const TokenList& doc) {
  Prediction out;
  for (std::size_t l = 0; l < kNumLabels; ++l) out.log_scores[l] = model.class_log_priors[static_cast<Eigen::Index>(l)];
  for (const std::string& t : doc.tokens) {
    auto it = model.term_index.find(t);
    if (it == model.term_index.end()) continue;
    for (std::size_t l = 0; l < kNumLabels; ++l)
      out.log_scores[l] += model.term_log_likelihoods(static_cast<Eigen::Index>(l), it->second);
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < kNumLabels; ++l)
    if (out.log_scores[l] > out.log_scores[best]) best = l;
  out.label = kAllLabels[best];
  return out;
}

LabelDistribution label_distribution(const ClusterAssignment& assignment, std::span<const ClassLabel> predictions) {
  if (predictions.size() != assignment.size())
    throw ArgumentError("predictions do not cover the assignment (" + std::to_string(predictions.size()) + " vs " +
                        std::to_string(assignment.size()) + ")");
  LabelDistribution out;
  out.per_cluster.assign(static_cast<std::size_t>(std::max(assignment.n_clusters, 0)), LabelCounts{});
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto l = static_cast<std::size_t>(predictions[i]);
    const std::int32_t c = assignment.labels[i];
    ++(c == kNoise ? out.noise : out.per_cluster[static_cast<std::size_t>(c)])[l];
    ++out.totals[l];
  }
  return out;
}

std::vector<LabeledText> load_training_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read training file: " + path.string());
  std::vector<LabeledText> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("text").get<std::string>(), parse_label(j.at("label").get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    } catch (const LookupError& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return out;
}

void save_training_file(std::span<const LabeledText> examples, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write training file: " + path.string());
  for (const LabeledText& ex : examples) {
    nlohmann::ordered_json j;
    j["text"] = ex.text;
    j["label"] = std::string(to_string(ex.label));
    out << j.dump() << '\n';
  }
}

std::vector<LabeledDoc> to_labeled_docs(std::span<const LabeledText> examples, const StopwordSet& stopwords) {
  std::vector<LabeledDoc> out;
  out.reserve(examples.size());
  for (const LabeledText& ex : examples) out.push_back({tokenize(cleanse(ex.text), stopwords), ex.label});
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

ClassLabel biotext_label(const std::string& relation) {
  if (relation == "Cure") return ClassLabel::Cure;
  if (relation == "NO Cure") return ClassLabel::NoCure;
  if (relation == "Only DIS") return ClassLabel::Disease;
  if (relation == "Only TREAT") return ClassLabel::Treatment;
  if (relation == "Side Effect") return ClassLabel::SideEffect;
  return ClassLabel::Irrelevant;
}

}  // namespace

std::vector<LabeledText> convert_biotext(std::istream& in) {
  std::vector<LabeledText> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto sep = line.rfind("||");
    if (sep == std::string::npos) continue;
    std::string text;
    bool in_tag = false;
    for (char ch : std::string_view(line).substr(0, sep)) {
      if (ch == '<') in_tag = true;
      if (!in_tag) text += ch;
      if (ch == '>') in_tag = false;
    }
    text = trim(text);
    if (text.empty()) continue;
    // Collapse the double spaces left behind by removed tags.
    std::string collapsed;
    for (char ch : text)
      if (!(ch == ' ' && !collapsed.empty() && collapsed.back() == ' ')) collapsed += ch;
    out.push_back({collapsed, biotext_label(trim(std::string_view(line).substr(sep + 2)))});
  }
  return out;
}

std::filesystem::path default_training_file() { return default_data_dir() / "nb_seed.jsonl"; }

}  // namespace postclust
