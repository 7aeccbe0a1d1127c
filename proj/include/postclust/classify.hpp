#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "postclust/dbscan.hpp"
#include "postclust/textprep.hpp"

namespace postclust {

/// Within-cluster post classes. The declaration order is the tie-break order.
enum class ClassLabel : std::uint8_t { Cure, NoCure, Disease, Treatment, SideEffect, Irrelevant };

inline constexpr std::size_t kNumLabels = 6;
inline constexpr std::array<ClassLabel, kNumLabels> kAllLabels = {
    ClassLabel::Cure,      ClassLabel::NoCure,     ClassLabel::Disease,
    ClassLabel::Treatment, ClassLabel::SideEffect, ClassLabel::Irrelevant};

std::string_view to_string(ClassLabel label);
/// Exact label name; LookupError listing the six names otherwise.
ClassLabel parse_label(std::string_view name);

/// Multinomial Naive Bayes with add-one smoothing.
struct NbModel {
  /// log P(label); -inf for labels absent from training.
  Eigen::VectorXd class_log_priors = Eigen::VectorXd::Zero(kNumLabels);
  /// log P(term | label), one row per label, one column per vocabulary term.
  Eigen::MatrixXd term_log_likelihoods;
  std::vector<std::string> vocabulary;  // sorted
  std::unordered_map<std::string, Eigen::Index> term_index;

  std::size_t n_terms() const { return vocabulary.size(); }
};

struct LabeledDoc {
  TokenList tokens;
  ClassLabel label = ClassLabel::Irrelevant;
};

/// Single pass over the examples. Empty input raises ArgumentError.
NbModel train_nb(std::span<const LabeledDoc> examples);

struct Prediction {
  ClassLabel label = ClassLabel::Irrelevant;
  std::array<double, kNumLabels> log_scores{};
};

/// Highest-posterior label; terms outside the model vocabulary are ignored.
Prediction predict_nb(const NbModel& model, const TokenList& doc);

using LabelCounts = std::array<std::size_t, kNumLabels>;

struct LabelDistribution {
  std::vector<LabelCounts> per_cluster;  // indexed by cluster ID
  LabelCounts noise{};
  LabelCounts totals{};
};

/// Group-by of predictions over clusters. Sizes must agree (ArgumentError).
LabelDistribution label_distribution(const ClusterAssignment& assignment, std::span<const ClassLabel> predictions);

struct LabeledText {
  std::string text;
  ClassLabel label = ClassLabel::Irrelevant;
};

/// JSONL lines {"text": "...", "label": "<ClassLabel>"}; blank lines skipped.
std::vector<LabeledText> load_training_file(const std::filesystem::path& path);
void save_training_file(std::span<const LabeledText> examples, const std::filesystem::path& path);

/// Cleanses and tokenizes training texts with the pipeline's stopwords.
std::vector<LabeledDoc> to_labeled_docs(std::span<const LabeledText> examples, const StopwordSet& stopwords);

/// Converts the BioText disease/treatment sentence set, one
/// "sentence||relation" record per line, into training examples.
/// Relation mapping: "Cure" -> Cure, "NO Cure" -> NoCure, "Only DIS" ->
/// Disease, "Only TREAT" -> Treatment, "Side Effect" -> SideEffect, anything
/// else -> Irrelevant. Role tags such as <DIS> and </TREAT> are removed.
std::vector<LabeledText> convert_biotext(std::istream& in);

/// Shipped hand-labeled seed set.
std::filesystem::path default_training_file();

}  // namespace postclust
