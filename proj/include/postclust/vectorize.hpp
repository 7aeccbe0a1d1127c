#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "postclust/corpus.hpp"
#include "postclust/sparse_rows.hpp"
#include "postclust/textprep.hpp"

namespace postclust {

struct VocabularyEntry {
  std::string term;
  std::size_t document_frequency = 0;    // n: documents containing the term
  std::size_t collection_frequency = 0;  // total occurrences across documents
  bool seed = false;                     // predefined cancer-type feature term
};

/// Retained feature terms ordered by descending collection frequency, ties
/// broken by term string.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<VocabularyEntry> entries, std::size_t n_documents);

  std::size_t size() const { return entries_.size(); }
  std::size_t n_documents() const { return n_documents_; }
  const std::vector<VocabularyEntry>& entries() const { return entries_; }
  const VocabularyEntry& operator[](std::size_t i) const { return entries_[i]; }
  std::optional<std::size_t> find(std::string_view term) const;

 private:
  std::vector<VocabularyEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t n_documents_ = 0;
};

/// One L2-normalized tf-idf row per post, in corpus order.
struct TfIdfMatrix {
  SparseRows rows;
  Vocabulary vocabulary;
};

struct TfIdfOptions {
  std::size_t max_features = 1000;
  bool normalize = true;
};

/// Raw count of `term` in `doc`.
std::size_t term_frequency(const TokenList& doc, std::string_view term);

/// log(N) - log(max(n, 1)), natural log. Unknown terms raise LookupError.
double inverse_document_frequency(std::string_view term, const Vocabulary& vocab);

/// Vocabulary = seed terms occurring in at least one document, topped up with
/// the highest collection-frequency terms to `max_features`. Entry (d, t) is
/// tf(t, d) * idf(t, D); rows are then L2-normalized (all-zero rows stay zero).
TfIdfMatrix build_matrix(std::span<const TokenList> docs, const TfIdfOptions& options,
                         std::span<const std::string> seed_terms = {});

/// Text-dump of the matrix: a header line "rows cols nnz", then one
/// "row col value" line per stored entry (0-based, %.17g), then one
/// "# term df" line per vocabulary column.
void write_matrix_dump(const TfIdfMatrix& matrix, const std::filesystem::path& path);

/// Everything needed to turn a corpus into features.
struct FeaturePipeline {
  StopwordSet stopwords;
  std::vector<std::string> seed_terms;  // stemmed
  TfIdfOptions tfidf;
  bool include_titles = false;

  /// Stopword and seed-term files from `data_dir` (defaults to the shipped data).
  static FeaturePipeline from_files(const std::filesystem::path& stopwords_path,
                                    const std::filesystem::path& seed_terms_path);
  static FeaturePipeline defaults();

  TfIdfMatrix featurize(const Corpus& corpus) const;
};

/// Seed-term file: one term per line, stemmed on load.
std::vector<std::string> load_seed_terms(const std::filesystem::path& path);

std::filesystem::path default_data_dir();

}  // namespace postclust
