#include "postclust/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "postclust/error.hpp"

namespace postclust {

Vocabulary::Vocabulary(std::vector<VocabularyEntry> entries, std::size_t n_documents)
    : entries_(std::move(entries)), n_documents_(n_documents) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto [it, inserted] = index_.emplace(entries_[i].term, i);
    if (!inserted) throw ArgumentError("duplicate vocabulary term '" + entries_[i].term + "'");
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t term_frequency(const TokenList& doc, std::string_view term) {
  return static_cast<std::size_t>(std::count(doc.tokens.begin(), doc.tokens.end(), term));
}

double inverse_document_frequency(std::string_view term, const Vocabulary& vocab) {
  const auto i = vocab.find(term);
  if (!i) throw LookupError("term '" + std::string(term) + "' is not in the vocabulary");
  const auto n = std::max<std::size_t>(vocab[*i].document_frequency, 1);
  return std::log(static_cast<double>(vocab.n_documents())) - std::log(static_cast<double>(n));
}

TfIdfMatrix build_matrix(std::span<const TokenList> docs, const TfIdfOptions& options,
                         std::span<const std::string> seed_terms) {
  if (docs.empty()) throw ArgumentError("cannot build a tf-idf matrix from an empty corpus");
  const std::unordered_set<std::string> seeds(seed_terms.begin(), seed_terms.end());
  if (options.max_features < seeds.size())
    throw ArgumentError("max_features must be at least the number of seed terms");

  // Pass 1: collection and document frequencies.
  std::unordered_map<std::string, VocabularyEntry> stats;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> seen;
    for (const auto& tok : doc.tokens) {
      auto& e = stats[tok];
      if (e.term.empty()) e.term = tok;
      ++e.collection_frequency;
      if (seen.insert(tok).second) ++e.document_frequency;
    }
  }

  std::vector<VocabularyEntry> ranked;
  ranked.reserve(stats.size());
  for (auto& [term, e] : stats) {
    e.seed = seeds.contains(term);
    ranked.push_back(std::move(e));
  }
  auto by_frequency = [](const VocabularyEntry& a, const VocabularyEntry& b) {
    if (a.collection_frequency != b.collection_frequency) return a.collection_frequency > b.collection_frequency;
    return a.term < b.term;
  };
  std::sort(ranked.begin(), ranked.end(), by_frequency);

  std::size_t seed_count = 0;
  for (const auto& e : ranked) seed_count += e.seed ? 1 : 0;
  std::vector<VocabularyEntry> kept;
  std::size_t others_allowed = options.max_features - seed_count;
  for (auto& e : ranked) {
    if (e.seed) {
      kept.push_back(std::move(e));
    } else if (others_allowed > 0) {
      kept.push_back(std::move(e));
      --others_allowed;
    }
  }
  Vocabulary vocab(std::move(kept), docs.size());

  std::vector<double> idf(vocab.size());
  for (std::size_t t = 0; t < vocab.size(); ++t)
    idf[t] = std::log(static_cast<double>(docs.size())) -
             std::log(static_cast<double>(std::max<std::size_t>(vocab[t].document_frequency, 1)));

  // Pass 2: weighted rows.
  std::vector<Eigen::Triplet<double, Index>> triplets;
  std::unordered_map<std::size_t, std::size_t> counts;
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    counts.clear();
    for (const auto& tok : docs[d].tokens)
      if (auto t = vocab.find(tok)) ++counts[*t];
    row.clear();
    for (const auto& [t, tf] : counts) {
      const double w = static_cast<double>(tf) * idf[t];
      if (w != 0.0) row.emplace_back(t, w);
    }
    std::sort(row.begin(), row.end());
    if (options.normalize) {
      double s = 0.0;
      for (const auto& [t, w] : row) s += w * w;
      const double norm = std::sqrt(s);
      if (norm > 0.0)
        for (auto& [t, w] : row) w /= norm;
    }
    for (const auto& [t, w] : row) triplets.emplace_back(static_cast<Index>(d), static_cast<Index>(t), w);
  }
  RowMatrix m(static_cast<Index>(docs.size()), static_cast<Index>(vocab.size()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return TfIdfMatrix{SparseRows(std::move(m)), std::move(vocab)};
}

void write_matrix_dump(const TfIdfMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write matrix dump: " + path.string());
  const SparseRows& rows = matrix.rows;
  out << rows.size() << ' ' << rows.dims() << ' ' << rows.matrix().nonZeros() << '\n';
  char buf[64];
  for (Index i = 0; i < rows.size(); ++i) {
    const RowView r = rows.row(i);
    for (std::size_t k = 0; k < r.indices.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", r.values[k]);
      out << i << ' ' << r.indices[k] << ' ' << buf << '\n';
    }
  }
  for (const auto& e : matrix.vocabulary.entries()) out << "# " << e.term << ' ' << e.document_frequency << '\n';
}

std::vector<std::string> load_seed_terms(const std::filesystem::path& path) {
  std::vector<std::string> terms;
  for (const auto& w : read_word_list(path)) {
    std::string lw = w;
    for (char& c : lw) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::string stem = porter_stem(lw);
    if (std::find(terms.begin(), terms.end(), stem) == terms.end()) terms.push_back(std::move(stem));
  }
  return terms;
}

std::filesystem::path default_data_dir() { return POSTCLUST_DATA_DIR; }

FeaturePipeline FeaturePipeline::from_files(const std::filesystem::path& stopwords_path,
                                            const std::filesystem::path& seed_terms_path) {
  FeaturePipeline p;
  p.stopwords = StopwordSet::load(stopwords_path);
  p.seed_terms = load_seed_terms(seed_terms_path);
  return p;
}

FeaturePipeline FeaturePipeline::defaults() {
  return from_files(default_data_dir() / "stopwords.txt", default_data_dir() / "cancer_terms.txt");
}

TfIdfMatrix FeaturePipeline::featurize(const Corpus& corpus) const {
  const auto docs = preprocess(corpus, stopwords, include_titles);
  return build_matrix(docs, tfidf, seed_terms);
}

}  // namespace postclust
