#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "postclust/corpus.hpp"

namespace postclust {

/// Strips HTML tags (keeping element text), decodes entities, folds
/// accented Latin letters to ASCII and removes everything that is not a
/// letter, digit, whitespace or basic punctuation. Runs of three or more
/// identical punctuation characters (ASCII art) are dropped and whitespace is
/// collapsed. Total.
std::string cleanse(std::string_view text);

/// Porter (1980) stem of a lowercase ASCII word, matching the reference C
/// implementation distributed with the algorithm. Words of length <= 2 are
/// returned unchanged.
std::string porter_stem(std::string_view word);

/// Stopwords held in stemmed form, so that matching is stable under inflection.
class StopwordSet {
 public:
  StopwordSet() = default;
  explicit StopwordSet(std::span<const std::string> words);

  /// One word per line, '#' starts a comment.
  static StopwordSet load(const std::filesystem::path& path);

  bool contains(std::string_view stem) const { return stems_.contains(std::string(stem)); }
  std::size_t size() const { return stems_.size(); }

 private:
  std::unordered_set<std::string> stems_;
};

struct TokenList {
  std::vector<std::string> tokens;
  std::string source_post_key;

  bool operator==(const TokenList&) const = default;
};

/// Lowercases, splits on non-alphanumeric runs, drops tokens shorter than two
/// characters, stems, and removes stopwords. Stems shorter than two characters
/// are dropped as well.
TokenList tokenize(std::string_view cleansed, const StopwordSet& stopwords);

/// cleanse + tokenize for every post; content only unless `include_titles`.
std::vector<TokenList> preprocess(const Corpus& corpus, const StopwordSet& stopwords, bool include_titles = false);

/// Reads a word-per-line file ('#' comments, blank lines ignored).
std::vector<std::string> read_word_list(const std::filesystem::path& path);

}  // namespace postclust
