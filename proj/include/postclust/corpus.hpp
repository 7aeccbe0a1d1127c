#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace postclust {

/// One forum post: [thread_id, author, title, date, content].
struct Post {
  std::string thread_id;
  std::string author;
  std::string title;
  std::string date;  // YYYY-MM-DD
  std::string content;

  bool operator==(const Post&) const = default;
};

enum class CorpusFormat { jsonl, csv };

/// "jsonl" or "csv"; anything else is a UsageError.
CorpusFormat parse_corpus_format(std::string_view name);

/// Posts in a stable order. `source` is a file path or "synthetic:<seed>".
struct Corpus {
  std::vector<Post> posts;
  std::string source;
  std::size_t dropped = 0;  // records skipped for empty content

  std::size_t size() const { return posts.size(); }

  bool operator==(const Corpus&) const = default;
};

/// Reads a corpus file in file order. Records with empty content are
/// skipped and counted in `Corpus::dropped`; malformed records raise
/// ParseError with the record's line number.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format);

std::string to_jsonl(const Corpus& corpus);
std::string to_csv(const Corpus& corpus);

/// Unique post keys "<thread_id>#<ordinal>", the ordinal counting posts of the
/// same thread in corpus order starting at 0.
std::vector<std::string> post_keys(const Corpus& corpus);

/// Deterministic forum-like corpus built from `n_topics` cancer-type topic
/// vocabularies plus a shared Zipf-weighted background vocabulary. A small
/// fraction of posts are verbatim or lightly edited reposts of earlier posts
/// in the same topic, and about 3% are forum-wide stock messages (welcome and
/// moderator notices) repeated word for word. Requires 1 <= n_topics <= n_posts.
Corpus generate_synthetic(std::size_t n_posts, std::size_t n_topics, std::uint64_t seed);

/// Cancer-type term carried by each synthetic topic, in topic order.
std::vector<std::string> synthetic_topic_terms(std::size_t n_topics);

}  // namespace postclust
