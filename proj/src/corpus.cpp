#include "postclust/corpus.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "postclust/error.hpp"
#include "postclust/rng.hpp"

namespace postclust {

namespace {

constexpr std::array<const char*, 5> kFields = {"thread_id", "author", "title", "date", "content"};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open corpus file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Post post_from_json(const nlohmann::json& j, const std::string& source, std::size_t line) {
  if (!j.is_object()) throw ParseError(source, line, "record is not a JSON object");
  Post p;
  std::array<std::string*, 5> slots = {&p.thread_id, &p.author, &p.title, &p.date, &p.content};
  for (std::size_t i = 0; i < kFields.size(); ++i) {
    auto it = j.find(kFields[i]);
    if (it == j.end()) throw ParseError(source, line, std::string("missing field '") + kFields[i] + "'");
    if (!it->is_string()) throw ParseError(source, line, std::string("field '") + kFields[i] + "' is not a string");
    *slots[i] = it->get<std::string>();
  }
  return p;
}

Corpus load_jsonl(const std::string& text, const std::string& source) {
  Corpus corpus;
  corpus.source = source;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, line_no, e.what());
    }
    Post p = post_from_json(j, source, line_no);
    if (p.content.empty()) {
      ++corpus.dropped;
      continue;
    }
    corpus.posts.push_back(std::move(p));
  }
  return corpus;
}

struct CsvRecord {
  std::size_t line;
  std::vector<std::string> fields;
};

// RFC 4180: quoted fields may hold commas, doubled quotes and newlines.
std::vector<CsvRecord> parse_csv(const std::string& text, const std::string& source) {
  std::vector<CsvRecord> records;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    CsvRecord rec{line, {}};
    std::string field;
    bool done = false;
    while (!done) {
      field.clear();
      if (i < n && text[i] == '"') {
        ++i;
        for (;;) {
          if (i >= n) throw ParseError(source, rec.line, "unterminated quoted field");
          char c = text[i++];
          if (c == '"') {
            if (i < n && text[i] == '"') {
              field.push_back('"');
              ++i;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line;
            field.push_back(c);
          }
        }
        if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
          throw ParseError(source, line, "unexpected character after closing quote");
      } else {
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') field.push_back(text[i++]);
      }
      rec.fields.push_back(field);
      if (i < n && text[i] == ',') {
        ++i;
      } else {
        if (i < n && text[i] == '\r') ++i;
        if (i < n && text[i] == '\n') ++i;
        ++line;
        done = true;
      }
    }
    bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) records.push_back(std::move(rec));
  }
  return records;
}

Corpus load_csv(const std::string& text, const std::string& source) {
  auto records = parse_csv(text, source);
  Corpus corpus;
  corpus.source = source;
  if (records.empty()) return corpus;
  const auto& header = records.front();
  if (header.fields.size() != kFields.size())
    throw ParseError(source, header.line, "header must have columns thread_id,author,title,date,content");
  for (std::size_t c = 0; c < kFields.size(); ++c)
    if (header.fields[c] != kFields[c])
      throw ParseError(source, header.line, std::string("header column ") + std::to_string(c + 1) + " must be '" +
                                                kFields[c] + "'");
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& f = records[r].fields;
    if (f.size() != kFields.size())
      throw ParseError(source, records[r].line,
                       "expected 5 fields, found " + std::to_string(f.size()));
    Post p{std::move(f[0]), std::move(f[1]), std::move(f[2]), std::move(f[3]), std::move(f[4])};
    if (p.content.empty()) {
      ++corpus.dropped;
      continue;
    }
    corpus.posts.push_back(std::move(p));
  }
  return corpus;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "csv") return CorpusFormat::csv;
  throw UsageError("unknown corpus format '" + std::string(name) + "' (expected jsonl or csv)");
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  const std::string text = read_file(path);
  return format == CorpusFormat::jsonl ? load_jsonl(text, path.string()) : load_csv(text, path.string());
}

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& p : corpus.posts) {
    nlohmann::ordered_json j;
    j["thread_id"] = p.thread_id;
    j["author"] = p.author;
    j["title"] = p.title;
    j["date"] = p.date;
    j["content"] = p.content;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string to_csv(const Corpus& corpus) {
  std::string out = "thread_id,author,title,date,content\n";
  for (const auto& p : corpus.posts) {
    out += csv_quote(p.thread_id) + ',' + csv_quote(p.author) + ',' + csv_quote(p.title) + ',' +
           csv_quote(p.date) + ',' + csv_quote(p.content) + '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write corpus file: " + path.string());
  out << (format == CorpusFormat::jsonl ? to_jsonl(corpus) : to_csv(corpus));
}

std::vector<std::string> post_keys(const Corpus& corpus) {
  std::map<std::string, std::size_t> ordinal;
  std::vector<std::string> keys;
  keys.reserve(corpus.size());
  for (const auto& p : corpus.posts) keys.push_back(p.thread_id + "#" + std::to_string(ordinal[p.thread_id]++));
  return keys;
}

std::size_t Rng::uniform_index(std::size_t n) {
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights) {
  if (weights.empty()) throw ArgumentError("DiscreteSampler needs at least one weight");
  cumulative_.reserve(weights.size());
  double total = 0.0;
  for (double w : weights) {
    total += w;
    cumulative_.push_back(total);
  }
  for (double& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
}

DiscreteSampler DiscreteSampler::zipf(std::size_t n, double exponent) {
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / std::pow(static_cast<double>(r + 1), exponent);
  return DiscreteSampler(w);
}

std::size_t DiscreteSampler::sample(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

}  // namespace postclust
