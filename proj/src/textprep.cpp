#include "postclust/textprep.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <optional>
#include <unordered_map>

#include "postclust/error.hpp"

namespace postclust {

namespace {

bool is_basic_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?': case '\'': case '"':
    case '-': case '(': case ')': case '/': case '&': case '%':
      return true;
    default:
      return false;
  }
}

bool is_ascii_alnum(unsigned char c) { return std::isalnum(c) != 0; }

// Single-character ASCII folds for the Latin-1 Supplement and a few common
// typographic code points. Empty result means "drop".
std::string_view fold_codepoint(char32_t cp) {
  if (cp == 0x00A0 || cp == 0x2002 || cp == 0x2003 || cp == 0x2009) return " ";
  if (cp == 0x2018 || cp == 0x2019) return "'";
  if (cp == 0x201C || cp == 0x201D) return "\"";
  if (cp == 0x2013 || cp == 0x2014) return "-";
  if (cp == 0x2026) return ".";
  if (cp >= 0x00C0 && cp <= 0x00FF) {
    // Order follows the code chart from U+00C0.
    static constexpr std::array<std::string_view, 64> latin1 = {
        "A", "A", "A", "A", "A", "A", "",  "C", "E", "E", "E", "E", "I", "I", "I", "I",
        "D", "N", "O", "O", "O", "O", "O", "",  "O", "U", "U", "U", "U", "Y", "",  "",
        "a", "a", "a", "a", "a", "a", "",  "c", "e", "e", "e", "e", "i", "i", "i", "i",
        "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "",  "y"};
    return latin1[cp - 0x00C0];
  }
  if (cp >= 0x0100 && cp <= 0x017F) {
    // Latin Extended-A alternates upper/lower case pairs over a base letter.
    static constexpr std::string_view bases =
        "AaAaAaCcCcCcCcDdDdEeEeEeEeEeGgGgGgGgHhHhIiIiIiIiIi??JjKkkLlLlLlLlLlNnNnNnnNnOoOoOo??RrRrRrSsSsSsSsTtTtTtUuUuUuUuUuUuWwYyYZzZzZzs";
    const std::size_t off = cp - 0x0100;
    if (off < bases.size() && bases[off] != '?') return bases.substr(off, 1);
    return "";
  }
  return "";
}

std::optional<char32_t> decode_entity(std::string_view name) {
  static const std::unordered_map<std::string_view, char32_t> named = {
      {"amp", '&'},     {"lt", '<'},      {"gt", '>'},      {"quot", '"'},    {"apos", '\''},
      {"nbsp", 0x00A0}, {"rsquo", 0x2019}, {"lsquo", 0x2018}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
      {"ndash", 0x2013}, {"mdash", 0x2014}, {"hellip", 0x2026}};
  if (!name.empty() && name[0] == '#') {
    std::string_view digits = name.substr(1);
    int base = 10;
    if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
      base = 16;
      digits.remove_prefix(1);
    }
    if (digits.empty() || digits.size() > 7) return std::nullopt;
    char32_t value = 0;
    for (char c : digits) {
      int d;
      if (c >= '0' && c <= '9')
        d = c - '0';
      else if (base == 16 && c >= 'a' && c <= 'f')
        d = c - 'a' + 10;
      else if (base == 16 && c >= 'A' && c <= 'F')
        d = c - 'A' + 10;
      else
        return std::nullopt;
      value = value * static_cast<char32_t>(base) + static_cast<char32_t>(d);
    }
    return value;
  }
  auto it = named.find(name);
  if (it == named.end()) return std::nullopt;
  return it->second;
}

bool is_block_tag(std::string_view name) {
  static constexpr std::array<std::string_view, 18> blocks = {
      "br", "p", "div", "li", "ul", "ol", "tr", "td", "th", "h1", "h2", "h3", "h4", "h5", "h6",
      "blockquote", "hr", "table"};
  return std::find(blocks.begin(), blocks.end(), name) != blocks.end();
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Removes markup and decodes entities into UTF-32.
std::u32string strip_markup(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto emit_utf8 = [&](std::size_t& pos) {
    const unsigned char c = static_cast<unsigned char>(text[pos]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || pos + static_cast<std::size_t>(len) > n) {
      ++pos;  // invalid lead byte
      return;
    }
    char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
    for (int k = 1; k < len; ++k) {
      const unsigned char cc = static_cast<unsigned char>(text[pos + static_cast<std::size_t>(k)]);
      if ((cc & 0xC0) != 0x80) {
        ++pos;
        return;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(cp);
    pos += static_cast<std::size_t>(len);
  };

  while (i < n) {
    const char c = text[i];
    if (c == '<' && i + 1 < n &&
        (std::isalpha(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '/' || text[i + 1] == '!')) {
      if (text.compare(i, 4, "<!--") == 0) {
        const auto end = text.find("-->", i + 4);
        i = end == std::string_view::npos ? n : end + 3;
        continue;
      }
      const auto close = text.find('>', i);
      if (close == std::string_view::npos) {
        i = n;
        break;
      }
      std::string_view tag = text.substr(i + 1, close - i - 1);
      const bool closing = !tag.empty() && tag[0] == '/';
      if (closing) tag.remove_prefix(1);
      std::size_t name_end = 0;
      while (name_end < tag.size() && std::isalnum(static_cast<unsigned char>(tag[name_end]))) ++name_end;
      const std::string name = lower_ascii(tag.substr(0, name_end));
      i = close + 1;
      if (!closing && (name == "script" || name == "style")) {
        const auto end = lower_ascii(text.substr(i)).find("</" + name);
        if (end == std::string::npos) {
          i = n;
        } else {
          const auto gt = text.find('>', i + end);
          i = gt == std::string_view::npos ? n : gt + 1;
        }
        continue;
      }
      if (is_block_tag(name)) out.push_back(U' ');
      continue;
    }
    if (c == '&') {
      const auto semi = text.find(';', i);
      if (semi != std::string_view::npos && semi - i <= 10) {
        if (auto cp = decode_entity(text.substr(i + 1, semi - i - 1))) {
          out.push_back(*cp);
          i = semi + 1;
          continue;
        }
      }
    }
    emit_utf8(i);
  }
  return out;
}

}  // namespace

std::string cleanse(std::string_view text) {
  const std::u32string decoded = strip_markup(text);

  std::string kept;
  kept.reserve(decoded.size());
  for (char32_t cp : decoded) {
    if (cp < 0x80) {
      const char c = static_cast<char>(cp);
      if (is_ascii_alnum(static_cast<unsigned char>(c)) || is_basic_punct(c))
        kept.push_back(c);
      else if (std::isspace(static_cast<unsigned char>(c)))
        kept.push_back(' ');
    } else {
      kept += fold_codepoint(cp);
    }
  }

  // Drop ASCII-art runs, then collapse whitespace.
  std::string out;
  out.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size();) {
    std::size_t j = i + 1;
    if (is_basic_punct(kept[i])) {
      while (j < kept.size() && kept[j] == kept[i]) ++j;
      if (j - i >= 3) {
        i = j;
        continue;
      }
    }
    for (std::size_t k = i; k < j; ++k) {
      const char c = kept[k];
      if (c == ' ') {
        if (!out.empty() && out.back() != ' ') out.push_back(' ');
      } else {
        out.push_back(c);
      }
    }
    i = j;
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

StopwordSet::StopwordSet(std::span<const std::string> words) {
  for (const auto& w : words) {
    const std::string lw = lower_ascii(w);
    if (!lw.empty()) stems_.insert(porter_stem(lw));
  }
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open word list: " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(first, last - first + 1));
  }
  return words;
}

StopwordSet StopwordSet::load(const std::filesystem::path& path) {
  const auto words = read_word_list(path);
  return StopwordSet(words);
}

TokenList tokenize(std::string_view cleansed, const StopwordSet& stopwords) {
  TokenList out;
  std::string word;
  auto flush = [&] {
    if (word.size() >= 2) {
      std::string stem = porter_stem(word);
      if (stem.size() >= 2 && !stopwords.contains(stem)) out.tokens.push_back(std::move(stem));
    }
    word.clear();
  };
  for (char c : cleansed) {
    const auto uc = static_cast<unsigned char>(c);
    if (uc < 0x80 && std::isalnum(uc))
      word.push_back(static_cast<char>(std::tolower(uc)));
    else
      flush();
  }
  flush();
  return out;
}

std::vector<TokenList> preprocess(const Corpus& corpus, const StopwordSet& stopwords, bool include_titles) {
  const auto keys = post_keys(corpus);
  std::vector<TokenList> docs;
  docs.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Post& p = corpus.posts[i];
    const std::string text = include_titles ? p.title + "\n" + p.content : p.content;
    TokenList t = tokenize(cleanse(text), stopwords);
    t.source_post_key = keys[i];
    docs.push_back(std::move(t));
  }
  return docs;
}

}  // namespace postclust
