#include <array>
#include <string>
#include <vector>

#include "postclust/corpus.hpp"
#include "postclust/error.hpp"
#include "postclust/rng.hpp"

namespace postclust {

namespace {

struct Topic {
  std::string cancer;
  std::vector<std::string> words;
};

const std::vector<Topic>& named_topics() {
  static const std::vector<Topic> topics = {
      {"breast", {"mastectomy", "lumpectomy", "tamoxifen", "herceptin", "mammogram", "nipple", "reconstruction",
                  "lymphedema", "letrozole", "implant"}},
      {"lung", {"inhaler", "smoker", "oxygen", "bronchoscopy", "tagrisso", "lobectomy", "pleural", "breathless",
                "cough", "wheezing"}},
      {"prostate", {"psa", "gleason", "prostatectomy", "urinary", "incontinence", "lupron", "bicalutamide",
                    "brachytherapy", "erectile", "urologist"}},
      {"thyroid", {"thyroidectomy", "levothyroxine", "papillary", "thyrogen", "iodine", "synthroid",
                   "parathyroid", "calcium", "throat", "endocrinologist"}},
      {"colon", {"colonoscopy", "polyp", "stoma", "colostomy", "folfox", "bowel", "rectal", "cea", "resection",
                 "ileostomy"}},
      {"melanoma", {"mole", "dermatologist", "mohs", "sunscreen", "keytruda", "lesion", "excision", "freckle",
                    "sunburn", "opdivo"}},
      {"bladder", {"cystoscopy", "urostomy", "bcg", "urothelial", "cystectomy", "hematuria", "catheter",
                   "instillation", "neobladder", "turbt"}},
      {"kidney", {"nephrectomy", "renal", "dialysis", "sutent", "creatinine", "nephrologist", "flank", "votrient",
                  "cryoablation", "adrenal"}},
      {"pancreatic", {"whipple", "jaundice", "gemcitabine", "abraxane", "enzymes", "bile", "stent", "creon",
                      "duodenum", "folfirinox"}},
      {"ovarian", {"hysterectomy", "oophorectomy", "carboplatin", "ascites", "brca", "debulking", "taxol",
                   "gynecologist", "parp", "pelvic"}},
      {"leukemia", {"marrow", "transfusion", "platelets", "blasts", "imatinib", "induction", "neutropenia", "donor",
                    "engraftment", "hematologist"}},
      {"lymphoma", {"hodgkin", "rituximab", "rchop", "lymph", "spleen", "bendamustine", "biopsied", "petscan",
                    "nodes", "follicular"}},
  };
  return topics;
}

// Consonant-vowel pseudo-words for topics beyond the named set.
std::string pseudo_word(std::size_t id) {
  static constexpr std::string_view consonants = "bdfgklmnprstvz";
  static constexpr std::string_view vowels = "aeiou";
  std::string w;
  std::size_t x = id + 7;
  for (int syllable = 0; syllable < 3; ++syllable) {
    w.push_back(consonants[x % consonants.size()]);
    x /= consonants.size();
    w.push_back(vowels[x % vowels.size()]);
    x /= vowels.size();
    x += id * 31 + static_cast<std::size_t>(syllable);
  }
  w.push_back('x');
  return w;
}

Topic topic_at(std::size_t t) {
  const auto& named = named_topics();
  if (t < named.size()) return named[t];
  Topic topic;
  topic.cancer = "onco" + pseudo_word(t * 1000);
  for (std::size_t j = 0; j < 10; ++j) topic.words.push_back(pseudo_word(t * 1000 + j + 1));
  return topic;
}

const std::vector<std::string>& background_words() {
  static const std::vector<std::string> words = {
      "doctor",   "hospital", "week",      "day",       "family",    "husband",  "wife",     "feel",
      "scared",   "hope",     "results",   "scan",      "told",      "diagnosed", "appointment", "nurse",
      "oncologist", "month",  "year",      "time",      "friends",   "support",  "question", "worried",
      "waiting",  "news",     "good",      "bad",       "test",      "blood",    "pain",     "home",
      "work",     "life",     "mother",    "father",    "daughter",  "son",      "sister",   "brother",
      "morning",  "night",    "sleep",     "eat",       "weight",    "energy",   "strong",   "positive",
      "stage",    "surgeon",  "clinic",    "insurance", "plan",      "options",  "second",   "opinion",
      "experience", "advice", "anyone",    "else",      "thank",     "everyone", "forum",    "story",
      "share",    "post",     "reading",   "helpful",   "prayers",   "thoughts", "worry",    "anxiety",
      "follow",   "checkup",  "visit",     "call",      "phone",     "email",    "car",      "drive",
      "walk",     "garden",   "dog",       "cat",       "holiday",   "christmas", "birthday", "summer",
      "winter",   "rain",     "coffee",    "tea",       "book",      "music",    "church",   "neighbor",
  };
  return words;
}

// Per-class phrase pools: Cure, NoCure, Disease, Treatment, SideEffect, Irrelevant.
const std::array<std::vector<std::string>, 6>& class_words() {
  static const std::array<std::vector<std::string>, 6> pools = {{
      {"remission", "cured", "clear", "gone", "free", "survivor", "ned", "celebrate"},
      {"passed", "terminal", "hospice", "spread", "palliative", "died", "funeral", "incurable"},
      {"tumor", "biopsy", "malignant", "metastatic", "grade", "mass", "diagnosis", "benign"},
      {"chemo", "radiation", "surgery", "therapy", "infusion", "immunotherapy", "trial", "dose"},
      {"nausea", "fatigue", "hair", "swallow", "neuropathy", "vomiting", "rash", "numbness"},
      {"sorry", "love", "thanks", "hugs", "welcome", "lol", "weather", "hello"},
  }};
  return pools;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {"i", "the", "my", "was", "and", "a", "to", "it", "is", "we",
                                                 "had", "of", "with", "for", "so", "but", "they", "have"};
  return words;
}

const std::vector<std::string>& replies() {
  static const std::vector<std::string> r = {"Thanks for sharing this.", "Same here.", "Sending hugs!",
                                             "Following this thread.", "Great advice, thank you."};
  return r;
}

// Boilerplate posted verbatim across the whole forum.
const std::vector<std::string>& stock_messages() {
  static const std::vector<std::string> m = {
      "Welcome to the community! Please take a moment to read the forum guidelines. Members share personal "
      "experiences and are not medical professionals, so always talk to your care team.",
      "This thread has been moved to the correct board by a moderator. Please keep each topic in its own thread.",
      "Reminder from the moderators: do not post phone numbers, addresses or other personal contact details.",
  };
  return m;
}

std::string iso_date(std::size_t index) {
  static constexpr std::array<int, 12> days_in_month = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int year = 2012 + static_cast<int>((index / 365) % 10);
  int day_of_year = static_cast<int>((index * 37) % 365);
  int month = 0;
  while (day_of_year >= days_in_month[static_cast<std::size_t>(month)]) {
    day_of_year -= days_in_month[static_cast<std::size_t>(month)];
    ++month;
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month + 1, day_of_year + 1);
  return buf;
}

std::string capitalized(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

class PostWriter {
 public:
  PostWriter(Rng& rng, const Topic& topic, std::size_t label)
      : rng_(rng), topic_(topic), label_(label) {}

  std::string write() {
    std::string text = "I was diagnosed with " + topic_.cancer + " cancer.";
    const std::size_t sentences = 3 + rng_.uniform_index(4);
    const bool html = rng_.bernoulli(0.05);
    for (std::size_t s = 0; s < sentences; ++s) {
      text += html ? "<br>" : " ";
      text += sentence();
    }
    if (rng_.bernoulli(0.03)) text += " \xF0\x9F\x98\x80";  // emoji
    return text;
  }

 private:
  std::string sentence() {
    const std::size_t words = 6 + rng_.uniform_index(7);
    std::string out;
    for (std::size_t w = 0; w < words; ++w) {
      if (!out.empty()) out.push_back(' ');
      if (rng_.bernoulli(0.3)) {
        out += filler_words()[rng_.uniform_index(filler_words().size())];
        out.push_back(' ');
      }
      out += word();
    }
    static constexpr std::array<char, 3> enders = {'.', '?', '!'};
    out.push_back(enders[rng_.bernoulli(0.8) ? 0 : 1 + rng_.uniform_index(2)]);
    return capitalized(out);
  }

  const std::string& word() {
    static const DiscreteSampler topic_sampler = DiscreteSampler::zipf(10, 0.8);
    static const DiscreteSampler background_sampler = DiscreteSampler::zipf(background_words().size(), 1.1);
    const double u = rng_.uniform();
    if (u < 0.08) return topic_.cancer;
    if (u < 0.48) return topic_.words[topic_sampler.sample(rng_)];
    if (u < 0.60) {
      const auto& pool = class_words()[label_];
      return pool[rng_.uniform_index(pool.size())];
    }
    return background_words()[background_sampler.sample(rng_)];
  }

  Rng& rng_;
  const Topic& topic_;
  std::size_t label_;
};

}  // namespace

std::vector<std::string> synthetic_topic_terms(std::size_t n_topics) {
  std::vector<std::string> terms;
  for (std::size_t t = 0; t < n_topics; ++t) terms.push_back(topic_at(t).cancer);
  return terms;
}

Corpus generate_synthetic(std::size_t n_posts, std::size_t n_topics, std::uint64_t seed) {
  if (n_topics < 1) throw ArgumentError("n_topics must be at least 1");
  if (n_topics > n_posts) throw ArgumentError("n_topics must not exceed n_posts");

  Rng rng(seed);
  std::vector<Topic> topics;
  for (std::size_t t = 0; t < n_topics; ++t) topics.push_back(topic_at(t));

  static const DiscreteSampler label_sampler(std::array<double, 6>{0.10, 0.10, 0.25, 0.25, 0.15, 0.15});
  static const DiscreteSampler template_sampler = DiscreteSampler::zipf(8, 1.3);
  static const DiscreteSampler stock_sampler(std::array<double, 3>{0.85, 0.11, 0.04});

  struct TopicState {
    std::vector<std::size_t> originals;  // indices of non-repost posts
    std::size_t thread_count = 0;
    std::string open_thread;
  };
  std::vector<TopicState> state(n_topics);

  Corpus corpus;
  corpus.source = "synthetic:" + std::to_string(seed);
  corpus.posts.reserve(n_posts);
  const std::size_t n_authors = n_posts / 3 + 1;

  for (std::size_t i = 0; i < n_posts; ++i) {
    const std::size_t t = i < n_topics ? i : rng.uniform_index(n_topics);
    auto& ts = state[t];
    const Topic& topic = topics[t];

    Post post;
    if (ts.open_thread.empty() || rng.bernoulli(0.3)) {
      ts.open_thread = topic.cancer + "-" + std::to_string(ts.thread_count++);
      post.title = "About my " + topic.cancer + " cancer (" + std::to_string(ts.thread_count) + ")";
    } else {
      post.title = "Re: " + topic.cancer + " thread";
    }
    post.thread_id = ts.open_thread;
    post.author = "user" + std::to_string(rng.uniform_index(n_authors));
    post.date = iso_date(i);

    if (rng.bernoulli(0.032)) {
      post.author = "moderator";
      post.content = stock_messages()[stock_sampler.sample(rng)];
    } else if (!ts.originals.empty() && rng.bernoulli(0.08)) {
      const std::size_t pick = template_sampler.sample(rng) % std::min<std::size_t>(ts.originals.size(), 8);
      post.content = corpus.posts[ts.originals[pick]].content;
      const double edit = rng.uniform();
      if (edit < 0.25) {
        post.content += " " + replies()[rng.uniform_index(replies().size())];
      } else if (edit < 0.5) {
        post.content += " " + topic.words[rng.uniform_index(topic.words.size())];
      }
    } else {
      PostWriter writer(rng, topic, label_sampler.sample(rng));
      post.content = writer.write();
      ts.originals.push_back(i);
    }
    corpus.posts.push_back(std::move(post));
  }
  return corpus;
}

}  // namespace postclust
