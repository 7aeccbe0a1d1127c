#include "postclust/run.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"
#include "postclust/error.hpp"
#include "postclust/mrdbscan.hpp"
#include "postclust/textprep.hpp"
#include "postclust/vectorize.hpp"

namespace postclust {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

RunConfig RunConfig::with_defaults() {
  RunConfig c;
  c.stopwords_path = default_data_dir() / "stopwords.txt";
  c.seed_terms_path = default_data_dir() / "cancer_terms.txt";
  c.training_path = default_training_file();
  return c;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw UsageError(what);
  };
  require(!(epsilon <= 0.0) && std::isfinite(epsilon), "epsilon must be positive");
  require(min_points >= 1, "m_pts must be positive");
  require(max_features >= 1, "max_features must be positive");
  require(workers >= 1, "workers must be positive");
  require(!output_dir.empty(), "output directory must be set");
  if (corpus_path.empty()) {
    require(synthetic_posts >= 1, "synthetic post count must be positive");
    require(synthetic_topics >= 1 && synthetic_topics <= synthetic_posts,
            "synthetic topic count must be between 1 and the post count");
  }
}

std::string RunConfig::to_json() const {
  ojson j;
  j["corpus_path"] = corpus_path.string();
  j["corpus_format"] = corpus_format == CorpusFormat::csv ? "csv" : "jsonl";
  j["synthetic_posts"] = synthetic_posts;
  j["synthetic_topics"] = synthetic_topics;
  j["seed"] = seed;
  j["stopwords_path"] = stopwords_path.string();
  j["seed_terms_path"] = seed_terms_path.string();
  j["training_path"] = training_path.string();
  j["max_features"] = max_features;
  j["epsilon"] = epsilon;
  j["m_pts"] = min_points;
  j["metric"] = std::string(to_string(metric));
  j["max_points"] = max_points;
  j["workers"] = workers;
  j["include_titles"] = include_titles;
  j["dump_matrix"] = dump_matrix;
  j["output_dir"] = output_dir.string();
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunConfig c;
    c.corpus_path = j.at("corpus_path").get<std::string>();
    c.corpus_format = parse_corpus_format(j.at("corpus_format").get<std::string>());
    c.synthetic_posts = j.at("synthetic_posts").get<std::size_t>();
    c.synthetic_topics = j.at("synthetic_topics").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.stopwords_path = j.at("stopwords_path").get<std::string>();
    c.seed_terms_path = j.at("seed_terms_path").get<std::string>();
    c.training_path = j.at("training_path").get<std::string>();
    c.max_features = j.at("max_features").get<std::size_t>();
    c.epsilon = j.at("epsilon").get<double>();
    c.min_points = j.at("m_pts").get<std::size_t>();
    c.metric = parse_metric(j.at("metric").get<std::string>());
    c.max_points = j.at("max_points").get<std::size_t>();
    c.workers = j.at("workers").get<std::size_t>();
    c.include_titles = j.at("include_titles").get<bool>();
    c.dump_matrix = j.at("dump_matrix").get<bool>();
    c.output_dir = j.at("output_dir").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config", 1, e.what());
  }
}

RunArtifacts RunArtifacts::in(const fs::path& run_dir) {
  RunArtifacts a;
  a.run_dir = run_dir;
  a.config = run_dir / "config.json";
  a.posts = run_dir / "posts.jsonl";
  a.assignment = run_dir / "assignment.txt";
  a.classification = run_dir / "classification.tsv";
  a.timings = run_dir / "timings.json";
  a.summary = run_dir / "summary.json";
  a.status = run_dir / "status.json";
  return a;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_status(const fs::path& path, const std::string& state, const std::string& stage = {},
                  const std::string& error = {}) {
  ojson j;
  j["state"] = state;
  if (!stage.empty()) j["stage"] = stage;
  if (!error.empty()) j["error"] = error;
  write_text(path, j.dump(2) + "\n");
}

std::string excerpt(const std::string& content, std::size_t limit = 120) {
  std::string text = cleanse(content);
  if (text.size() <= limit) return text;
  std::size_t cut = limit;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;  // keep UTF-8 whole
  return text.substr(0, cut) + "...";
}

FeaturePipeline pipeline_for(const RunConfig& config) {
  FeaturePipeline p = FeaturePipeline::from_files(config.stopwords_path, config.seed_terms_path);
  p.tfidf.max_features = config.max_features;
  p.include_titles = config.include_titles;
  return p;
}

ojson label_object(const LabelCounts& counts) {
  ojson j;
  for (ClassLabel l : kAllLabels) j[std::string(to_string(l))] = counts[static_cast<std::size_t>(l)];
  return j;
}

}  // namespace

Corpus load_configured_corpus(const RunConfig& config) {
  Corpus corpus = config.corpus_path.empty()
                      ? generate_synthetic(config.synthetic_posts, config.synthetic_topics, config.seed)
                      : load_corpus(config.corpus_path, config.corpus_format);
  if (corpus.posts.empty()) throw UsageError("corpus is empty: " + corpus.source);
  return corpus;
}

RunArtifacts cmd_cluster(const RunConfig& config) {
  config.validate();
  fs::create_directories(config.output_dir);
  RunArtifacts art = RunArtifacts::in(config.output_dir);
  write_status(art.status, "running");

  std::string stage = "config";
  auto fail = [&](const std::string& what) { write_status(art.status, "failed", stage, what); };
  try {
    write_text(art.config, config.to_json());

    stage = "corpus";
    const Corpus corpus = load_configured_corpus(config);
    const std::vector<std::string> keys = post_keys(corpus);

    stage = "features";
    const FeaturePipeline pipeline = pipeline_for(config);
    const TfIdfMatrix matrix = pipeline.featurize(corpus);
    if (config.dump_matrix) {
      art.matrix_dump = config.output_dir / "matrix.txt";
      write_matrix_dump(matrix, *art.matrix_dump);
    }

    stage = "clustering";
    const DbscanParams params{config.epsilon, config.min_points, config.metric};
    MrDbscanResult clustered = mr_dbscan(matrix.rows, params, config.max_points, config.workers);
    art.result = std::move(clustered.assignment);
    art.step_timings = clustered.timings;

    stage = "classification";
    const NbModel model = train_nb(to_labeled_docs(load_training_file(config.training_path), pipeline.stopwords));
    const std::vector<TokenList> docs = preprocess(corpus, pipeline.stopwords, config.include_titles);
    std::vector<ClassLabel> predictions;
    predictions.reserve(docs.size());
    for (const TokenList& d : docs) predictions.push_back(predict_nb(model, d).label);
    const LabelDistribution dist = label_distribution(art.result, predictions);

    stage = "output";
    {
      std::ostringstream posts;
      for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
        ojson j;
        j["index"] = i;
        j["key"] = keys[i];
        j["title"] = corpus.posts[i].title;
        j["excerpt"] = excerpt(corpus.posts[i].content);
        posts << j.dump() << '\n';
      }
      write_text(art.posts, posts.str());
    }
    write_assignment(art.result, art.assignment);
    {
      std::ostringstream tsv;
      tsv << "index\tkey\tlabel\n";
      for (std::size_t i = 0; i < predictions.size(); ++i)
        tsv << i << '\t' << keys[i] << '\t' << to_string(predictions[i]) << '\n';
      write_text(art.classification, tsv.str());
    }
    write_text(art.timings, art.step_timings.to_json() + "\n");
    {
      ojson s;
      std::size_t clustered_posts = 0;
      std::vector<std::size_t> sizes(static_cast<std::size_t>(art.result.n_clusters), 0);
      for (auto l : art.result.labels)
        if (l != kNoise) {
          ++clustered_posts;
          ++sizes[static_cast<std::size_t>(l)];
        }
      s["n_posts"] = corpus.posts.size();
      s["n_dropped"] = corpus.dropped;
      s["n_features"] = matrix.vocabulary.size();
      s["n_clustered"] = clustered_posts;
      s["n_clusters"] = art.result.n_clusters;
      s["n_noise"] = corpus.posts.size() - clustered_posts;
      s["coverage_percent"] = coverage_percent(art.result);
      s["n_partitions"] = art.step_timings.n_partitions;
      s["cluster_sizes"] = sizes;
      s["label_totals"] = label_object(dist.totals);
      s["noise_labels"] = label_object(dist.noise);
      ojson per = ojson::array();
      for (const LabelCounts& c : dist.per_cluster) per.push_back(label_object(c));
      s["cluster_labels"] = per;
      write_text(art.summary, s.dump(2) + "\n");
    }
    write_status(art.status, "complete");
    return art;
  } catch (const UsageError& e) {
    fail(e.what());
    throw;
  } catch (const ParseError& e) {
    fail(e.what());
    throw;
  } catch (const std::exception& e) {
    fail(e.what());
    throw PipelineError(stage, e.what());
  }
}

std::vector<AriReport> cmd_verify(const RunConfig& config, const std::vector<GridPoint>& grid, bool inject_fault) {
  config.validate();
  if (grid.empty()) throw UsageError("verification grid is empty");
  const Corpus corpus = load_configured_corpus(config);
  VerifyOptions options;
  options.metric = config.metric;
  options.max_points = config.max_points;
  options.workers = config.workers;
  options.inject_fault = inject_fault;
  const auto reports = run_verification_suite(corpus, grid, pipeline_for(config), options);

  fs::create_directories(config.output_dir);
  std::string lines;
  for (const AriReport& r : reports) lines += r.to_json() + "\n";
  write_text(config.output_dir / "verify.jsonl", lines);
  write_text(config.output_dir / "verify.txt", format_ari_table(reports));
  return reports;
}

std::vector<BenchRecord> cmd_bench(const RunConfig& config, const BenchRequest& request) {
  config.validate();
  if (request.sizes.empty() && request.epsilon_sweep.empty()) throw UsageError("bench needs sizes or an epsilon sweep");
  if (request.repeats < 1) throw UsageError("repeats must be positive");
  if (!(request.time_budget_s > 0.0)) throw UsageError("time budget must be positive");

  BenchOptions options;
  options.workers = config.workers;
  options.max_points = config.max_points;
  options.repeats = request.repeats;
  options.time_budget_s = request.time_budget_s;
  options.n_topics = config.synthetic_topics;
  options.seed = config.seed;
  const DbscanParams params{config.epsilon, config.min_points, config.metric};
  const FeaturePipeline pipeline = pipeline_for(config);

  std::vector<BenchRecord> records;
  if (!request.epsilon_sweep.empty()) {
    const TfIdfMatrix matrix = pipeline.featurize(load_configured_corpus(config));
    records = run_epsilon_sweep(matrix.rows, request.epsilon_sweep, params, options);
  } else {
    std::vector<std::size_t> sizes = request.sizes;
    if (!std::is_sorted(sizes.begin(), sizes.end())) throw UsageError("bench sizes must be ascending");
    records = run_scaling_bench(sizes, params, pipeline, options);
  }

  fs::create_directories(config.output_dir);
  std::string lines;
  for (const BenchRecord& r : records) lines += r.to_json() + "\n";
  write_text(config.output_dir / "bench.jsonl", lines);
  write_text(config.output_dir / "bench.txt", format_bench_table(records));
  return records;
}

std::int32_t parse_cluster_filter(const std::string& text) {
  if (text == "noise") return kNoise;
  std::size_t used = 0;
  long v = -2;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || v < 0) throw UsageError("cluster must be a non-negative ID or 'noise', got '" + text + "'");
  return static_cast<std::int32_t>(v);
}

namespace {

struct PostRow {
  std::string key;
  std::string excerpt;
  ClassLabel label = ClassLabel::Irrelevant;
  std::int32_t cluster = kNoise;
};

std::vector<PostRow> load_run(const RunArtifacts& art, std::int32_t& n_clusters) {
  const std::string status = read_text(art.status);
  if (nlohmann::json::parse(status).value("state", "") != "complete")
    throw UsageError("run directory is not complete: " + art.run_dir.string());

  const ClusterAssignment assignment = read_assignment(art.assignment);
  n_clusters = assignment.n_clusters;
  std::vector<PostRow> rows(assignment.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].cluster = assignment.labels[i];

  std::istringstream posts(read_text(art.posts));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(posts, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto i = j.at("index").get<std::size_t>();
    if (i >= rows.size()) throw ParseError(art.posts.string(), line_no, "post index out of range");
    rows[i].key = j.at("key").get<std::string>();
    rows[i].excerpt = j.at("excerpt").get<std::string>();
  }

  std::istringstream tsv(read_text(art.classification));
  std::getline(tsv, line);  // header
  line_no = 1;
  while (std::getline(tsv, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto a = line.find('\t');
    const auto b = line.rfind('\t');
    if (a == std::string::npos || a == b) throw ParseError(art.classification.string(), line_no, "expected 3 fields");
    const auto i = std::stoul(line.substr(0, a));
    if (i >= rows.size()) throw ParseError(art.classification.string(), line_no, "post index out of range");
    rows[i].label = parse_label(line.substr(b + 1));
  }
  return rows;
}

std::string cluster_name(std::int32_t c) { return c == kNoise ? "noise" : std::to_string(c); }

}  // namespace

std::string cmd_stats(const fs::path& run_dir, const StatsQuery& query) {
  const RunArtifacts art = RunArtifacts::in(run_dir);
  std::int32_t n_clusters = 0;
  const std::vector<PostRow> posts = load_run(art, n_clusters);

  if (query.cluster && *query.cluster != kNoise && (*query.cluster < 0 || *query.cluster >= n_clusters)) {
    std::string valid = n_clusters > 0 ? "0.." + std::to_string(n_clusters - 1) + ", noise" : "noise";
    throw LookupError("unknown cluster " + std::to_string(*query.cluster) + " (valid clusters: " + valid + ")");
  }

  auto matches = [&](const PostRow& p) {
    return (!query.cluster || p.cluster == *query.cluster) && (!query.label || p.label == *query.label);
  };

  ojson j;
  std::ostringstream text;
  if (!query.cluster && !query.label) {
    LabelCounts totals{};
    std::size_t clustered = 0;
    std::vector<std::size_t> sizes(static_cast<std::size_t>(n_clusters), 0);
    std::size_t noise = 0;
    for (const PostRow& p : posts) {
      ++totals[static_cast<std::size_t>(p.label)];
      if (p.cluster == kNoise) {
        ++noise;
      } else {
        ++clustered;
        ++sizes[static_cast<std::size_t>(p.cluster)];
      }
    }
    j["posts"] = posts.size();
    j["clustered_posts"] = clustered;
    j["clusters"] = n_clusters;
    j["labels"] = label_object(totals);
    ojson hist = ojson::object();
    for (std::size_t c = 0; c < sizes.size(); ++c) hist[std::to_string(c)] = sizes[c];
    hist["noise"] = noise;
    j["posts_per_cluster"] = hist;

    text << "posts            " << posts.size() << '\n'
         << "clustered posts  " << clustered << '\n'
         << "clusters         " << n_clusters << '\n'
         << "labels\n";
    for (ClassLabel l : kAllLabels) {
      std::string name(to_string(l));
      text << "  " << name << std::string(12 - name.size(), ' ') << totals[static_cast<std::size_t>(l)] << '\n';
    }
    std::size_t widest = 1;
    for (std::size_t s : sizes) widest = std::max(widest, s);
    widest = std::max(widest, noise);
    text << "posts per cluster\n";
    auto bar = [&](const std::string& name, std::size_t count) {
      const std::size_t len = (count * 40 + widest - 1) / widest;
      text << "  " << name << std::string(name.size() < 6 ? 6 - name.size() : 0, ' ') << ' '
           << std::string(len, '#') << ' ' << count << '\n';
    };
    for (std::size_t c = 0; c < sizes.size(); ++c) bar(std::to_string(c), sizes[c]);
    bar("noise", noise);
  } else if (query.cluster && !query.label) {
    LabelCounts counts{};
    ojson keys = ojson::array();
    for (const PostRow& p : posts)
      if (matches(p)) {
        ++counts[static_cast<std::size_t>(p.label)];
        keys.push_back(p.key);
      }
    j["cluster"] = cluster_name(*query.cluster);
    j["labels"] = label_object(counts);
    j["posts"] = keys;
    text << "cluster " << cluster_name(*query.cluster) << " (" << keys.size() << " posts)\n";
    for (ClassLabel l : kAllLabels) {
      std::string name(to_string(l));
      text << "  " << name << std::string(12 - name.size(), ' ') << counts[static_cast<std::size_t>(l)] << '\n';
    }
    text << "posts\n";
    for (const auto& k : keys) text << "  " << k.get<std::string>() << '\n';
  } else {
    ojson rows = ojson::array();
    for (const PostRow& p : posts)
      if (matches(p)) {
        ojson r;
        r["key"] = p.key;
        r["cluster"] = cluster_name(p.cluster);
        r["label"] = std::string(to_string(p.label));
        r["excerpt"] = p.excerpt;
        rows.push_back(r);
        text << p.key << '\t' << cluster_name(p.cluster) << '\t' << to_string(p.label) << '\t' << p.excerpt << '\n';
      }
    if (query.cluster) j["cluster"] = cluster_name(*query.cluster);
    j["label"] = std::string(to_string(*query.label));
    j["posts"] = rows;
  }
  return query.json ? j.dump(2) + "\n" : text.str();
}

}  // namespace postclust
