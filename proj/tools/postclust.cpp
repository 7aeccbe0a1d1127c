#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <thread>

#include "postclust/corpus.hpp"
#include "postclust/error.hpp"
#include "postclust/run.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPipeline = 2;
constexpr int kExitVerify = 3;

struct CorpusFlags {
  std::string path;
  std::string format = "jsonl";
};

void add_config_flags(CLI::App* cmd, postclust::RunConfig& config, CorpusFlags& corpus, std::string& metric) {
  cmd->add_option("--corpus", corpus.path, "Corpus file (synthetic corpus when omitted)");
  cmd->add_option("--format", corpus.format, "Corpus file format: jsonl or csv")->capture_default_str();
  cmd->add_option("--posts", config.synthetic_posts, "Synthetic corpus size")->capture_default_str();
  cmd->add_option("--topics", config.synthetic_topics, "Synthetic topic count")->capture_default_str();
  cmd->add_option("--seed", config.seed, "Synthetic corpus seed")->capture_default_str();
  cmd->add_option("--stopwords", config.stopwords_path, "Stopword list")->capture_default_str();
  cmd->add_option("--seed-terms", config.seed_terms_path, "Cancer-type seed terms")->capture_default_str();
  cmd->add_option("--training", config.training_path, "Classifier training file (JSONL)")->capture_default_str();
  cmd->add_option("--max-features", config.max_features, "Vocabulary size")->capture_default_str();
  cmd->add_option("--epsilon,-e", config.epsilon, "Neighborhood radius")->capture_default_str();
  cmd->add_option("--m-pts,-m", config.min_points, "Minimum points for a core point")->capture_default_str();
  cmd->add_option("--metric", metric, "euclidean or cosine")->capture_default_str();
  cmd->add_option("--max-points", config.max_points, "Points per partition (0: posts / (4 * workers))")
      ->capture_default_str();
  cmd->add_option("--workers,-w", config.workers, "Local DBSCAN worker threads")->capture_default_str();
  cmd->add_flag("--include-titles", config.include_titles, "Prepend titles to post content");
  cmd->add_option("--out,-o", config.output_dir, "Output directory")->capture_default_str();
}

void finish_config(postclust::RunConfig& config, const CorpusFlags& corpus, const std::string& metric) {
  config.corpus_path = corpus.path;
  config.corpus_format = postclust::parse_corpus_format(corpus.format);
  config.metric = postclust::parse_metric(metric);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster forum posts by cancer type with MR-DBSCAN and label them with Naive Bayes"};
  app.require_subcommand(1);

  postclust::RunConfig config = postclust::RunConfig::with_defaults();
  config.workers = std::max(1u, std::thread::hardware_concurrency());
  CorpusFlags corpus;
  std::string metric = "euclidean";

  auto* cluster = app.add_subcommand("cluster", "Run the full pipeline and write a run directory");
  add_config_flags(cluster, config, corpus, metric);
  cluster->add_flag("--dump-matrix", config.dump_matrix, "Also write the tf-idf matrix");

  auto* verify = app.add_subcommand("verify", "Compare DBSCAN and MR-DBSCAN over a parameter grid");
  add_config_flags(verify, config, corpus, metric);
  std::vector<double> grid_eps{1e-3, 1e-2, 1e-1};
  std::vector<std::size_t> grid_m{5, 50, 100};
  bool inject_fault = false;
  verify->add_option("--grid-eps", grid_eps, "Epsilon values of the grid")->capture_default_str();
  verify->add_option("--grid-m-pts", grid_m, "m_pts values of the grid")->capture_default_str();
  verify->add_flag("--inject-fault", inject_fault, "Corrupt one MR-DBSCAN label (tests the failure path)");

  auto* bench = app.add_subcommand("bench", "Time DBSCAN and MR-DBSCAN");
  add_config_flags(bench, config, corpus, metric);
  postclust::BenchRequest request;
  bench->add_option("--sizes", request.sizes, "Synthetic corpus sizes, ascending");
  bench->add_option("--epsilon-sweep", request.epsilon_sweep, "Epsilon values to sweep on the configured corpus");
  bench->add_option("--repeats", request.repeats, "Runs per point (median reported)")->capture_default_str();
  bench->add_option("--budget", request.time_budget_s, "Per-run time budget in seconds")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Query a completed run directory");
  std::string run_dir;
  std::string cluster_filter;
  std::string label_filter;
  bool stats_json = false;
  stats->add_option("run_dir", run_dir, "Run directory written by 'cluster'")->required();
  stats->add_option("--cluster", cluster_filter, "Cluster ID or 'noise'");
  stats->add_option("--label", label_filter, "Cure, NoCure, Disease, Treatment, SideEffect or Irrelevant");
  stats->add_flag("--json", stats_json, "JSON output");

  auto* generate = app.add_subcommand("generate", "Write a synthetic corpus");
  std::size_t gen_posts = 1000, gen_topics = 5;
  std::uint64_t gen_seed = 42;
  std::string gen_out;
  std::string gen_format = "jsonl";
  generate->add_option("--posts", gen_posts, "Post count")->capture_default_str();
  generate->add_option("--topics", gen_topics, "Topic count")->capture_default_str();
  generate->add_option("--seed", gen_seed, "Seed")->capture_default_str();
  generate->add_option("--format", gen_format, "jsonl or csv")->capture_default_str();
  generate->add_option("--out,-o", gen_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cluster) {
      finish_config(config, corpus, metric);
      const auto art = postclust::cmd_cluster(config);
      std::printf("%d clusters, %.2f%% of posts clustered, %zu partitions\nrun directory: %s\n",
                  art.result.n_clusters, postclust::coverage_percent(art.result), art.step_timings.n_partitions,
                  art.run_dir.string().c_str());
    } else if (*verify) {
      finish_config(config, corpus, metric);
      std::vector<postclust::GridPoint> grid;
      for (double e : grid_eps)
        for (std::size_t m : grid_m) grid.push_back({e, m});
      const auto reports = postclust::cmd_verify(config, grid, inject_fault);
      std::cout << postclust::format_ari_table(reports);
      for (const auto& r : reports)
        if (!r.ok()) return kExitVerify;
    } else if (*bench) {
      finish_config(config, corpus, metric);
      const auto records = postclust::cmd_bench(config, request);
      std::cout << postclust::format_bench_table(records);
    } else if (*stats) {
      postclust::StatsQuery query;
      query.json = stats_json;
      if (!cluster_filter.empty()) query.cluster = postclust::parse_cluster_filter(cluster_filter);
      if (!label_filter.empty()) query.label = postclust::parse_label(label_filter);
      std::cout << postclust::cmd_stats(run_dir, query);
    } else if (*generate) {
      if (gen_topics < 1 || gen_topics > gen_posts) throw postclust::UsageError("topics must be between 1 and posts");
      const auto format = postclust::parse_corpus_format(gen_format);
      postclust::save_corpus(postclust::generate_synthetic(gen_posts, gen_topics, gen_seed), gen_out, format);
    }
  } catch (const postclust::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const postclust::LookupError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const postclust::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPipeline;
  }
  return kExitOk;
}
