#include "postclust/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "postclust/error.hpp"

namespace postclust {

namespace {

std::int64_t pairs(std::int64_t n) { return n * (n - 1) / 2; }

}  // namespace

double adjusted_rand_index(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  if (a.size() != b.size())
    throw ArgumentError("labelings differ in length (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                        ")");
  const auto n = static_cast<std::int64_t>(a.size());
  if (n < 2) return 1.0;

  std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> cells;
  std::map<std::int32_t, std::int64_t> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++cells[{a[i], b[i]}];
    ++rows[a[i]];
    ++cols[b[i]];
  }
  std::int64_t index = 0, sum_a = 0, sum_b = 0;
  for (const auto& [_, c] : cells) index += pairs(c);
  for (const auto& [_, c] : rows) sum_a += pairs(c);
  for (const auto& [_, c] : cols) sum_b += pairs(c);

  const double total = static_cast<double>(pairs(n));
  const double expected = static_cast<double>(sum_a) * static_cast<double>(sum_b) / total;
  const double max_index = (static_cast<double>(sum_a) + static_cast<double>(sum_b)) / 2.0;
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (static_cast<double>(index) - expected) / denom;
}

double adjusted_rand_index(const ClusterAssignment& a, const ClusterAssignment& b) {
  return adjusted_rand_index(a.labels, b.labels);
}

std::vector<GridPoint> default_grid() {
  std::vector<GridPoint> grid;
  for (double eps : {1e-3, 1e-2, 1e-1})
    for (std::size_t m : {5u, 50u, 100u}) grid.push_back({eps, m});
  return grid;
}

std::string AriReport::to_json() const {
  nlohmann::ordered_json j;
  j["epsilon"] = epsilon;
  j["m_pts"] = min_points;
  j["ari"] = ari;
  j["labels_a"] = labels_a;
  j["labels_b"] = labels_b;
  j["coverage_a"] = coverage_a;
  j["coverage_b"] = coverage_b;
  j["n_partitions"] = n_partitions;
  if (!error.empty()) j["error"] = error;
  return j.dump();
}

AriReport AriReport::from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    AriReport r;
    r.epsilon = j.at("epsilon").get<double>();
    r.min_points = j.at("m_pts").get<std::size_t>();
    r.ari = j.at("ari").get<double>();
    r.labels_a = j.at("labels_a").get<std::int32_t>();
    r.labels_b = j.at("labels_b").get<std::int32_t>();
    r.coverage_a = j.at("coverage_a").get<double>();
    r.coverage_b = j.at("coverage_b").get<double>();
    r.n_partitions = j.at("n_partitions").get<std::size_t>();
    r.error = j.value("error", std::string());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("ari report", 1, e.what());
  }
}

std::vector<AriReport> run_verification_suite(const SparseRows& rows, std::span<const GridPoint> grid,
                                              const VerifyOptions& options) {
  if (grid.empty()) throw UsageError("verification grid is empty");
  std::vector<AriReport> out;
  for (const GridPoint& g : grid) {
    AriReport r;
    r.epsilon = g.epsilon;
    r.min_points = g.min_points;
    try {
      const DbscanParams params{g.epsilon, g.min_points, options.metric};
      const ClusterAssignment a = dbscan(rows, params);
      MrDbscanResult b = mr_dbscan(rows, params, options.max_points, options.workers);
      if (options.inject_fault && !b.assignment.labels.empty()) {
        auto& l = b.assignment.labels.front();
        l = l == kNoise ? b.assignment.n_clusters++ : kNoise;
      }
      r.ari = adjusted_rand_index(a, b.assignment);
      r.labels_a = a.n_clusters;
      r.labels_b = b.assignment.n_clusters;
      r.coverage_a = coverage_percent(a);
      r.coverage_b = coverage_percent(b.assignment);
      r.n_partitions = b.timings.n_partitions;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<AriReport> run_verification_suite(const Corpus& corpus, std::span<const GridPoint> grid,
                                              const FeaturePipeline& pipeline, const VerifyOptions& options) {
  if (grid.empty()) throw UsageError("verification grid is empty");
  const TfIdfMatrix matrix = pipeline.featurize(corpus);
  return run_verification_suite(matrix.rows, grid, options);
}

std::string_view to_string(Algorithm algorithm) { return algorithm == Algorithm::dbscan ? "dbscan" : "mr_dbscan"; }

std::string BenchRecord::to_json() const {
  nlohmann::ordered_json j;
  j["n_posts"] = n_posts;
  j["epsilon"] = epsilon;
  j["m_pts"] = min_points;
  j["algorithm"] = std::string(to_string(algorithm));
  j["timings"] = nlohmann::ordered_json::parse(timings.to_json());
  j["discontinued"] = discontinued;
  return j.dump();
}

StepTimings median_timings(std::span<const StepTimings> runs) {
  StepTimings out;
  if (runs.empty()) return out;
  auto median = [&](double StepTimings::*field) {
    std::vector<double> v;
    for (const StepTimings& t : runs) v.push_back(t.*field);
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
  };
  out.partition_s = median(&StepTimings::partition_s);
  out.local_dbscan_s = median(&StepTimings::local_dbscan_s);
  out.map_s = median(&StepTimings::map_s);
  out.merge_s = median(&StepTimings::merge_s);
  out.total_s = median(&StepTimings::total_s);
  out.n_partitions = runs.front().n_partitions;
  return out;
}

namespace {

// Times `run` up to `repeats` times under the budget. Returns false when a
// run was cancelled or overran.
template <typename Run>
bool timed_repeats(std::size_t repeats, double budget_s, std::vector<StepTimings>& runs, Run run) {
  for (std::size_t k = 0; k < std::max<std::size_t>(repeats, 1); ++k) {
    const Deadline deadline = Deadline::after(budget_s);
    try {
      StepTimings t = run(deadline);
      runs.push_back(t);
      if (t.total_s > budget_s) return false;
    } catch (const Cancelled&) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<BenchRecord> run_scaling_bench(std::span<const std::size_t> sizes, const DbscanParams& params,
                                           const FeaturePipeline& pipeline, const BenchOptions& options) {
  params.validate();
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw ArgumentError("bench sizes must be ascending");
  std::vector<BenchRecord> out;
  for (std::size_t n : sizes) {
    const Corpus corpus = generate_synthetic(n, std::min(options.n_topics, n), options.seed);
    const TfIdfMatrix matrix = pipeline.featurize(corpus);

    for (Algorithm algorithm : {Algorithm::dbscan, Algorithm::mr_dbscan}) {
      BenchRecord rec;
      rec.n_posts = n;
      rec.epsilon = params.epsilon;
      rec.min_points = params.min_points;
      rec.algorithm = algorithm;
      std::vector<StepTimings> runs;
      const bool complete = timed_repeats(options.repeats, options.time_budget_s, runs, [&](const Deadline& d) {
        if (algorithm == Algorithm::mr_dbscan)
          return mr_dbscan(matrix.rows, params, options.max_points, options.workers, d).timings;
        const Stopwatch watch;
        dbscan(matrix.rows, params, d);
        StepTimings t;
        t.total_s = t.local_dbscan_s = watch.seconds();
        t.n_partitions = 1;
        return t;
      });
      rec.discontinued = !complete;
      rec.timings = median_timings(runs);
      out.push_back(rec);
    }
  }
  return out;
}

std::vector<BenchRecord> run_epsilon_sweep(const SparseRows& rows, std::span<const double> epsilons,
                                           const DbscanParams& base, const BenchOptions& options) {
  std::vector<BenchRecord> out;
  for (double eps : epsilons) {
    DbscanParams params = base;
    params.epsilon = eps;
    params.validate();
    BenchRecord rec;
    rec.n_posts = static_cast<std::size_t>(rows.size());
    rec.epsilon = eps;
    rec.min_points = params.min_points;
    rec.algorithm = Algorithm::mr_dbscan;
    std::vector<StepTimings> runs;
    rec.discontinued = !timed_repeats(options.repeats, options.time_budget_s, runs, [&](const Deadline& d) {
      return mr_dbscan(rows, params, options.max_points, options.workers, d).timings;
    });
    rec.timings = median_timings(runs);
    out.push_back(rec);
  }
  return out;
}

namespace {

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string align(const std::vector<std::vector<std::string>>& table) {
  std::vector<std::size_t> width;
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], row[c].size());
    }
  std::ostringstream out;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      line += std::string(width[c] - row[c].size(), ' ') + row[c];
    }
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

std::string format_ari_table(std::span<const AriReport> reports) {
  std::vector<std::vector<std::string>> t{{"eps", "m_pts", "ARI", "#L A", "#L B", "%C A", "%C B", "#P", "status"}};
  for (const AriReport& r : reports)
    t.push_back({general(r.epsilon), std::to_string(r.min_points), fixed(r.ari, 6), std::to_string(r.labels_a),
                 std::to_string(r.labels_b), fixed(r.coverage_a, 2), fixed(r.coverage_b, 2),
                 std::to_string(r.n_partitions), r.error.empty() ? (r.ok() ? "ok" : "MISMATCH") : "error: " + r.error});
  return align(t);
}

std::string format_bench_table(std::span<const BenchRecord> records) {
  std::vector<std::vector<std::string>> t{
      {"posts", "eps", "m_pts", "algorithm", "Partition [s]", "DBSCAN [s]", "Map [s]", "Merge [s]", "Total [s]", "#P", ""}};
  for (const BenchRecord& r : records)
    t.push_back({std::to_string(r.n_posts), general(r.epsilon), std::to_string(r.min_points),
                 std::string(to_string(r.algorithm)), fixed(r.timings.partition_s, 3),
                 fixed(r.timings.local_dbscan_s, 3), fixed(r.timings.map_s, 3), fixed(r.timings.merge_s, 3),
                 fixed(r.timings.total_s, 3), std::to_string(r.timings.n_partitions),
                 r.discontinued ? "discontinued" : ""});
  return align(t);
}

}  // namespace postclust
