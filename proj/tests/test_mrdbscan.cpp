#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "postclust/error.hpp"
#include "postclust/mrdbscan.hpp"
#include "postclust/rng.hpp"
#include "postclust/vectorize.hpp"

using namespace postclust;

namespace {

Eigen::MatrixXd uniform_box(Index n, std::vector<double> widths, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, static_cast<Index>(widths.size()));
  for (Index i = 0; i < n; ++i)
    for (Index d = 0; d < m.cols(); ++d) m(i, d) = rng.uniform() * widths[static_cast<std::size_t>(d)];
  return m;
}

// Gaussian-ish blobs plus background noise in the plane.
Eigen::MatrixXd blobs(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(n, 2);
  const double centers[4][2] = {{2, 2}, {8, 3}, {5, 8}, {9, 9}};
  for (Index i = 0; i < n; ++i) {
    if (rng.bernoulli(0.15)) {
      m(i, 0) = rng.uniform() * 11;
      m(i, 1) = rng.uniform() * 11;
      continue;
    }
    const auto c = rng.uniform_index(4);
    double dx = 0, dy = 0;
    for (int k = 0; k < 6; ++k) {
      dx += rng.uniform() - 0.5;
      dy += rng.uniform() - 0.5;
    }
    m(i, 0) = centers[c][0] + dx;
    m(i, 1) = centers[c][1] + dy;
  }
  return m;
}

std::vector<MergeCandidate> random_candidates(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<MergeCandidate> out;
  for (std::size_t i = 0; i < n; ++i) {
    MergeCandidate c;
    c.point_id = static_cast<Index>(rng.uniform_index(15));
    c.local_cluster = {static_cast<std::int32_t>(rng.uniform_index(4)), static_cast<std::int32_t>(rng.uniform_index(3))};
    c.kind = rng.bernoulli(0.5) ? CandidateKind::core_in_inner_margin : CandidateKind::ddr_in_outer_margin;
    out.push_back(c);
  }
  return out;
}

// Direct transcription of the nested loop: every core-kind candidate scans
// the remaining border-kind candidates and removes those on its point.
MappingProfile nested_loop_profile(const std::vector<MergeCandidate>& all) {
  std::vector<MergeCandidate> cp, bp;
  for (const auto& c : all) (c.kind == CandidateKind::core_in_inner_margin ? cp : bp).push_back(c);
  MappingProfile mp;
  for (const auto& c : cp) {
    for (auto it = bp.begin(); it != bp.end();) {
      if (it->point_id == c.point_id) {
        if (c.local_cluster != it->local_cluster)
          mp.merge_pairs.insert(std::minmax(c.local_cluster, it->local_cluster));
        it = bp.erase(it);
      } else {
        ++it;
      }
    }
  }
  mp.residual_border_points = bp;
  return mp;
}

}  // namespace

TEST_CASE("partition of a small input is a single region") {
  const SparseRows rows = SparseRows::from_dense(uniform_box(50, {10, 10}, 1));
  const auto parts = partition(rows, 0.5, 100);
  REQUIRE(parts.size() == 1);
  CHECK(parts[0].core_points.size() == 50);
  CHECK(parts[0].outer_margin_points.empty());
  CHECK(parts[0].bounds.empty());
  CHECK_THROWS_AS(partition(rows, 0.5, 0), ArgumentError);
  CHECK_THROWS_AS(partition(rows, 0.0, 10), ArgumentError);
}

TEST_CASE("partition regions are disjoint, covering and carry complete margins") {
  const Eigen::MatrixXd dense = uniform_box(1000, {100, 1}, 2);
  const SparseRows rows = SparseRows::from_dense(dense);
  const double eps = 1.0;
  const auto parts = partition(rows, eps, 250);
  CHECK(parts.size() >= 4);

  std::vector<int> owner(1000, -1);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    CHECK(parts[k].id == static_cast<std::int32_t>(k));
    CHECK(std::is_sorted(parts[k].core_points.begin(), parts[k].core_points.end()));
    CHECK(parts[k].inner_margin_width == eps);
    CHECK(parts[k].outer_margin_width == eps);
    for (const auto& b : parts[k].bounds) CHECK(b.extent() >= 4 * eps);
    for (Index p : parts[k].core_points) {
      CHECK(owner[p] == -1);
      owner[p] = static_cast<int>(k);
    }
  }
  CHECK(std::count(owner.begin(), owner.end(), -1) == 0);

  // Every neighbor of a resident point is either resident or in the margin.
  for (const auto& part : parts) {
    const std::set<Index> home(part.core_points.begin(), part.core_points.end());
    const std::set<Index> margin(part.outer_margin_points.begin(), part.outer_margin_points.end());
    for (Index m : margin) CHECK_FALSE(home.count(m));
    for (Index p : part.core_points)
      for (Index q = 0; q < 1000; ++q)
        if (!home.count(q) && (dense.row(p) - dense.row(q)).norm() <= eps) CHECK(margin.count(q));
  }
}

TEST_CASE("partition is deterministic") {
  const SparseRows rows = SparseRows::from_dense(uniform_box(600, {20, 20, 5}, 3));
  const auto a = partition(rows, 0.5, 60);
  const auto b = partition(rows, 0.5, 60);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].core_points == b[k].core_points);
    CHECK(a[k].outer_margin_points == b[k].outer_margin_points);
  }
}

TEST_CASE("radius large relative to the data prevents splitting") {
  const SparseRows rows = SparseRows::from_dense(uniform_box(400, {3, 3}, 4));
  CHECK(partition(rows, 1.0, 10).size() == 1);
}

TEST_CASE("local clustering of a region away from any split has no candidates") {
  const SparseRows rows = SparseRows::from_dense(blobs(300, 5));
  Partition whole;
  for (Index i = 0; i < 300; ++i) whole.core_points.push_back(i);
  whole.inner_margin_width = whole.outer_margin_width = 0.4;
  const DbscanParams params{0.4, 5};
  const LocalClustering local = local_dbscan(whole, rows, params);
  CHECK(local.candidates.empty());
  const auto reference = dbscan(rows, params);
  CHECK(local.labels == reference.labels);
  CHECK(local.kinds == reference.kinds);
  CHECK(local.n_clusters == reference.n_clusters);
}

TEST_CASE("local clustering of a region next to a split face") {
  // x:   7    8    8.9  9.5  10.4 10.9 12   2
  // id:  0    1    2    3    4    5    6    7
  // The region is x < 10 with a split face at 10; 4 and 5 lie in its outer
  // margin, 6 lies beyond it.
  Eigen::MatrixXd m(8, 1);
  m << 7, 8, 8.9, 9.5, 10.4, 10.9, 12, 2;
  const SparseRows rows = SparseRows::from_dense(m);
  Partition part;
  part.id = 3;
  part.bounds = {Interval{0, 2.0, 10.0, false, true}};
  part.core_points = {0, 1, 2, 3, 7};
  part.outer_margin_points = {4, 5};
  part.inner_margin_width = part.outer_margin_width = 1.0;

  CHECK(part.in_inner_margin(rows.row(3)));
  CHECK_FALSE(part.in_inner_margin(rows.row(2)));

  const LocalClustering local = local_dbscan(part, rows, DbscanParams{1.0, 3});
  CHECK(local.partition_id == 3);
  CHECK(local.n_clusters == 1);
  CHECK(local.points == std::vector<Index>{0, 1, 2, 3, 7});
  CHECK(local.labels == std::vector<std::int32_t>{0, 0, 0, 0, kNoise});
  CHECK(local.kinds ==
        std::vector<PointKind>{PointKind::border, PointKind::core, PointKind::core, PointKind::core, PointKind::noise});
  CHECK(local.adjacent_clusters[0] == std::vector<std::int32_t>{0});
  CHECK(local.adjacent_clusters[4].empty());
  CHECK(local.margin_labels == std::vector<std::int32_t>{0, kNoise});
  const std::vector<MergeCandidate> expected = {{3, {3, 0}, CandidateKind::core_in_inner_margin},
                                                {4, {3, 0}, CandidateKind::ddr_in_outer_margin}};
  CHECK(local.candidates == expected);
}

TEST_CASE("local clustering of an empty region") {
  const SparseRows rows = SparseRows::from_dense(Eigen::MatrixXd::Zero(3, 2));
  const LocalClustering local = local_dbscan(Partition{}, rows, DbscanParams{0.1, 2});
  CHECK(local.n_clusters == 0);
  CHECK(local.points.empty());
  CHECK(local.candidates.empty());
}

TEST_CASE("mapping profile: core point reachable across a face merges the clusters") {
  // d2 is core in the inner margin of its own region (cluster C2) and is
  // reached from d1 in C1 through the neighboring region's outer margin.
  const LocalClusterId c1{0, 0}, c2{1, 0};
  const std::vector<MergeCandidate> cands = {{42, c2, CandidateKind::core_in_inner_margin},
                                             {42, c1, CandidateKind::ddr_in_outer_margin}};
  const auto mp = build_mapping_profile(cands);
  CHECK(mp.merge_pairs == std::set<std::pair<LocalClusterId, LocalClusterId>>{{c1, c2}});
  CHECK(mp.residual_border_points.empty());
}

TEST_CASE("mapping profile: a border point does not merge the clusters") {
  const LocalClusterId c1{0, 0};
  const std::vector<MergeCandidate> cands = {{9, c1, CandidateKind::core_in_inner_margin},
                                             {17, c1, CandidateKind::ddr_in_outer_margin}};
  const auto mp = build_mapping_profile(cands);
  CHECK(mp.merge_pairs.empty());
  REQUIRE(mp.residual_border_points.size() == 1);
  CHECK(mp.residual_border_points[0].point_id == 17);
}

TEST_CASE("mapping profile agrees with the nested loop on random lists") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto cands = random_candidates(seed % 40, seed);
    const auto got = build_mapping_profile(cands);
    const auto want = nested_loop_profile(cands);
    CHECK(got.merge_pairs == want.merge_pairs);
    CHECK(got.residual_border_points == want.residual_border_points);
  }
  const auto empty = build_mapping_profile({});
  CHECK(empty.merge_pairs.empty());
  CHECK(empty.residual_border_points.empty());
}

TEST_CASE("global id map follows merges transitively") {
  const LocalClusterId a{0, 0}, b{1, 0}, c{2, 0}, d{3, 0}, e{3, 1};
  MappingProfile mp;
  mp.merge_pairs = {{a, b}, {c, d}, {b, c}};
  const std::vector<LocalClusterId> ids = {a, b, c, d, e};
  const auto map = build_global_id_map(mp, ids);
  CHECK(map.n_global == 2);
  for (const auto& id : {a, b, c, d}) CHECK(map.at(id) == 0);
  CHECK(map.at(e) == 1);
  CHECK_THROWS_AS(map.at(LocalClusterId{9, 9}), LookupError);
}

TEST_CASE("global id map without merges numbers local ids in order") {
  const std::vector<LocalClusterId> ids = {{0, 0}, {0, 1}, {1, 0}, {2, 0}};
  const auto map = build_global_id_map(MappingProfile{}, ids);
  CHECK(map.n_global == 4);
  for (std::size_t k = 0; k < ids.size(); ++k) CHECK(map.at(ids[k]) == static_cast<std::int32_t>(k));
}

TEST_CASE("global id map matches union-find components") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    std::vector<LocalClusterId> ids;
    for (std::int32_t i = 0; i < 50; ++i) ids.push_back({i / 5, i % 5});
    MappingProfile mp;
    const std::size_t n_pairs = rng.uniform_index(60);
    for (std::size_t k = 0; k < n_pairs; ++k) {
      const auto x = rng.uniform_index(50), y = rng.uniform_index(50);
      if (x != y) mp.merge_pairs.insert(std::minmax(ids[x], ids[y]));
    }
    std::vector<std::size_t> parent(50);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    auto index_of = [&](const LocalClusterId& id) { return static_cast<std::size_t>(id.partition_id * 5 + id.local_id); };
    for (const auto& [x, y] : mp.merge_pairs) parent[std::max(find(index_of(x)), find(index_of(y)))] = std::min(find(index_of(x)), find(index_of(y)));
    // Roots are each component's smallest member, so ranking roots in order
    // gives the expected numbering.
    std::vector<std::int32_t> rank(50, -1);
    std::int32_t next = 0;
    for (std::size_t v = 0; v < 50; ++v)
      if (find(v) == v) rank[v] = next++;
    const auto map = build_global_id_map(mp, ids);
    CHECK(map.n_global == next);
    for (std::size_t v = 0; v < 50; ++v) CHECK(map.at(ids[v]) == rank[find(v)]);
  }
}

TEST_CASE("one partition reproduces dbscan") {
  const SparseRows rows = SparseRows::from_dense(blobs(400, 6));
  const DbscanParams params{0.35, 6};
  const auto mr = mr_dbscan(rows, params, 1000, 2);
  CHECK(mr.timings.n_partitions == 1);
  CHECK(mr.assignment == dbscan(rows, params));
}

TEST_CASE("many partitions reproduce dbscan exactly") {
  for (std::uint64_t seed : {7u, 8u, 9u, 10u}) {
    const SparseRows rows = SparseRows::from_dense(blobs(800, seed));
    for (double eps : {0.2, 0.35, 0.6}) {
      for (std::size_t mp : {3u, 6u, 12u}) {
        const DbscanParams params{eps, mp};
        const auto reference = dbscan(rows, params);
        for (std::size_t max_points : {25u, 80u}) {
          const auto mr = mr_dbscan(rows, params, max_points, 2);
          CHECK(mr.timings.n_partitions > 1);
          CHECK(mr.assignment == reference);
        }
      }
    }
  }
}

TEST_CASE("result does not depend on the worker count") {
  const SparseRows rows = SparseRows::from_dense(blobs(600, 11));
  const DbscanParams params{0.3, 5};
  const auto one = mr_dbscan(rows, params, 40, 1);
  for (std::size_t workers : {2u, 8u}) CHECK(mr_dbscan(rows, params, 40, workers).assignment == one.assignment);
  CHECK_THROWS_AS(mr_dbscan(rows, params, 40, 0), ArgumentError);
}

TEST_CASE("high-dimensional tf-idf rows reproduce dbscan") {
  const Corpus corpus = generate_synthetic(600, 4, 21);
  const TfIdfMatrix m = FeaturePipeline::defaults().featurize(corpus);
  for (double eps : {0.05, 0.5, 0.9}) {
    for (Metric metric : {Metric::euclidean, Metric::cosine}) {
      const DbscanParams params{eps, 4, metric};
      const auto mr = mr_dbscan(m.rows, params, 50, 3);
      CHECK(mr.assignment == dbscan(m.rows, params));
    }
  }
}

TEST_CASE("a dense blob straddling split faces stays one cluster") {
  // 401 evenly spaced points on a segment of length 100.
  Eigen::MatrixXd m(401, 2);
  for (Index i = 0; i < 401; ++i) {
    m(i, 0) = 0.25 * i;
    m(i, 1) = 0.0;
  }
  const SparseRows rows = SparseRows::from_dense(m);
  const DbscanParams params{1.0, 3};
  std::set<std::size_t> seen_partition_counts;
  for (std::size_t max_points : {201u, 200u, 134u}) {
    const auto mr = mr_dbscan(rows, params, max_points, 2);
    seen_partition_counts.insert(mr.timings.n_partitions);
    CHECK(mr.assignment.n_clusters == 1);
    CHECK(std::count(mr.assignment.labels.begin(), mr.assignment.labels.end(), 0) == 401);
  }
  CHECK(seen_partition_counts == std::set<std::size_t>{2, 3, 4});
}

TEST_CASE("step timings add up and round-trip through json") {
  const SparseRows rows = SparseRows::from_dense(blobs(500, 12));
  const auto mr = mr_dbscan(rows, DbscanParams{0.3, 5}, 50, 2);
  const auto& t = mr.timings;
  CHECK(t.partition_s >= 0.0);
  CHECK(t.local_dbscan_s >= 0.0);
  CHECK(t.map_s >= 0.0);
  CHECK(t.merge_s >= 0.0);
  CHECK(t.partition_s + t.local_dbscan_s + t.map_s + t.merge_s <= t.total_s + 1e-9);
  CHECK(t.n_partitions == mr.partitions.size());
  const auto back = StepTimings::from_json(t.to_json());
  CHECK(back.partition_s == t.partition_s);
  CHECK(back.total_s == t.total_s);
  CHECK(back.n_partitions == t.n_partitions);
  CHECK_THROWS_AS(StepTimings::from_json("{\"partition_s\": 1}"), ParseError);
}

TEST_CASE("default partition capacity") {
  CHECK(default_max_points(1000, 4) == 63);
  CHECK(default_max_points(16, 4) == 1);
  CHECK(default_max_points(0, 4) == 1);
}

TEST_CASE("expired deadline cancels the run") {
  const SparseRows rows = SparseRows::from_dense(blobs(2000, 13));
  CHECK_THROWS_AS(mr_dbscan(rows, DbscanParams{0.3, 5}, 100, 2, Deadline::after(-1.0)), Cancelled);
}
