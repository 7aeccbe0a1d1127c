#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "postclust/dbscan.hpp"
#include "postclust/deadline.hpp"
#include "postclust/sparse_rows.hpp"

namespace postclust {

/// Added to margin widths so margin sets never miss a neighbor that the
/// distance kernel reports within the radius after rounding.
inline constexpr double kMarginSlack = 1e-7;

/// Extent of a partition along one split dimension. Points with
/// lo <= x < hi belong to it (hi inclusive when it is the data maximum).
/// `lo_split` / `hi_split` mark faces created by a split, i.e. faces with a
/// neighboring partition on the other side.
struct Interval {
  Index dim = 0;
  double lo = 0.0;
  double hi = 0.0;
  bool lo_split = false;
  bool hi_split = false;

  double extent() const { return hi - lo; }
};

/// Axis-aligned region of feature space plus its resident points. Only
/// dimensions that were split on carry an interval; every other dimension
/// spans the full data range.
struct Partition {
  std::int32_t id = 0;
  std::vector<Interval> bounds;
  std::vector<Index> core_points;          // points inside the region, ascending
  std::vector<Index> outer_margin_points;  // points outside, within the outer margin of the region
  double inner_margin_width = 0.0;
  double outer_margin_width = 0.0;

  /// True when x lies inside the region and within the inner margin of a
  /// split face. `slack` widens the strip to absorb rounding in distances.
  bool in_inner_margin(const RowView& x, double slack = 0.0) const;
};

/// Recursive binary space partitioning. Each step splits along the
/// dimension of greatest point spread that admits a split, evaluating every split position on an
/// epsilon-spaced grid across the region and taking the one with the most
/// balanced point counts, |n1 - (n1 + n2) / 2|. A child region must stay at
/// least 4 * epsilon wide. Recursion stops at <= max_points points or when no
/// admissible split separates the points. Partition ids follow depth-first,
/// left-first leaf order.
std::vector<Partition> partition(const SparseRows& rows, double epsilon, std::size_t max_points,
                                 const Deadline& deadline = {});

/// (partitionID, localclusterID)
struct LocalClusterId {
  std::int32_t partition_id = 0;
  std::int32_t local_id = 0;

  auto operator<=>(const LocalClusterId&) const = default;
};

enum class CandidateKind : std::uint8_t { core_in_inner_margin, ddr_in_outer_margin };

struct MergeCandidate {
  Index point_id = 0;
  LocalClusterId local_cluster;
  CandidateKind kind = CandidateKind::core_in_inner_margin;

  bool operator==(const MergeCandidate&) const = default;
};

/// Output of DBSCAN over one partition's core and outer-margin points.
/// Expansion is seeded only from core-region points; outer-margin points are
/// reached as neighbors but never expanded, since their neighborhoods are
/// incomplete here.
struct LocalClustering {
  std::int32_t partition_id = 0;
  std::int32_t n_clusters = 0;

  std::vector<Index> points;          // core-region points, ascending
  std::vector<PointKind> kinds;       // exact: neighborhoods of these points are complete
  std::vector<std::int32_t> labels;   // first local cluster to reach the point, or kNoise
  /// Local clusters owning a core neighbor of each non-core point, ascending.
  std::vector<std::vector<std::int32_t>> adjacent_clusters;

  std::vector<Index> margin_points;
  std::vector<std::int32_t> margin_labels;  // first local cluster to reach the point, or kNoise

  std::vector<MergeCandidate> candidates;  // sorted by (point, cluster, kind)
};

LocalClustering local_dbscan(const Partition& part, const SparseRows& rows, const DbscanParams& params,
                             const Deadline& deadline = {});

/// Pairs of local clusters that are one global cluster, plus the
/// border-kind candidates no core-kind candidate claimed.
struct MappingProfile {
  std::set<std::pair<LocalClusterId, LocalClusterId>> merge_pairs;  // first < second
  std::vector<MergeCandidate> residual_border_points;
};

/// For every core-kind candidate cp and border-kind candidate bp on the same
/// point, records the pair (cp.cluster, bp.cluster) and consumes bp.
MappingProfile build_mapping_profile(std::span<const MergeCandidate> candidates);

struct GlobalIdMap {
  std::map<LocalClusterId, std::int32_t> slots;
  std::int32_t n_global = 0;

  std::int32_t at(const LocalClusterId& id) const;
};

/// Groups local IDs into map slots: unseen pairs open a slot, a pair with one
/// seen member joins its slot, and a pair bridging two slots moves the
/// higher-index slot into the lower-index one. Unreferenced local IDs get
/// singleton slots. Slots are numbered 0..G-1 by smallest member.
GlobalIdMap build_global_id_map(const MappingProfile& profile, std::span<const LocalClusterId> all_local_ids);

/// Final labels from the per-partition results. Cluster IDs are renumbered
/// by smallest core point index, and each non-core point joins, among the
/// clusters owning one of its core neighbors in any partition, the one with
/// the smallest core index (the order sequential DBSCAN creates them in).
/// Points that were noise locally but carry margin evidence become border
/// points here.
ClusterAssignment merge_local_results(std::size_t n_points, std::span<const LocalClustering> locals,
                                      const MappingProfile& profile, const GlobalIdMap& id_map);

/// Wall time per step, in seconds.
struct StepTimings {
  double partition_s = 0.0;
  double local_dbscan_s = 0.0;
  double map_s = 0.0;
  double merge_s = 0.0;
  double total_s = 0.0;
  std::size_t n_partitions = 0;

  /// {"partition_s":…, "local_dbscan_s":…, "map_s":…, "merge_s":…, "total_s":…, "n_partitions":…}
  std::string to_json() const;
  static StepTimings from_json(const std::string& text);
};

struct MrDbscanResult {
  ClusterAssignment assignment;
  StepTimings timings;
  std::vector<Partition> partitions;
};

/// max_points = 0 picks ceil(n / (4 * workers)).
std::size_t default_max_points(std::size_t n_points, std::size_t workers);

/// Partition, local DBSCAN on `workers` threads, mapping profile, merge.
/// The result is identical for any worker count and equals dbscan() on the
/// same input.
MrDbscanResult mr_dbscan(const SparseRows& rows, const DbscanParams& params, std::size_t max_points,
                         std::size_t workers, const Deadline& deadline = {});

}  // namespace postclust
