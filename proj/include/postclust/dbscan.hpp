#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "postclust/deadline.hpp"
#include "postclust/sparse_rows.hpp"

namespace postclust {

inline constexpr std::int32_t kNoise = -1;

enum class PointKind : std::uint8_t { core, border, noise };

std::string_view to_string(PointKind kind);
PointKind parse_point_kind(std::string_view name);

/// Distance between feature rows. `cosine` is 1 - cos(a, b), evaluated on
/// L2-normalized rows as |a - b|^2 / 2, so it reduces to Euclidean search
/// with radius sqrt(2 * epsilon).
enum class Metric { euclidean, cosine };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

struct DbscanParams {
  double epsilon = 0.01;
  std::size_t min_points = 5;
  Metric metric = Metric::euclidean;

  /// Throws ArgumentError unless epsilon > 0 and min_points >= 1.
  void validate() const;

  /// Neighborhood radius in Euclidean feature space.
  double radius() const;
};

/// Per-point labels: cluster IDs 0..n_clusters-1, or kNoise.
struct ClusterAssignment {
  std::vector<std::int32_t> labels;
  std::vector<PointKind> kinds;
  std::int32_t n_clusters = 0;

  std::size_t size() const { return labels.size(); }
  bool operator==(const ClusterAssignment&) const = default;
};

/// Indices q (including p) with dist(p, q) <= epsilon, ascending.
std::vector<Index> region_query(const SparseRows& rows, Index p, double epsilon);

/// Sequential DBSCAN. Points are scanned in index order; a cluster is
/// created at its lowest-index core point and fully expanded before the
/// scan resumes, so cluster IDs follow the order of each cluster's smallest
/// core index and a border point reachable from several clusters joins the
/// one created first.
ClusterAssignment dbscan(const SparseRows& rows, const DbscanParams& params, const Deadline& deadline = {});

/// 100 * (non-noise points) / (all points); 0 for an empty assignment.
double coverage_percent(const ClusterAssignment& assignment);

/// "point_index cluster_label kind" per line, kNoise written as -1.
void write_assignment(const ClusterAssignment& assignment, const std::filesystem::path& path);
ClusterAssignment read_assignment(const std::filesystem::path& path);

}  // namespace postclust
