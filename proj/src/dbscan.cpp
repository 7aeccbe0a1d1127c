#include "postclust/dbscan.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "postclust/error.hpp"

namespace postclust {

std::string_view to_string(PointKind kind) {
  switch (kind) {
    case PointKind::core:
      return "core";
    case PointKind::border:
      return "border";
    case PointKind::noise:
      return "noise";
  }
  return "noise";
}

PointKind parse_point_kind(std::string_view name) {
  if (name == "core") return PointKind::core;
  if (name == "border") return PointKind::border;
  if (name == "noise") return PointKind::noise;
  throw ArgumentError("unknown point kind '" + std::string(name) + "'");
}

std::string_view to_string(Metric metric) { return metric == Metric::cosine ? "cosine" : "euclidean"; }

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine") return Metric::cosine;
  throw UsageError("unknown metric '" + std::string(name) + "' (expected euclidean or cosine)");
}

void DbscanParams::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ArgumentError("epsilon must be positive");
  if (min_points < 1) throw ArgumentError("min_points must be at least 1");
}

double DbscanParams::radius() const { return metric == Metric::cosine ? std::sqrt(2.0 * epsilon) : epsilon; }

std::vector<Index> region_query(const SparseRows& rows, Index p, double epsilon) {
  DistanceProbe probe(rows);
  probe.load(p);
  std::vector<Index> out;
  for (Index q = 0; q < rows.size(); ++q)
    if (probe.within(q, epsilon)) out.push_back(q);
  return out;
}

ClusterAssignment dbscan(const SparseRows& rows, const DbscanParams& params, const Deadline& deadline) {
  params.validate();
  const Index n = rows.size();
  const double radius = params.radius();

  ClusterAssignment out;
  out.labels.assign(static_cast<std::size_t>(n), kNoise);
  out.kinds.assign(static_cast<std::size_t>(n), PointKind::noise);
  std::vector<bool> queried(static_cast<std::size_t>(n), false);

  DistanceProbe probe(rows);
  std::vector<Index> neighbors;
  std::size_t queries = 0;
  // Neighborhood of p into `neighbors`; marks p core or (tentatively) noise.
  auto query = [&](Index p) {
    if ((++queries & 63) == 0) deadline.check();
    probe.load(p);
    neighbors.clear();
    for (Index q = 0; q < n; ++q)
      if (probe.within(q, radius)) neighbors.push_back(q);
    queried[static_cast<std::size_t>(p)] = true;
    const bool core = neighbors.size() >= params.min_points;
    if (core) out.kinds[static_cast<std::size_t>(p)] = PointKind::core;
    return core;
  };

  std::vector<Index> frontier;
  for (Index p = 0; p < n; ++p) {
    const auto pi = static_cast<std::size_t>(p);
    if (queried[pi]) continue;
    if (!query(p)) continue;

    const std::int32_t cluster = out.n_clusters++;
    out.labels[pi] = cluster;
    frontier.assign(neighbors.begin(), neighbors.end());
    while (!frontier.empty()) {
      const Index q = frontier.back();
      frontier.pop_back();
      const auto qi = static_cast<std::size_t>(q);
      if (out.labels[qi] != kNoise) continue;
      out.labels[qi] = cluster;
      if (queried[qi]) {
        out.kinds[qi] = PointKind::border;  // queried earlier as non-core
        continue;
      }
      if (query(q)) {
        for (Index r : neighbors)
          if (out.labels[static_cast<std::size_t>(r)] == kNoise) frontier.push_back(r);
      } else {
        out.kinds[qi] = PointKind::border;
      }
    }
  }
  return out;
}

double coverage_percent(const ClusterAssignment& assignment) {
  if (assignment.labels.empty()) return 0.0;
  std::size_t clustered = 0;
  for (auto l : assignment.labels) clustered += l != kNoise ? 1 : 0;
  return 100.0 * static_cast<double>(clustered) / static_cast<double>(assignment.labels.size());
}

void write_assignment(const ClusterAssignment& assignment, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write assignment file: " + path.string());
  for (std::size_t i = 0; i < assignment.size(); ++i)
    out << i << ' ' << assignment.labels[i] << ' ' << to_string(assignment.kinds[i]) << '\n';
}

ClusterAssignment read_assignment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open assignment file: " + path.string());
  ClusterAssignment out;
  std::string line;
  std::size_t line_no = 0;
  std::int32_t max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t index;
    std::int32_t label;
    std::string kind;
    if (!(fields >> index >> label >> kind) || index != out.size())
      throw ParseError(path.string(), line_no, "expected '<point_index> <cluster_label> <kind>' in order");
    out.labels.push_back(label);
    out.kinds.push_back(parse_point_kind(kind));
    max_label = std::max(max_label, label);
  }
  out.n_clusters = max_label + 1;
  return out;
}

}  // namespace postclust
