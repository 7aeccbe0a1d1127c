#include "postclust/mrdbscan.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include "json.hpp"
#include <thread>

#include "postclust/error.hpp"

namespace postclust {

LocalClustering local_dbscan(const Partition& part, const SparseRows& rows, const DbscanParams& params,
                             const Deadline& deadline) {
  params.validate();
  const double radius = params.radius();

  // Local positions: home points first (0..h-1), then margin points.
  const std::vector<Index>& home = part.core_points;
  const std::vector<Index>& margin = part.outer_margin_points;
  const std::size_t h = home.size();
  const std::size_t m = margin.size();
  std::vector<Index> ext(home);
  ext.insert(ext.end(), margin.begin(), margin.end());

  LocalClustering out;
  out.partition_id = part.id;
  out.points = home;
  out.kinds.assign(h, PointKind::noise);
  out.labels.assign(h, kNoise);
  out.adjacent_clusters.assign(h, {});
  out.margin_points = margin;
  out.margin_labels.assign(m, kNoise);

  std::vector<bool> queried(h, false);
  std::vector<std::vector<std::uint32_t>> small_neighborhoods(h);
  std::vector<std::int32_t> last_reach(m, kNoise);
  std::vector<std::pair<std::uint32_t, std::int32_t>> margin_reach;  // (margin position, cluster)

  DistanceProbe probe(rows);
  std::vector<std::uint32_t> neighbors;
  std::size_t queries = 0;
  auto query = [&](std::uint32_t p) {
    if ((++queries & 63) == 0) deadline.check();
    probe.load(ext[p]);
    neighbors.clear();
    for (std::uint32_t q = 0; q < ext.size(); ++q)
      if (probe.within(ext[q], radius)) neighbors.push_back(q);
    queried[p] = true;
    const bool core = neighbors.size() >= params.min_points;
    if (core)
      out.kinds[p] = PointKind::core;
    else
      small_neighborhoods[p] = neighbors;
    return core;
  };

  std::vector<std::uint32_t> frontier;
  auto visit_margin = [&](std::uint32_t q, std::int32_t cluster) {
    const std::size_t mi = q - h;
    if (last_reach[mi] == cluster) return;
    last_reach[mi] = cluster;
    margin_reach.emplace_back(static_cast<std::uint32_t>(mi), cluster);
    if (out.margin_labels[mi] == kNoise) out.margin_labels[mi] = cluster;
  };

  for (std::uint32_t p = 0; p < h; ++p) {
    if (queried[p]) continue;
    if (!query(p)) continue;
    const std::int32_t cluster = out.n_clusters++;
    out.labels[p] = cluster;
    frontier.assign(neighbors.begin(), neighbors.end());
    while (!frontier.empty()) {
      const std::uint32_t q = frontier.back();
      frontier.pop_back();
      if (q >= h) {
        visit_margin(q, cluster);  // reached, never expanded
        continue;
      }
      if (out.labels[q] != kNoise) continue;
      out.labels[q] = cluster;
      if (queried[q]) {
        out.kinds[q] = PointKind::border;
        continue;
      }
      if (query(q)) {
        for (std::uint32_t r : neighbors)
          if (r >= h ? last_reach[r - h] != cluster : out.labels[r] == kNoise) frontier.push_back(r);
      } else {
        out.kinds[q] = PointKind::border;
      }
    }
  }

  for (std::size_t p = 0; p < h; ++p) {
    if (out.kinds[p] == PointKind::core) continue;
    auto& adj = out.adjacent_clusters[p];
    for (std::uint32_t q : small_neighborhoods[p])
      if (q < h && out.kinds[q] == PointKind::core) adj.push_back(out.labels[q]);
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }

  for (std::size_t p = 0; p < h; ++p)
    if (out.kinds[p] == PointKind::core && part.in_inner_margin(rows.row(home[p]), kMarginSlack))
      out.candidates.push_back({home[p], {part.id, out.labels[p]}, CandidateKind::core_in_inner_margin});
  for (const auto& [mi, cluster] : margin_reach)
    out.candidates.push_back({margin[mi], {part.id, cluster}, CandidateKind::ddr_in_outer_margin});
  std::sort(out.candidates.begin(), out.candidates.end(), [](const MergeCandidate& a, const MergeCandidate& b) {
    return std::tie(a.point_id, a.local_cluster, a.kind) < std::tie(b.point_id, b.local_cluster, b.kind);
  });
  return out;
}

MappingProfile build_mapping_profile(std::span<const MergeCandidate> candidates) {
  // Grouping by point turns the all-pairs scan into a join. Each border-kind
  // candidate pairs with the first core-kind candidate on its point, in input
  // order, and is then consumed.
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return candidates[a].point_id < candidates[b].point_id; });

  MappingProfile profile;
  std::vector<std::size_t> residual;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    const MergeCandidate* first_core = nullptr;
    while (j < order.size() && candidates[order[j]].point_id == candidates[order[i]].point_id) {
      const MergeCandidate& c = candidates[order[j]];
      if (c.kind == CandidateKind::core_in_inner_margin && !first_core) first_core = &c;
      ++j;
    }
    for (std::size_t k = i; k < j; ++k) {
      const MergeCandidate& c = candidates[order[k]];
      if (c.kind != CandidateKind::ddr_in_outer_margin) continue;
      if (!first_core) {
        residual.push_back(order[k]);
        continue;
      }
      if (first_core->local_cluster == c.local_cluster) continue;
      profile.merge_pairs.insert(std::minmax(first_core->local_cluster, c.local_cluster));
    }
    i = j;
  }
  std::sort(residual.begin(), residual.end());
  for (std::size_t k : residual) profile.residual_border_points.push_back(candidates[k]);
  return profile;
}

std::int32_t GlobalIdMap::at(const LocalClusterId& id) const {
  auto it = slots.find(id);
  if (it == slots.end())
    throw LookupError("unknown local cluster (" + std::to_string(id.partition_id) + ", " +
                      std::to_string(id.local_id) + ")");
  return it->second;
}

GlobalIdMap build_global_id_map(const MappingProfile& profile, std::span<const LocalClusterId> all_local_ids) {
  // Map slots hold local IDs; a slot emptied by a move stays as a hole.
  std::vector<std::vector<LocalClusterId>> map_slots;
  std::map<LocalClusterId, std::size_t> slot_of;

  for (const auto& [ei, ej] : profile.merge_pairs) {
    if (ei == ej) continue;
    const auto it_i = slot_of.find(ei);
    const auto it_j = slot_of.find(ej);
    const bool in_i = it_i != slot_of.end();
    const bool in_j = it_j != slot_of.end();
    if (!in_i && !in_j) {
      slot_of[ei] = slot_of[ej] = map_slots.size();
      map_slots.push_back({ei, ej});
    } else if (in_i && !in_j) {
      slot_of[ej] = it_i->second;
      map_slots[it_i->second].push_back(ej);
    } else if (!in_i && in_j) {
      slot_of[ei] = it_j->second;
      map_slots[it_j->second].push_back(ei);
    } else if (it_i->second != it_j->second) {
      const std::size_t low = std::min(it_i->second, it_j->second);
      const std::size_t high = std::max(it_i->second, it_j->second);
      for (const LocalClusterId& id : map_slots[high]) slot_of[id] = low;
      map_slots[low].insert(map_slots[low].end(), map_slots[high].begin(), map_slots[high].end());
      map_slots[high].clear();
    }
  }
  for (const LocalClusterId& id : all_local_ids) {
    if (slot_of.count(id)) continue;
    slot_of[id] = map_slots.size();
    map_slots.push_back({id});
  }

  // Number the surviving slots by their smallest member.
  std::vector<std::pair<LocalClusterId, std::size_t>> firsts;
  for (std::size_t s = 0; s < map_slots.size(); ++s)
    if (!map_slots[s].empty()) firsts.emplace_back(*std::min_element(map_slots[s].begin(), map_slots[s].end()), s);
  std::sort(firsts.begin(), firsts.end());
  std::vector<std::int32_t> number(map_slots.size(), -1);
  for (std::size_t k = 0; k < firsts.size(); ++k) number[firsts[k].second] = static_cast<std::int32_t>(k);

  GlobalIdMap map;
  map.n_global = static_cast<std::int32_t>(firsts.size());
  for (const auto& [id, s] : slot_of) map.slots[id] = number[s];
  return map;
}

ClusterAssignment merge_local_results(std::size_t n_points, std::span<const LocalClustering> locals,
                                      const MappingProfile& profile, const GlobalIdMap& id_map) {
  ClusterAssignment out;
  out.labels.assign(n_points, kNoise);
  out.kinds.assign(n_points, PointKind::noise);

  // Smallest core point index per global cluster; global clusters without a
  // core point cannot exist since local clusters are seeded at cores.
  constexpr Index kNone = std::numeric_limits<Index>::max();
  std::vector<Index> min_core(static_cast<std::size_t>(id_map.n_global), kNone);
  for (const LocalClustering& local : locals)
    for (std::size_t k = 0; k < local.points.size(); ++k) {
      if (local.kinds[k] != PointKind::core) continue;
      const auto g = static_cast<std::size_t>(id_map.at({local.partition_id, local.labels[k]}));
      min_core[g] = std::min(min_core[g], local.points[k]);
      out.kinds[static_cast<std::size_t>(local.points[k])] = PointKind::core;
    }

  // Final IDs follow the order of each cluster's smallest core point.
  std::vector<std::int32_t> by_core(min_core.size());
  for (std::size_t g = 0; g < by_core.size(); ++g) by_core[g] = static_cast<std::int32_t>(g);
  std::sort(by_core.begin(), by_core.end(),
            [&](std::int32_t a, std::int32_t b) { return min_core[static_cast<std::size_t>(a)] < min_core[static_cast<std::size_t>(b)]; });
  std::vector<std::int32_t> final_id(min_core.size(), kNoise);
  std::int32_t next = 0;
  for (std::int32_t g : by_core)
    if (min_core[static_cast<std::size_t>(g)] != kNone) final_id[static_cast<std::size_t>(g)] = next++;
  out.n_clusters = next;

  // Non-core points: best (lowest final ID) cluster among all evidence.
  std::vector<std::int32_t> best(n_points, std::numeric_limits<std::int32_t>::max());
  auto offer = [&](Index point, const LocalClusterId& id) {
    const std::int32_t f = final_id[static_cast<std::size_t>(id_map.at(id))];
    auto& b = best[static_cast<std::size_t>(point)];
    if (f != kNoise) b = std::min(b, f);
  };
  for (const LocalClustering& local : locals)
    for (std::size_t k = 0; k < local.points.size(); ++k) {
      const auto pi = static_cast<std::size_t>(local.points[k]);
      if (local.kinds[k] == PointKind::core) {
        out.labels[pi] = final_id[static_cast<std::size_t>(id_map.at({local.partition_id, local.labels[k]}))];
        continue;
      }
      for (std::int32_t c : local.adjacent_clusters[k]) offer(local.points[k], {local.partition_id, c});
    }
  for (const MergeCandidate& bp : profile.residual_border_points)
    if (out.kinds[static_cast<std::size_t>(bp.point_id)] != PointKind::core) offer(bp.point_id, bp.local_cluster);

  for (std::size_t p = 0; p < n_points; ++p) {
    if (out.kinds[p] == PointKind::core || best[p] == std::numeric_limits<std::int32_t>::max()) continue;
    out.labels[p] = best[p];
    out.kinds[p] = PointKind::border;
  }
  return out;
}

std::string StepTimings::to_json() const {
  nlohmann::ordered_json j;
  j["partition_s"] = partition_s;
  j["local_dbscan_s"] = local_dbscan_s;
  j["map_s"] = map_s;
  j["merge_s"] = merge_s;
  j["total_s"] = total_s;
  j["n_partitions"] = n_partitions;
  return j.dump();
}

StepTimings StepTimings::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    StepTimings t;
    t.partition_s = j.at("partition_s").get<double>();
    t.local_dbscan_s = j.at("local_dbscan_s").get<double>();
    t.map_s = j.at("map_s").get<double>();
    t.merge_s = j.at("merge_s").get<double>();
    t.total_s = j.at("total_s").get<double>();
    t.n_partitions = j.at("n_partitions").get<std::size_t>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("timings", 1, e.what());
  }
}

std::size_t default_max_points(std::size_t n_points, std::size_t workers) {
  const std::size_t denom = 4 * std::max<std::size_t>(workers, 1);
  return std::max<std::size_t>(1, (n_points + denom - 1) / denom);
}

namespace {

// Runs `task(i)` for i in [0, count) on `workers` threads. The first
// exception thrown by any task is rethrown after all threads finish.
template <typename Task>
void parallel_for(std::size_t count, std::size_t workers, Task task) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  const std::size_t n_threads = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(count, 1));
  std::vector<std::jthread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  threads.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace

MrDbscanResult mr_dbscan(const SparseRows& rows, const DbscanParams& params, std::size_t max_points,
                         std::size_t workers, const Deadline& deadline) {
  params.validate();
  if (workers < 1) throw ArgumentError("workers must be at least 1");
  const auto n = static_cast<std::size_t>(rows.size());
  if (max_points == 0) max_points = default_max_points(n, workers);

  MrDbscanResult result;
  const Stopwatch total;

  Stopwatch step;
  result.partitions = partition(rows, params.radius(), max_points, deadline);
  result.timings.partition_s = step.seconds();
  result.timings.n_partitions = result.partitions.size();

  step = Stopwatch();
  std::vector<LocalClustering> locals(result.partitions.size());
  parallel_for(locals.size(), workers,
               [&](std::size_t i) { locals[i] = local_dbscan(result.partitions[i], rows, params, deadline); });
  result.timings.local_dbscan_s = step.seconds();

  step = Stopwatch();
  std::vector<MergeCandidate> candidates;
  std::vector<LocalClusterId> local_ids;
  for (const LocalClustering& local : locals) {
    candidates.insert(candidates.end(), local.candidates.begin(), local.candidates.end());
    for (std::int32_t c = 0; c < local.n_clusters; ++c) local_ids.push_back({local.partition_id, c});
  }
  const MappingProfile profile = build_mapping_profile(candidates);
  const GlobalIdMap id_map = build_global_id_map(profile, local_ids);
  result.timings.map_s = step.seconds();

  step = Stopwatch();
  result.assignment = merge_local_results(n, locals, profile, id_map);
  result.timings.merge_s = step.seconds();
  result.timings.total_s = total.seconds();
  return result;
}

}  // namespace postclust
