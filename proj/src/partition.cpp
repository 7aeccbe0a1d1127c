#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "postclust/error.hpp"
#include "postclust/mrdbscan.hpp"

namespace postclust {

namespace {

struct Node {
  std::vector<Index> home;      // points inside the region, ascending
  std::vector<Index> extended;  // home plus points within the margin, ascending
  std::vector<Interval> bounds;
};

struct Split {
  Index dim = 0;
  double position = 0.0;
};

class Partitioner {
 public:
  Partitioner(const SparseRows& rows, double epsilon, std::size_t max_points, const Deadline& deadline)
      : rows_(rows), epsilon_(epsilon), max_points_(max_points), deadline_(deadline) {
    const auto dims = static_cast<std::size_t>(rows.dims());
    data_lo_.assign(dims, 0.0);
    data_hi_.assign(dims, 0.0);
    node_lo_.resize(dims);
    node_hi_.resize(dims);
    node_count_.resize(dims);
    scan_range(std::vector<Index>(), true);
    data_lo_ = node_lo_;
    data_hi_ = node_hi_;
  }

  std::vector<Partition> run() {
    std::vector<Partition> out;
    Node root;
    root.home.resize(static_cast<std::size_t>(rows_.size()));
    std::iota(root.home.begin(), root.home.end(), Index{0});
    root.extended = root.home;

    // Depth-first, left child first, without recursion.
    std::vector<Node> stack;
    stack.push_back(std::move(root));
    while (!stack.empty()) {
      deadline_.check();
      Node node = std::move(stack.back());
      stack.pop_back();
      Split split;
      if (node.home.size() <= max_points_ || !choose_split(node, split)) {
        out.push_back(make_leaf(std::move(node), static_cast<std::int32_t>(out.size())));
        continue;
      }
      auto [left, right] = divide(node, split);
      stack.push_back(std::move(right));
      stack.push_back(std::move(left));
    }
    return out;
  }

 private:
  // Per-dimension min/max over `points`, counting implicit zeros. With
  // `all` set, scans every row instead.
  void scan_range(const std::vector<Index>& points, bool all) {
    const std::size_t n = all ? static_cast<std::size_t>(rows_.size()) : points.size();
    std::fill(node_lo_.begin(), node_lo_.end(), std::numeric_limits<double>::infinity());
    std::fill(node_hi_.begin(), node_hi_.end(), -std::numeric_limits<double>::infinity());
    std::fill(node_count_.begin(), node_count_.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k) {
      const RowView r = rows_.row(all ? static_cast<Index>(k) : points[k]);
      for (std::size_t j = 0; j < r.indices.size(); ++j) {
        const auto d = static_cast<std::size_t>(r.indices[j]);
        node_lo_[d] = std::min(node_lo_[d], r.values[j]);
        node_hi_[d] = std::max(node_hi_[d], r.values[j]);
        ++node_count_[d];
      }
    }
    for (std::size_t d = 0; d < node_lo_.size(); ++d) {
      if (node_count_[d] < n) {
        node_lo_[d] = std::min(node_lo_[d], 0.0);
        node_hi_[d] = std::max(node_hi_[d], 0.0);
      }
      if (n == 0) node_lo_[d] = node_hi_[d] = 0.0;
    }
  }

  std::pair<double, double> region(const Node& node, Index dim) const {
    for (const Interval& iv : node.bounds)
      if (iv.dim == dim) return {iv.lo, iv.hi};
    return {data_lo_[static_cast<std::size_t>(dim)], data_hi_[static_cast<std::size_t>(dim)]};
  }

  // Split positions lo + k * epsilon leaving both children at least
  // 4 * epsilon wide, restricted to those that separate the node's points.
  std::pair<long, long> candidate_range(double lo, double hi, double min_x, double max_x) const {
    const long first = 4;
    const long last = static_cast<long>(std::floor((hi - lo) / epsilon_)) - 4;
    long k_lo = first;
    long k_hi = last;
    while (k_hi >= k_lo && hi - (lo + static_cast<double>(k_hi) * epsilon_) < 4.0 * epsilon_) --k_hi;
    // Both sides non-empty: min_x < s <= max_x.
    while (k_lo <= k_hi && !(min_x < lo + static_cast<double>(k_lo) * epsilon_)) ++k_lo;
    while (k_hi >= k_lo && !(lo + static_cast<double>(k_hi) * epsilon_ <= max_x)) --k_hi;
    return {k_lo, k_hi};
  }

  bool choose_split(const Node& node, Split& split) {
    scan_range(node.home, false);
    std::vector<Index> order(node_lo_.size());
    std::iota(order.begin(), order.end(), Index{0});
    auto spread = [&](Index d) { return node_hi_[static_cast<std::size_t>(d)] - node_lo_[static_cast<std::size_t>(d)]; };
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return spread(a) > spread(b); });

    for (Index d : order) {
      if (!(spread(d) > 0.0)) break;
      const auto [lo, hi] = region(node, d);
      const auto [k_lo, k_hi] = candidate_range(lo, hi, node_lo_[static_cast<std::size_t>(d)],
                                                node_hi_[static_cast<std::size_t>(d)]);
      if (k_lo > k_hi) continue;

      std::vector<double> xs(node.home.size());
      for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = rows_.row(node.home[i]).coordinate(d);

      // Every candidate is costed with a full pass over the node's points.
      const double half = static_cast<double>(xs.size()) / 2.0;
      double best_cost = std::numeric_limits<double>::infinity();
      double best_s = 0.0;
      for (long k = k_lo; k <= k_hi; ++k) {
        if ((k & 255) == 0) deadline_.check();
        const double s = lo + static_cast<double>(k) * epsilon_;
        std::size_t n1 = 0;
        for (double x : xs) n1 += x < s ? 1 : 0;
        const double cost = std::abs(static_cast<double>(n1) - half);
        if (cost < best_cost) {
          best_cost = cost;
          best_s = s;
        }
      }
      split = {d, best_s};
      return true;
    }
    return false;
  }

  std::pair<Node, Node> divide(const Node& node, const Split& split) const {
    const double w = epsilon_ + kMarginSlack;
    Node left, right;
    for (Index p : node.home) (rows_.row(p).coordinate(split.dim) < split.position ? left : right).home.push_back(p);
    for (Index p : node.extended) {
      const double x = rows_.row(p).coordinate(split.dim);
      if (x < split.position + w) left.extended.push_back(p);
      if (x >= split.position - w) right.extended.push_back(p);
    }

    const auto [lo, hi] = region(node, split.dim);
    left.bounds = right.bounds = node.bounds;
    for (std::vector<Interval>* bounds : {&left.bounds, &right.bounds})
      if (std::none_of(bounds->begin(), bounds->end(), [&](const Interval& iv) { return iv.dim == split.dim; }))
        bounds->push_back(Interval{split.dim, lo, hi, false, false});
    auto set = [&](std::vector<Interval>& bounds, bool is_left) {
      auto it = std::find_if(bounds.begin(), bounds.end(), [&](const Interval& iv) { return iv.dim == split.dim; });
      if (is_left) {
        it->hi = split.position;
        it->hi_split = true;
      } else {
        it->lo = split.position;
        it->lo_split = true;
      }
    };
    set(left.bounds, true);
    set(right.bounds, false);
    return {std::move(left), std::move(right)};
  }

  Partition make_leaf(Node node, std::int32_t id) const {
    Partition part;
    part.id = id;
    part.bounds = std::move(node.bounds);
    part.inner_margin_width = epsilon_;
    part.outer_margin_width = epsilon_;
    std::set_difference(node.extended.begin(), node.extended.end(), node.home.begin(), node.home.end(),
                        std::back_inserter(part.outer_margin_points));
    part.core_points = std::move(node.home);
    return part;
  }

  const SparseRows& rows_;
  double epsilon_;
  std::size_t max_points_;
  const Deadline& deadline_;
  std::vector<double> data_lo_, data_hi_;
  std::vector<double> node_lo_, node_hi_;
  std::vector<std::size_t> node_count_;
};

}  // namespace

bool Partition::in_inner_margin(const RowView& x, double slack) const {
  const double w = inner_margin_width + slack;
  for (const Interval& iv : bounds) {
    const double v = x.coordinate(iv.dim);
    if (iv.lo_split && v - iv.lo <= w) return true;
    if (iv.hi_split && iv.hi - v <= w) return true;
  }
  return false;
}

std::vector<Partition> partition(const SparseRows& rows, double epsilon, std::size_t max_points,
                                 const Deadline& deadline) {
  if (max_points < 1) throw ArgumentError("max_points must be at least 1");
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  return Partitioner(rows, epsilon, max_points, deadline).run();
}

}  // namespace postclust
