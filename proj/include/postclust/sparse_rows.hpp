#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <span>
#include <vector>

namespace postclust {

using Index = std::int32_t;
using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

/// Read-only view of one sparse row; indices strictly increasing.
struct RowView {
  std::span<const Index> indices;
  std::span<const double> values;

  double coordinate(Index dim) const;
};

/// Point set in feature space: one compressed sparse row per point plus
/// cached squared L2 norms. Immutable once built, shared read-only by all
/// clustering workers.
class SparseRows {
 public:
  SparseRows() = default;
  explicit SparseRows(RowMatrix matrix);

  /// Builds rows from a dense matrix (one point per row); zeros are not stored.
  static SparseRows from_dense(const Eigen::MatrixXd& points);

  Index size() const { return static_cast<Index>(matrix_.rows()); }
  Index dims() const { return static_cast<Index>(matrix_.cols()); }
  bool empty() const { return matrix_.rows() == 0; }

  RowView row(Index i) const;
  double squared_norm(Index i) const { return squared_norms_[i]; }
  const RowMatrix& matrix() const { return matrix_; }

 private:
  RowMatrix matrix_;
  Eigen::VectorXd squared_norms_;
};

/// Distance kernel for repeated queries from one point.
///
/// `within(q)` evaluates |p|^2 + |q|^2 - 2 p.q, with the dot product summed
/// over the shared indices in increasing order, so the predicate is exactly
/// symmetric: within(p, q) == within(q, p) bit for bit. Every clustering
/// path uses this kernel, which is what makes DBSCAN and MR-DBSCAN agree
/// exactly at the epsilon boundary.
class DistanceProbe {
 public:
  explicit DistanceProbe(const SparseRows& rows);

  void load(Index p);
  double squared_distance(Index q) const;
  bool within(Index q, double radius) const { return squared_distance(q) <= radius * radius; }

 private:
  const SparseRows* rows_;
  Eigen::VectorXd dense_;
  Index loaded_ = -1;
};

/// Plain Euclidean distance between two rows by sparse merge. Used by tests
/// and diagnostics, not on the clustering path.
double euclidean_distance(const SparseRows& rows, Index a, Index b);

}  // namespace postclust
