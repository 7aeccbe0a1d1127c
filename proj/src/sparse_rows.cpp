#include "postclust/sparse_rows.hpp"

#include <algorithm>
#include <cmath>

namespace postclust {

double RowView::coordinate(Index dim) const {
  auto it = std::lower_bound(indices.begin(), indices.end(), dim);
  if (it == indices.end() || *it != dim) return 0.0;
  return values[static_cast<std::size_t>(it - indices.begin())];
}

SparseRows::SparseRows(RowMatrix matrix) : matrix_(std::move(matrix)) {
  matrix_.prune(0.0);
  matrix_.makeCompressed();
  squared_norms_.resize(matrix_.rows());
  for (Index i = 0; i < size(); ++i) {
    double s = 0.0;
    for (double v : row(i).values) s += v * v;
    squared_norms_[i] = s;
  }
}

SparseRows SparseRows::from_dense(const Eigen::MatrixXd& points) {
  return SparseRows(RowMatrix(points.sparseView()));
}

RowView SparseRows::row(Index i) const {
  const Index begin = matrix_.outerIndexPtr()[i];
  const Index end = matrix_.outerIndexPtr()[i + 1];
  const auto count = static_cast<std::size_t>(end - begin);
  return {std::span<const Index>(matrix_.innerIndexPtr() + begin, count),
          std::span<const double>(matrix_.valuePtr() + begin, count)};
}

DistanceProbe::DistanceProbe(const SparseRows& rows)
    : rows_(&rows), dense_(Eigen::VectorXd::Zero(std::max<Index>(rows.dims(), 1))) {}

void DistanceProbe::load(Index p) {
  if (loaded_ >= 0)
    for (Index d : rows_->row(loaded_).indices) dense_[d] = 0.0;
  const RowView r = rows_->row(p);
  for (std::size_t k = 0; k < r.indices.size(); ++k) dense_[r.indices[k]] = r.values[k];
  loaded_ = p;
}

double DistanceProbe::squared_distance(Index q) const {
  const RowView r = rows_->row(q);
  double dot = 0.0;
  for (std::size_t k = 0; k < r.indices.size(); ++k) dot += dense_[r.indices[k]] * r.values[k];
  const double d2 = (rows_->squared_norm(loaded_) + rows_->squared_norm(q)) - 2.0 * dot;
  return d2 > 0.0 ? d2 : 0.0;
}

double euclidean_distance(const SparseRows& rows, Index a, Index b) {
  const RowView ra = rows.row(a);
  const RowView rb = rows.row(b);
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < ra.indices.size() || j < rb.indices.size()) {
    double diff;
    if (j == rb.indices.size() || (i < ra.indices.size() && ra.indices[i] < rb.indices[j])) {
      diff = ra.values[i++];
    } else if (i == ra.indices.size() || rb.indices[j] < ra.indices[i]) {
      diff = rb.values[j++];
    } else {
      diff = ra.values[i++] - rb.values[j++];
    }
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace postclust
