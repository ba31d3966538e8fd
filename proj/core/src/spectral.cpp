#include "lexbridge/spectral.hpp"

#include <algorithm>
#include <numeric>

#include "lexbridge/error.hpp"

namespace lexbridge {

NNGraph build_nn_graph(const RowMatrix& vectors, std::vector<std::string> nodes, int neighbors) {
  const auto n = vectors.rows();
  if (n < 2) fail(ErrorCode::kPreconditionViolation, "a neighbour graph needs at least 2 nodes");
  require(neighbors >= 1, "neighbour count must be >= 1");
  require(neighbors < n, "neighbour count must be smaller than the node count");
  require(static_cast<Eigen::Index>(nodes.size()) == n, "node labels must match rows");
  if (!vectors.allFinite()) fail(ErrorCode::kNonFinite, "graph input contains NaN/Inf");

  RowMatrix unit = vectors;
  normalize_rows(unit);
  const Matrix sims = unit * unit.transpose();

  NNGraph g;
  g.nodes = std::move(nodes);
  g.neighbors = neighbors;
  g.adjacency = Matrix::Zero(n, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto self = std::find(order.begin(), order.end(), i);
    order.erase(self);
    std::partial_sort(order.begin(), order.begin() + neighbors, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        if (sims(i, a) != sims(i, b)) return sims(i, a) > sims(i, b);
                        return a < b;
                      });
    for (int k = 0; k < neighbors; ++k) {
      g.adjacency(i, order[static_cast<std::size_t>(k)]) = 1.0;
      g.adjacency(order[static_cast<std::size_t>(k)], i) = 1.0;
    }
    order.resize(static_cast<std::size_t>(n));
  }
  return g;
}

NNGraph build_nn_graph(const EmbeddingSpace& space, int neighbors,
                       const std::optional<std::vector<std::string>>& subset) {
  if (!subset) return build_nn_graph(space.vectors(), space.vocab().words(), neighbors);
  RowMatrix rows(static_cast<Eigen::Index>(subset->size()), space.dim());
  for (std::size_t i = 0; i < subset->size(); ++i) {
    auto id = space.vocab().id((*subset)[i]);
    if (!id) fail(ErrorCode::kUnknownWord, "graph node '" + (*subset)[i] + "' not in space");
    rows.row(static_cast<Eigen::Index>(i)) = space.vectors().row(static_cast<Eigen::Index>(*id));
  }
  return build_nn_graph(rows, *subset, neighbors);
}

Vector laplacian_spectrum(const NNGraph& g) {
  require(g.adjacency.rows() > 0, "empty graph");
  const Vector degree = g.adjacency.rowwise().sum();
  Matrix lap = -g.adjacency;
  lap.diagonal() += degree;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(lap, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::kDecompositionFailure, "Laplacian eigen-decomposition failed");
  }
  Vector ev = solver.eigenvalues();  // ascending
  return ev.reverse();
}

int select_k(const Vector& descending, double fraction) {
  require(descending.size() > 0, "empty spectrum");
  const double total = descending.sum();
  const double limit = fraction * total;
  int k = 0;
  double prefix = 0.0;
  for (Eigen::Index i = 0; i < descending.size(); ++i) {
    prefix += descending(i);
    if (prefix < limit) k = static_cast<int>(i + 1);
    else break;
  }
  return std::max(k, 1);
}

EigScore eigenvector_score(const Vector& a, const Vector& b, double fraction) {
  require(a.size() > 0 && b.size() > 0, "eigenvector score needs non-empty graphs");
  if (!a.allFinite() || !b.allFinite()) fail(ErrorCode::kNonFinite, "non-finite spectrum");
  const int k = static_cast<int>(
      std::min<Eigen::Index>({select_k(a, fraction), select_k(b, fraction), a.size(), b.size()}));
  EigScore out;
  out.k_used = k;
  for (int i = 0; i < k; ++i) {
    const double d = a(i) - b(i);
    out.score += d * d;
  }
  return out;
}

EigScore eigenvector_score(const NNGraph& a, const NNGraph& b, double fraction) {
  return eigenvector_score(laplacian_spectrum(a), laplacian_spectrum(b), fraction);
}

}  // namespace lexbridge
