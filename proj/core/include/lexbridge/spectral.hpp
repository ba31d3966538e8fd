#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lexbridge/embedding.hpp"
#include "lexbridge/matrix.hpp"

namespace lexbridge {

/// Undirected nearest-neighbour graph over a set of words.
struct NNGraph {
  std::vector<std::string> nodes;
  Matrix adjacency;  ///< symmetric 0/1, zero diagonal
  int neighbors = 0;
};

/// Directed g-NN by cosine (ties to the lower node index), then symmetrized.
/// With `subset`, only those words become nodes, in the given order.
NNGraph build_nn_graph(const EmbeddingSpace& space, int neighbors,
                       const std::optional<std::vector<std::string>>& subset = std::nullopt);

/// Same as above from raw rows.
NNGraph build_nn_graph(const RowMatrix& vectors, std::vector<std::string> nodes, int neighbors);

/// Eigenvalues of L = D - A, sorted descending.
Vector laplacian_spectrum(const NNGraph& g);

/// Number of leading eigenvalues (descending) to compare: the largest k whose
/// prefix sum stays below `fraction` of the total, and at least 1.
int select_k(const Vector& descending, double fraction = 0.9);

struct EigScore {
  double score = 0.0;
  int k_used = 1;
};

/// Sum over the first k of the squared rank-paired eigenvalue differences,
/// with k the smaller of the two graphs' selections.
EigScore eigenvector_score(const NNGraph& a, const NNGraph& b, double fraction = 0.9);
EigScore eigenvector_score(const Vector& spectrum_a, const Vector& spectrum_b,
                           double fraction = 0.9);

}  // namespace lexbridge
