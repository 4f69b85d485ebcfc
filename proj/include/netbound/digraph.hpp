#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "netbound/dense_matrix.hpp"

namespace netbound {

/// Directed edge from `from` into `to` (0-based). Stored as a_{to,from}.
struct Edge {
  std::size_t from;
  std::size_t to;
  double weight;
};

/// Weighted digraph. weight(i, j) = a_ij > 0 iff there is an edge from node j
/// into node i, so that node i is driven by -a_ij (x_i - x_j).
class DiGraph {
 public:
  explicit DiGraph(std::size_t n);
  DiGraph(std::size_t n, std::span<const Edge> edges);
  /// Takes a_ij directly; validates the invariants.
  explicit DiGraph(DenseMatrix weights);

  std::size_t size() const { return weights_.rows(); }
  double weight(std::size_t i, std::size_t j) const { return weights_(i, j); }
  const DenseMatrix& weights() const { return weights_; }

  /// Nodes j with an edge j -> i.
  std::vector<std::size_t> in_neighbors(std::size_t i) const;
  /// Nodes i with an edge j -> i.
  std::vector<std::size_t> out_neighbors(std::size_t j) const;

 private:
  void validate() const;
  DenseMatrix weights_;
};

/// L = D - A with d_i = sum_j a_ij.
DenseMatrix build_laplacian(const DiGraph& g);

/// Strongly connected components in reverse topological order of the
/// condensation (sink components first). Each component is sorted.
std::vector<std::vector<std::size_t>> strongly_connected_components(const DiGraph& g);

enum class ConnectivityVerdict { ok, no_spanning_tree, multiple_roots };

std::string_view to_string(ConnectivityVerdict v);

/// `ok` iff the condensation has exactly one source component and every node
/// is reachable from it, i.e. the graph contains a directed spanning tree.
ConnectivityVerdict check_connectivity(const DiGraph& g);

/// Permuted Laplacian P L P^T = [[L_leader, 0], [-A_lf, M_f]].
struct LaplacianDecomposition {
  std::vector<std::size_t> permutation;  // permutation[k] = original node at slot k
  std::vector<std::size_t> leaders;
  std::vector<std::size_t> followers;
  DenseMatrix L_leader;
  DenseMatrix A_lf;  // n_f x n_l
  DenseMatrix M_f;

  std::size_t n_leaders() const { return leaders.size(); }
  std::size_t n_followers() const { return followers.size(); }
  /// Reassembles the block matrix [[L_leader, 0], [-A_lf, M_f]].
  DenseMatrix assemble() const;
};

/// Leaders are the root component in ascending index order. Followers
/// follow a topological order of the condensation, ties broken by the
/// smallest node index of each component. Throws AssumptionError when the
/// connectivity verdict is not `ok`.
LaplacianDecomposition decompose(const DiGraph& g);

/// P L P^T for a permutation as returned by decompose().
DenseMatrix permute_symmetric(const DenseMatrix& m, std::span<const std::size_t> permutation);

}  // namespace netbound
