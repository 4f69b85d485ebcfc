#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <random>
#include <vector>

#include "netbound/dense_matrix.hpp"
#include "netbound/digraph.hpp"

namespace testing_support {

using netbound::DenseMatrix;
using netbound::DiGraph;
using netbound::Edge;

inline Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline std::vector<Edge> unit_edges(std::initializer_list<std::pair<std::size_t, std::size_t>> es) {
  std::vector<Edge> out;
  for (auto [f, t] : es) out.push_back({f, t, 1.0});
  return out;
}

/// Hamiltonian cycle through a shuffled order plus random chords.
inline DiGraph random_strongly_connected(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(1e-3, 2.0);
  std::bernoulli_distribution chord(0.3);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  DenseMatrix a(n, n);
  for (std::size_t k = 0; k < n && n > 1; ++k) a(order[(k + 1) % n], order[k]) = w(rng);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && a(i, j) == 0.0 && chord(rng)) a(i, j) = w(rng);
  return DiGraph(a);
}

/// Strongly connected root on the first n_l nodes; every later node gets at
/// least one edge from an earlier node, plus random extra edges that never
/// point back into the root.
inline DiGraph random_rooted(std::size_t n_l, std::size_t n_f, std::mt19937_64& rng) {
  const std::size_t n = n_l + n_f;
  const DiGraph root = random_strongly_connected(n_l, rng);
  std::uniform_real_distribution<double> w(1e-3, 2.0);
  std::bernoulli_distribution extra(0.25);
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n_l; ++i)
    for (std::size_t j = 0; j < n_l; ++j) a(i, j) = root.weight(i, j);
  for (std::size_t i = n_l; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    a(i, pick(rng)) = w(rng);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && a(i, j) == 0.0 && extra(rng)) a(i, j) = w(rng);
  }
  // Scramble node labels so the root is not always first.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  DenseMatrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(perm[i], perm[j]) = a(i, j);
  return DiGraph(b);
}

/// reach[i][j]: j is reachable from i along edge directions (reflexive).
inline std::vector<std::vector<bool>> reachability(const DiGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    r[i][i] = true;
    for (std::size_t j = 0; j < n; ++j)
      if (g.weight(j, i) > 0.0) r[i][j] = true;  // edge i -> j
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  return r;
}

/// Random nonsingular M-matrix lambda I - B with lambda > rho(B).
inline DenseMatrix random_m_matrix(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution nz(0.5);
  Eigen::MatrixXd b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = nz(rng) ? u(rng) : 0.0;
  const double rho = b.eigenvalues().cwiseAbs().maxCoeff();
  const double lambda = rho + 0.01 + u(rng);
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = (i == j ? lambda : 0.0) - b(i, j);
  return m;
}

}  // namespace testing_support
