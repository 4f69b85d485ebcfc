#include "netbound/digraph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

#include "netbound/errors.hpp"

namespace netbound {

DiGraph::DiGraph(std::size_t n) : weights_(n, n) { validate(); }

DiGraph::DiGraph(std::size_t n, std::span<const Edge> edges) : weights_(n, n) {
  for (const Edge& e : edges) {
    if (e.from >= n || e.to >= n)
      throw PreconditionError("DiGraph: edge " + std::to_string(e.from) + "->" +
                              std::to_string(e.to) + " out of range");
    if (e.from == e.to) throw PreconditionError("DiGraph: self-loop at " + std::to_string(e.to));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw PreconditionError("DiGraph: edge weight must be positive and finite");
    weights_(e.to, e.from) += e.weight;
  }
  validate();
}

DiGraph::DiGraph(DenseMatrix weights) : weights_(std::move(weights)) { validate(); }

void DiGraph::validate() const {
  if (!weights_.is_square()) throw PreconditionError("DiGraph: weight matrix must be square");
  if (weights_.rows() == 0) throw PreconditionError("DiGraph: needs at least one node");
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j) {
      const double a = weights_(i, j);
      if (!std::isfinite(a) || a < 0.0)
        throw PreconditionError("DiGraph: weights must be finite and nonnegative");
      if (i == j && a != 0.0) throw PreconditionError("DiGraph: self-loops are not allowed");
    }
}

std::vector<std::size_t> DiGraph::in_neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j)
    if (weights_(i, j) > 0.0) out.push_back(j);
  return out;
}

std::vector<std::size_t> DiGraph::out_neighbors(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i)
    if (weights_(i, j) > 0.0) out.push_back(i);
  return out;
}

DenseMatrix build_laplacian(const DiGraph& g) {
  const std::size_t n = g.size();
  DenseMatrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      d += g.weight(i, j);
      l(i, j) = -g.weight(i, j);
    }
    l(i, i) = d;
  }
  return l;
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const DiGraph& g) {
  // Iterative Tarjan. Components come out sink-first.
  const std::size_t n = g.size();
  constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t j = 0; j < n; ++j) succ[j] = g.out_neighbors(j);

  std::vector<std::size_t> index(n, unvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    std::size_t next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& fr = call.back();
      if (fr.next < succ[fr.v].size()) {
        const std::size_t w = succ[fr.v][fr.next++];
        if (index[w] == unvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[fr.v] = std::min(low[fr.v], index[w]);
        }
        continue;
      }
      const std::size_t v = fr.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  return comps;
}

std::string_view to_string(ConnectivityVerdict v) {
  switch (v) {
    case ConnectivityVerdict::ok:
      return "ok";
    case ConnectivityVerdict::no_spanning_tree:
      return "no_spanning_tree";
    case ConnectivityVerdict::multiple_roots:
      return "multiple_roots";
  }
  return "unknown";
}

namespace {

struct Condensation {
  std::vector<std::vector<std::size_t>> comps;
  std::vector<std::size_t> comp_of;
  std::vector<std::vector<std::size_t>> succ;  // component adjacency, deduplicated
  std::vector<std::size_t> indegree;
};

Condensation condense(const DiGraph& g) {
  Condensation c;
  c.comps = strongly_connected_components(g);
  c.comp_of.assign(g.size(), 0);
  for (std::size_t k = 0; k < c.comps.size(); ++k)
    for (std::size_t v : c.comps[k]) c.comp_of[v] = k;
  c.succ.assign(c.comps.size(), {});
  c.indegree.assign(c.comps.size(), 0);
  for (std::size_t j = 0; j < g.size(); ++j)
    for (std::size_t i : g.out_neighbors(j)) {
      const std::size_t a = c.comp_of[j], b = c.comp_of[i];
      if (a != b && std::find(c.succ[a].begin(), c.succ[a].end(), b) == c.succ[a].end()) {
        c.succ[a].push_back(b);
        ++c.indegree[b];
      }
    }
  return c;
}

}  // namespace

ConnectivityVerdict check_connectivity(const DiGraph& g) {
  const Condensation c = condense(g);
  std::size_t roots = 0, root = 0;
  for (std::size_t k = 0; k < c.comps.size(); ++k)
    if (c.indegree[k] == 0) {
      ++roots;
      root = k;
    }
  if (roots > 1) return ConnectivityVerdict::multiple_roots;
  if (roots == 0) return ConnectivityVerdict::no_spanning_tree;
  std::vector<bool> seen(c.comps.size(), false);
  std::vector<std::size_t> todo{root};
  seen[root] = true;
  while (!todo.empty()) {
    const std::size_t k = todo.back();
    todo.pop_back();
    for (std::size_t m : c.succ[k])
      if (!seen[m]) {
        seen[m] = true;
        todo.push_back(m);
      }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })
             ? ConnectivityVerdict::ok
             : ConnectivityVerdict::no_spanning_tree;
}

DenseMatrix permute_symmetric(const DenseMatrix& m, std::span<const std::size_t> permutation) {
  const std::size_t n = permutation.size();
  DenseMatrix out(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) out(a, b) = m(permutation[a], permutation[b]);
  return out;
}

DenseMatrix LaplacianDecomposition::assemble() const {
  const std::size_t nl = n_leaders(), nf = n_followers(), n = nl + nf;
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < nl; ++i)
    for (std::size_t j = 0; j < nl; ++j) out(i, j) = L_leader(i, j);
  for (std::size_t i = 0; i < nf; ++i) {
    for (std::size_t j = 0; j < nl; ++j) out(nl + i, j) = -A_lf(i, j);
    for (std::size_t j = 0; j < nf; ++j) out(nl + i, nl + j) = M_f(i, j);
  }
  return out;
}

LaplacianDecomposition decompose(const DiGraph& g) {
  const ConnectivityVerdict verdict = check_connectivity(g);
  if (verdict != ConnectivityVerdict::ok)
    throw AssumptionError("decompose: graph has no directed spanning tree (" +
                          std::string(to_string(verdict)) + ")");
  const Condensation c = condense(g);

  // Kahn's algorithm on the condensation, smallest member index first.
  auto key = [&](std::size_t k) { return c.comps[k].front(); };
  auto cmp = [&](std::size_t a, std::size_t b) { return key(a) > key(b); };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> ready(cmp);
  std::vector<std::size_t> indeg = c.indegree;
  for (std::size_t k = 0; k < c.comps.size(); ++k)
    if (indeg[k] == 0) ready.push(k);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t k = ready.top();
    ready.pop();
    order.push_back(k);
    for (std::size_t m : c.succ[k])
      if (--indeg[m] == 0) ready.push(m);
  }

  LaplacianDecomposition d;
  d.leaders = c.comps[order.front()];
  for (std::size_t t = 1; t < order.size(); ++t)
    d.followers.insert(d.followers.end(), c.comps[order[t]].begin(), c.comps[order[t]].end());
  d.permutation = d.leaders;
  d.permutation.insert(d.permutation.end(), d.followers.begin(), d.followers.end());

  const DenseMatrix pl = permute_symmetric(build_laplacian(g), d.permutation);
  const std::size_t nl = d.leaders.size(), nf = d.followers.size();
  d.L_leader = DenseMatrix(nl, nl);
  d.A_lf = DenseMatrix(nf, nl);
  d.M_f = DenseMatrix(nf, nf);
  for (std::size_t i = 0; i < nl; ++i) {
    for (std::size_t j = 0; j < nl; ++j) d.L_leader(i, j) = pl(i, j);
    for (std::size_t j = 0; j < nf; ++j)
      if (pl(i, nl + j) != 0.0) throw std::logic_error("decompose: leader block receives edges");
  }
  for (std::size_t i = 0; i < nf; ++i) {
    for (std::size_t j = 0; j < nl; ++j) d.A_lf(i, j) = -pl(nl + i, j);
    for (std::size_t j = 0; j < nf; ++j) d.M_f(i, j) = pl(nl + i, nl + j);
  }

  // M_f = L_f + D_lf, with L_f the Laplacian of the follower subgraph and
  // D_lf the leader-to-follower in-weights.
  const double scale = std::max(1.0, d.M_f.max_abs());
  for (std::size_t i = 0; i < nf; ++i) {
    double lf_diag = 0.0, dlf = 0.0;
    for (std::size_t j = 0; j < nf; ++j)
      if (j != i) lf_diag += g.weight(d.followers[i], d.followers[j]);
    for (std::size_t j = 0; j < nl; ++j) dlf += d.A_lf(i, j);
    if (std::abs(d.M_f(i, i) - (lf_diag + dlf)) > 1e-12 * scale)
      throw std::logic_error("decompose: M_f != L_f + D_lf");
  }
  return d;
}

}  // namespace netbound
