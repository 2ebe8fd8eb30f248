#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bqtf {

struct Edge {
  int u;
  int v;
};

// Undirected graph; vertices are 0-based internally, edges kept sorted
// lexicographically so operator rows (and file outputs) are deterministic.
struct Graph {
  int n_vertices = 0;
  std::vector<Edge> edges;
  std::vector<double> weights;  // empty, or one positive weight per edge
  bool weighted() const { return !weights.empty(); }
};

inline Graph make_graph(int n, std::vector<Edge> edges,
                        std::vector<double> weights = {}) {
  if (n < 1) throw std::invalid_argument("make_graph: need at least one vertex");
  if (!weights.empty() && weights.size() != edges.size())
    throw std::invalid_argument("make_graph: weights must match edges");
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (auto& e : edges) {
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.u < 0 || e.v >= n)
      throw std::invalid_argument("make_graph: edge references invalid vertex");
    if (e.u == e.v) throw std::invalid_argument("make_graph: self-loop");
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(edges[a].u, edges[a].v) < std::pair(edges[b].u, edges[b].v);
  });
  Graph g;
  g.n_vertices = n;
  g.edges.reserve(edges.size());
  if (!weights.empty()) g.weights.reserve(weights.size());
  for (std::size_t idx : order) {
    if (!g.edges.empty() && g.edges.back().u == edges[idx].u &&
        g.edges.back().v == edges[idx].v)
      throw std::invalid_argument("make_graph: duplicate edge");
    g.edges.push_back(edges[idx]);
    if (!weights.empty()) {
      if (!(weights[idx] > 0.0))
        throw std::invalid_argument("make_graph: weights must be positive");
      g.weights.push_back(weights[idx]);
    }
  }
  return g;
}

inline Graph build_chain_graph(int n) {
  if (n < 2) throw std::invalid_argument("build_chain_graph: need n >= 2");
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return make_graph(n, std::move(edges));
}

// 4-neighbour lattice; vertex (r, c) has index r * cols + c
inline Graph build_lattice_graph(int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("build_lattice_graph: need rows, cols >= 1");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(rows) * (cols - 1) +
                static_cast<std::size_t>(cols) * (rows - 1));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int id = r * cols + c;
      if (c + 1 < cols) edges.push_back({id, id + 1});
      if (r + 1 < rows) edges.push_back({id, id + cols});
    }
  }
  return make_graph(rows * cols, std::move(edges));
}

// Sparse difference operator of order k+1 together with the bookkeeping of
// rows appended by regularize_operator (their local scales get pinned).
struct DifferenceOperator {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  int order = 1;  // k + 1
  std::vector<Eigen::Index> fixed_rows;
};

// Row l of D^(1) for edge (i, j) has +1 at column i and -1 at column j.
inline DifferenceOperator first_difference_operator(const Graph& g) {
  DifferenceOperator d;
  d.order = 1;
  d.matrix.resize(static_cast<Eigen::Index>(g.edges.size()), g.n_vertices);
  std::vector<Eigen::Triplet<double>> tri;
  tri.reserve(2 * g.edges.size());
  for (std::size_t l = 0; l < g.edges.size(); ++l) {
    tri.emplace_back(static_cast<Eigen::Index>(l), g.edges[l].u, 1.0);
    tri.emplace_back(static_cast<Eigen::Index>(l), g.edges[l].v, -1.0);
  }
  d.matrix.setFromTriplets(tri.begin(), tri.end());
  d.matrix.makeCompressed();
  return d;
}

// D^(k+1) = (D^(1))' D^(k) for odd k, D^(1) D^(k) for even k; k = 0 is D^(1).
inline DifferenceOperator higher_difference_operator(const Graph& g, int k) {
  if (k < 0)
    throw std::invalid_argument("higher_difference_operator: need k >= 0");
  DifferenceOperator d1 = first_difference_operator(g);
  if (k == 0) return d1;
  const Eigen::SparseMatrix<double> base = d1.matrix;
  const Eigen::SparseMatrix<double> base_t = base.transpose();
  Eigen::SparseMatrix<double> cur = base;
  for (int j = 1; j <= k; ++j) {
    cur = (j % 2 == 1) ? Eigen::SparseMatrix<double>(base_t * cur)
                       : Eigen::SparseMatrix<double>(base * cur);
  }
  cur.prune(0.0, 0.0);
  DifferenceOperator out;
  out.order = k + 1;
  out.matrix = cur;
  out.matrix.makeCompressed();
  return out;
}

// D^(2)* = (D^(1))' diag(1/w_1, ..., 1/w_m) D^(1) for graphs with edge
// weights (irregular spacing). Only the second order is defined.
inline DifferenceOperator adjusted_second_difference(const Graph& g) {
  if (!g.weighted())
    throw std::invalid_argument("adjusted_second_difference: graph has no weights");
  DifferenceOperator d1 = first_difference_operator(g);
  Eigen::VectorXd inv_w(g.weights.size());
  for (std::size_t i = 0; i < g.weights.size(); ++i) inv_w[i] = 1.0 / g.weights[i];
  const Eigen::SparseMatrix<double> base = d1.matrix;
  Eigen::SparseMatrix<double> cur = base.transpose() * inv_w.asDiagonal() * base;
  cur.prune(0.0, 0.0);
  DifferenceOperator out;
  out.order = 2;
  out.matrix = cur;
  out.matrix.makeCompressed();
  return out;
}

// Appends unit rows until the stacked operator has full column rank, pinning
// the lowest-index coordinate of each nullspace direction. Operators with
// more rows than columns are used as-is (the likelihood absorbs the
// constant-vector deficiency there), matching the m >= n convention.
inline DifferenceOperator regularize_operator(const DifferenceOperator& d,
                                              Eigen::Index n) {
  if (d.matrix.cols() != n)
    throw std::invalid_argument("regularize_operator: column count mismatch");
  if (d.matrix.rows() > n) return d;
  Eigen::MatrixXd dense(d.matrix);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
  if (lu.rank() == n) return d;
  Eigen::MatrixXd kernel = lu.kernel();
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) kernel.col(c).normalize();

  std::vector<Eigen::Index> pins;
  while (kernel.cols() > 0) {
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (kernel.row(i).norm() > 1e-8) {
        pick = i;
        break;
      }
    }
    if (pick < 0) break;
    pins.push_back(pick);
    const Eigen::RowVectorXd row = kernel.row(pick);
    Eigen::Index p;
    row.cwiseAbs().maxCoeff(&p);
    // restrict the kernel to directions with coordinate `pick` equal to zero
    Eigen::MatrixXd next(n, kernel.cols() - 1);
    Eigen::Index t = 0;
    for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
      if (c == p) continue;
      next.col(t) = kernel.col(c) - (row(c) / row(p)) * kernel.col(p);
      next.col(t).normalize();
      ++t;
    }
    kernel = std::move(next);
  }

  DifferenceOperator out;
  out.order = d.order;
  const Eigen::Index m = d.matrix.rows();
  out.matrix.resize(m + static_cast<Eigen::Index>(pins.size()), n);
  std::vector<Eigen::Triplet<double>> tri;
  tri.reserve(d.matrix.nonZeros() + pins.size());
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(d.matrix, r);
         it; ++it) {
      tri.emplace_back(r, it.col(), it.value());
    }
  }
  for (std::size_t j = 0; j < pins.size(); ++j) {
    tri.emplace_back(m + static_cast<Eigen::Index>(j), pins[j], 1.0);
    out.fixed_rows.push_back(m + static_cast<Eigen::Index>(j));
  }
  out.matrix.setFromTriplets(tri.begin(), tri.end());
  out.matrix.makeCompressed();
  return out;
}

// Edge-list CSV with header u,v[,w] and 1-based vertex indices.
inline Graph load_edge_list(const std::string& path, int n_hint = 0) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open edge list: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty edge list: " + path);
  std::vector<Edge> edges;
  std::vector<double> weights;
  bool any_weight = false;
  int n = n_hint;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cells;
    while (std::getline(ss, tok, ',')) cells.push_back(tok);
    if (cells.size() < 2)
      throw std::invalid_argument(path + ": malformed row " + std::to_string(line_no));
    const int u = std::stoi(cells[0]);
    const int v = std::stoi(cells[1]);
    if (u < 1 || v < 1)
      throw std::invalid_argument(path + ": vertex indices are 1-based");
    edges.push_back({u - 1, v - 1});
    n = std::max({n, u, v});
    if (cells.size() >= 3 && !cells[2].empty()) {
      any_weight = true;
      weights.push_back(std::stod(cells[2]));
    } else {
      weights.push_back(0.0);
    }
  }
  if (!any_weight) weights.clear();
  return make_graph(n, std::move(edges), std::move(weights));
}

}  // namespace bqtf
