#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bqtf/dists.hpp"
#include "bqtf/graph.hpp"

namespace bqtf {

enum class PriorFamily { normal, laplace, horseshoe };

inline std::string to_string(PriorFamily f) {
  switch (f) {
    case PriorFamily::normal: return "normal";
    case PriorFamily::laplace: return "laplace";
    case PriorFamily::horseshoe: return "horseshoe";
  }
  return "?";
}

inline PriorFamily prior_from_string(const std::string& s) {
  if (s == "normal" || s == "norm") return PriorFamily::normal;
  if (s == "laplace" || s == "lap") return PriorFamily::laplace;
  if (s == "horseshoe" || s == "hs") return PriorFamily::horseshoe;
  throw std::invalid_argument("unknown prior: " + s);
}

// (psi, t^2) of the normal variance-mean mixture representation of the
// asymmetric Laplace: psi = (1-2p)/(p(1-p)), t^2 = 2/(p(1-p)).
inline std::pair<double, double> derive_augmentation_constants(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("derive_augmentation_constants: p must lie in (0,1)");
  const double pq = p * (1.0 - p);
  return {(1.0 - 2.0 * p) / pq, 2.0 / pq};
}

struct ModelSpec {
  double p = 0.5;
  int k = 0;
  PriorFamily prior = PriorFamily::horseshoe;
  double a_sigma = 0.1;
  double b_sigma = 0.1;
  TruncationBounds bounds{};

  // derived, always recomputed from p
  double psi() const { return derive_augmentation_constants(p).first; }
  double t2() const { return derive_augmentation_constants(p).second; }

  void validate() const {
    if (!(p > 0.0 && p < 1.0))
      throw std::invalid_argument("ModelSpec: p must lie in (0,1)");
    if (k < 0) throw std::invalid_argument("ModelSpec: k must be >= 0");
    if (!(a_sigma > 0.0) || !(b_sigma > 0.0))
      throw std::invalid_argument("ModelSpec: sigma2 hyperparameters must be positive");
    bounds.validate();
  }
};

// Observations per node; nodes with no observations are allowed (pure
// interpolation sites) as long as the dataset is not empty overall.
struct Dataset {
  int node_count = 0;
  std::vector<std::vector<double>> observations;

  long total() const {
    long n = 0;
    for (const auto& v : observations) n += static_cast<long>(v.size());
    return n;
  }
  static Dataset from_vector(const Eigen::VectorXd& y) {
    Dataset d;
    d.node_count = static_cast<int>(y.size());
    d.observations.resize(d.node_count);
    for (int i = 0; i < d.node_count; ++i) d.observations[i].push_back(y[i]);
    return d;
  }
};

// Observation CSV with header node,value; 1-based node indices, repeated
// node rows for multiple observations per location.
inline Dataset load_observations(const std::string& path, int n_nodes = 0) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open observations: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty observation file: " + path);
  std::vector<std::pair<int, double>> rows;
  int n = n_nodes;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      throw std::invalid_argument(path + ": malformed row " + std::to_string(line_no));
    const int node = std::stoi(a);
    if (node < 1) throw std::invalid_argument(path + ": node indices are 1-based");
    rows.emplace_back(node - 1, std::stod(b));
    n = std::max(n, node);
  }
  Dataset d;
  d.node_count = n;
  d.observations.resize(n);
  for (const auto& [node, value] : rows) d.observations[node].push_back(value);
  return d;
}

// Variant-specific local-scale state. w2 has one entry per operator row;
// entries for fixed (augmented) rows stay pinned at the upper bound.
struct PriorState {
  Eigen::VectorXd w2;
  Eigen::VectorXd nu_local;  // horseshoe auxiliaries
  double gamma2 = 1.0;       // laplace global scale
  double nu = 1.0;           // laplace auxiliary
};

// Checked model instance: spec + graph + data with the regularized operator
// built (adjusted second-order operator when the graph carries weights).
struct Model {
  ModelSpec spec;
  Graph graph;
  Dataset data;
  DifferenceOperator op;
  std::vector<char> row_fixed;  // per operator row

  Eigen::Index n() const { return op.matrix.cols(); }
  Eigen::Index m_rows() const { return op.matrix.rows(); }
  long n_free_rows() const {
    return m_rows() - static_cast<long>(op.fixed_rows.size());
  }
};

inline Model validate_spec(const ModelSpec& spec, const Graph& graph,
                           const Dataset& data) {
  spec.validate();
  if (graph.n_vertices < 1)
    throw std::invalid_argument("validate_spec: empty graph");
  if (data.node_count != graph.n_vertices)
    throw std::invalid_argument("validate_spec: dataset nodes != graph vertices");
  if (data.total() < 1)
    throw std::invalid_argument("validate_spec: dataset has no observations");
  Model m;
  m.spec = spec;
  m.graph = graph;
  m.data = data;
  if (graph.weighted()) {
    if (spec.k != 1)
      throw std::invalid_argument(
          "validate_spec: weighted graphs define only the adjusted k=1 operator");
    m.op = regularize_operator(adjusted_second_difference(graph),
                               graph.n_vertices);
  } else {
    m.op = regularize_operator(higher_difference_operator(graph, spec.k),
                               graph.n_vertices);
  }
  m.row_fixed.assign(m.op.matrix.rows(), 0);
  for (Eigen::Index r : m.op.fixed_rows) m.row_fixed[static_cast<std::size_t>(r)] = 1;
  return m;
}

inline PriorState init_prior_state(const Model& m) {
  PriorState ps;
  ps.w2 = Eigen::VectorXd::Ones(m.m_rows());
  for (Eigen::Index r : m.op.fixed_rows) ps.w2[r] = m.spec.bounds.upper;
  if (m.spec.prior == PriorFamily::horseshoe)
    ps.nu_local = Eigen::VectorXd::Ones(m.m_rows());
  return ps;
}

}  // namespace bqtf
