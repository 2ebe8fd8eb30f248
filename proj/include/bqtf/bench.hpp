#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bqtf/gibbs.hpp"
#include "bqtf/model.hpp"
#include "bqtf/parallel.hpp"
#include "bqtf/posterior.hpp"
#include "bqtf/simgen.hpp"
#include "bqtf/vb.hpp"

namespace bqtf {

enum class Method { mcmc, vb };

inline std::string to_string(Method m) {
  return m == Method::mcmc ? "mcmc" : "vb";
}

inline Method method_from_string(const std::string& s) {
  if (s == "mcmc") return Method::mcmc;
  if (s == "vb") return Method::vb;
  throw std::invalid_argument("unknown method: " + s);
}

struct BenchConfig {
  SignalKind signal = SignalKind::pc;
  NoiseKind noise = NoiseKind::gauss;
  int k = 0;
  int n = 100;
  int rows = 10, cols = 10;  // lattice dimensions
  double mu = 10.0;          // lattice contamination magnitude
  std::vector<double> p_levels{0.25, 0.5, 0.75};
  std::vector<PriorFamily> priors{PriorFamily::horseshoe, PriorFamily::laplace,
                                  PriorFamily::normal};
  std::vector<Method> methods{Method::mcmc, Method::vb};
  int replications = 100;
  SamplingProtocol protocol{};  // per-fit protocol; seed field is ignored
  VbOptions vb{};
  double a_sigma = 0.1, b_sigma = 0.1;
  std::uint64_t seed = 1;
  int threads = 2;
};

// One cell of the benchmark grid: per-replication metrics plus the running
// sum of pointwise estimates (used by the lattice block checks).
struct BenchCell {
  Method method;
  PriorFamily prior;
  double p;
  std::vector<Metrics> reps;
  Eigen::VectorXd point_sum;

  Metrics average() const {
    Metrics avg{0, 0, 0, 0};
    for (const auto& m : reps) {
      avg.mse += m.mse;
      avg.mad += m.mad;
      avg.mciw += m.mciw;
      avg.cp += m.cp;
    }
    const double r = static_cast<double>(reps.size());
    avg.mse /= r;
    avg.mad /= r;
    avg.mciw /= r;
    avg.cp /= r;
    return avg;
  }
  Eigen::VectorXd mean_point() const {
    return point_sum / static_cast<double>(reps.size());
  }
};

struct BenchTable {
  std::vector<BenchCell> cells;

  const BenchCell& cell(Method method, PriorFamily prior, double p) const {
    for (const auto& c : cells)
      if (c.method == method && c.prior == prior && std::abs(c.p - p) < 1e-12)
        return c;
    throw std::out_of_range("benchmark cell not found");
  }
};

// Runs the replication grid. Every (replication, p) pair shares one dataset
// across methods and priors; fits get seeds derived from (seed, rep, slot),
// and results land in preallocated slots so threading cannot reorder them.
inline BenchTable run_benchmark(const BenchConfig& cfg) {
  if (cfg.replications < 1)
    throw std::invalid_argument("run_benchmark: need replications >= 1");
  if (cfg.signal == SignalKind::lattice && cfg.noise != NoiseKind::contaminated)
    throw std::invalid_argument(
        "run_benchmark: the lattice scenario pairs only with contaminated noise");
  if (cfg.signal != SignalKind::lattice && cfg.noise == NoiseKind::contaminated)
    throw std::invalid_argument(
        "run_benchmark: contaminated noise pairs only with the lattice scenario");

  const Graph graph = (cfg.signal == SignalKind::lattice)
                          ? build_lattice_graph(cfg.rows, cfg.cols)
                          : build_chain_graph(cfg.n);

  BenchTable table;
  for (Method method : cfg.methods)
    for (PriorFamily prior : cfg.priors)
      for (double p : cfg.p_levels) {
        BenchCell c;
        c.method = method;
        c.prior = prior;
        c.p = p;
        c.reps.resize(cfg.replications);
        c.point_sum = Eigen::VectorXd::Zero(graph.n_vertices);
        table.cells.push_back(std::move(c));
      }

  std::vector<Eigen::MatrixXd> points(table.cells.size());
  for (auto& m : points)
    m = Eigen::MatrixXd::Zero(cfg.replications, graph.n_vertices);

  parallel_for(cfg.replications, cfg.threads, [&](long rep) {
    Rng data_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
    Eigen::VectorXd y, lattice_truth;
    if (cfg.signal == SignalKind::lattice) {
      auto sc = lattice_scenario(cfg.rows, cfg.cols, cfg.mu, data_rng);
      y = sc.y;
      lattice_truth = sc.truth;
    } else {
      y = chain_observations(cfg.signal, cfg.noise, cfg.n, data_rng);
    }
    const Dataset data = Dataset::from_vector(y);

    for (std::size_t ci = 0; ci < table.cells.size(); ++ci) {
      auto& cell = table.cells[ci];
      ModelSpec spec;
      spec.p = cell.p;
      spec.k = cfg.k;
      spec.prior = cell.prior;
      spec.a_sigma = cfg.a_sigma;
      spec.b_sigma = cfg.b_sigma;
      const Model model = validate_spec(spec, graph, data);
      const Eigen::VectorXd truth =
          (cfg.signal == SignalKind::lattice)
              ? lattice_truth
              : chain_truth(cfg.signal, cfg.noise, cfg.n, cell.p);

      FitSummary fit;
      if (cell.method == Method::mcmc) {
        SamplingProtocol prot = cfg.protocol;
        prot.seed = mix_seed(cfg.seed, 0x10000u * (rep + 1) + ci);
        fit = summarize(run_gibbs(model, prot));
      } else {
        fit = summarize_vb(run_vb(model, cfg.vb));
      }
      cell.reps[static_cast<std::size_t>(rep)] = metrics(fit, truth);
      points[ci].row(rep) = fit.point.transpose();
    }
  });

  for (std::size_t ci = 0; ci < table.cells.size(); ++ci)
    table.cells[ci].point_sum = points[ci].colwise().sum().transpose();
  return table;
}

}  // namespace bqtf
