// bqtf command line: fit / simulate / benchmark / diffop.
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bqtf/bqtf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GraphSource {
  std::string edges_path;
  int chain_n = 0;
  std::string lattice;

  void add_options(CLI::App* cmd) {
    auto* a = cmd->add_option("--edges", edges_path, "edge-list CSV (u,v[,w])");
    auto* b = cmd->add_option("--chain", chain_n, "built-in chain graph with N vertices");
    auto* c = cmd->add_option("--lattice", lattice, "built-in lattice graph, RxC");
    a->excludes(b)->excludes(c);
    b->excludes(c);
  }

  bool configured() const {
    return !edges_path.empty() || chain_n > 0 || !lattice.empty();
  }

  std::pair<int, int> lattice_dims() const {
    const auto sep = lattice.find_first_of("xX");
    if (sep == std::string::npos)
      throw std::invalid_argument("--lattice expects RxC, e.g. 10x10");
    return {std::stoi(lattice.substr(0, sep)), std::stoi(lattice.substr(sep + 1))};
  }

  bqtf::Graph build(int n_hint = 0) const {
    if (!edges_path.empty()) return bqtf::load_edge_list(edges_path, n_hint);
    if (chain_n > 0) return bqtf::build_chain_graph(chain_n);
    if (!lattice.empty()) {
      auto [r, c] = lattice_dims();
      return bqtf::build_lattice_graph(r, c);
    }
    throw std::invalid_argument("no graph source given (--edges/--chain/--lattice)");
  }
};

json graph_json(const bqtf::Graph& g) {
  return {{"n_vertices", g.n_vertices},
          {"n_edges", g.edges.size()},
          {"weighted", g.weighted()}};
}

int run_fit(const GraphSource& gs, const std::string& data_path,
            bqtf::ModelSpec spec, const std::string& method,
            bqtf::SamplingProtocol prot, bqtf::VbOptions vb_opts,
            const std::string& out_dir) {
  const bqtf::Dataset data = bqtf::load_observations(data_path);
  const bqtf::Graph graph = gs.build(data.node_count);
  const bqtf::Model model = bqtf::validate_spec(spec, graph, data);
  fs::create_directories(out_dir);

  json meta;
  meta["spec"] = spec;
  meta["graph"] = graph_json(graph);
  meta["data"] = {{"path", data_path}, {"nodes", data.node_count}, {"total", data.total()}};
  meta["method"] = method;

  if (method == "mcmc") {
    const bqtf::PosteriorSamples samples = bqtf::run_gibbs(model, prot);
    bqtf::write_summary_csv(fs::path(out_dir) / "summary.csv",
                            bqtf::summarize(samples));
    bqtf::write_samples_csv(fs::path(out_dir) / "samples.csv", samples);
    meta["protocol"] = prot;
    meta["retained"] = samples.retained();
    meta["interval_source"] = "posterior_quantiles";
  } else if (method == "vb") {
    const bqtf::VbResult fit = bqtf::run_vb(model, vb_opts);
    bqtf::write_summary_csv(fs::path(out_dir) / "summary.csv",
                            bqtf::summarize_vb(fit));
    bqtf::write_vb_state_csv(fs::path(out_dir) / "vb_state.csv", fit);
    meta["vb"] = {{"max_iter", vb_opts.max_iter},
                  {"tol", vb_opts.tol},
                  {"converged", fit.report.converged},
                  {"iterations", fit.report.iterations},
                  {"last_change", fit.report.last_change}};
    meta["interval_source"] = "variational";
  } else {
    throw std::invalid_argument("unknown method: " + method);
  }
  bqtf::write_json(fs::path(out_dir) / "meta.json", meta);
  return 0;
}

int run_simulate(const std::string& scenario, const std::string& noise, int n,
                 const std::string& lattice, double mu, double p, int reps,
                 std::uint64_t seed, const std::string& out_dir) {
  const bqtf::SignalKind signal = bqtf::signal_from_string(scenario);
  fs::create_directories(out_dir);
  json manifest;
  manifest["scenario"] = scenario;
  manifest["master_seed"] = seed;
  manifest["replications"] = reps;

  bqtf::Graph graph;
  if (signal == bqtf::SignalKind::lattice) {
    int rows = 10, cols = 10;
    if (!lattice.empty()) {
      const auto sep = lattice.find_first_of("xX");
      rows = std::stoi(lattice.substr(0, sep));
      cols = std::stoi(lattice.substr(sep + 1));
    }
    graph = bqtf::build_lattice_graph(rows, cols);
    manifest["rows"] = rows;
    manifest["cols"] = cols;
    manifest["mu"] = mu;
    bqtf::write_vector_csv(fs::path(out_dir) / "truth.csv",
                           bqtf::lattice_block_signal(rows, cols), "value");
    for (int r = 0; r < reps; ++r) {
      bqtf::Rng rng(bqtf::mix_seed(seed, static_cast<std::uint64_t>(r)));
      auto sc = bqtf::lattice_scenario(rows, cols, mu, rng);
      char name[32];
      std::snprintf(name, sizeof(name), "dataset_%03d.csv", r);
      bqtf::write_vector_csv(fs::path(out_dir) / name, sc.y, "value");
    }
  } else {
    const bqtf::NoiseKind nk = bqtf::noise_from_string(noise);
    if (nk == bqtf::NoiseKind::contaminated)
      throw std::invalid_argument("contaminated noise pairs only with --scenario lattice");
    graph = bqtf::build_chain_graph(n);
    manifest["noise"] = noise;
    manifest["n"] = n;
    manifest["p"] = p;
    bqtf::write_vector_csv(fs::path(out_dir) / "truth.csv",
                           bqtf::chain_truth(signal, nk, n, p), "value");
    for (int r = 0; r < reps; ++r) {
      bqtf::Rng rng(bqtf::mix_seed(seed, static_cast<std::uint64_t>(r)));
      char name[32];
      std::snprintf(name, sizeof(name), "dataset_%03d.csv", r);
      bqtf::write_vector_csv(fs::path(out_dir) / name,
                             bqtf::chain_observations(signal, nk, n, rng), "value");
    }
  }
  bqtf::write_edge_list_csv(fs::path(out_dir) / "edges.csv", graph);
  manifest["graph"] = graph_json(graph);
  manifest["files"] = {{"truth", "truth.csv"}, {"edges", "edges.csv"}};
  bqtf::write_json(fs::path(out_dir) / "manifest.json", manifest);
  return 0;
}

int run_benchmark(const bqtf::BenchConfig& cfg, const std::string& out_dir) {
  const bqtf::BenchTable table = bqtf::run_benchmark(cfg);
  fs::create_directories(out_dir);
  auto out = bqtf::open_output(fs::path(out_dir) / "metrics.csv");
  out << "method,prior";
  const char* names[4] = {"mse", "mad", "mciw", "cp"};
  for (const char* metric : names)
    for (double p : cfg.p_levels) out << ',' << metric << "_p" << p;
  out << '\n';
  for (bqtf::Method method : cfg.methods) {
    for (bqtf::PriorFamily prior : cfg.priors) {
      out << bqtf::to_string(method) << ',' << bqtf::to_string(prior);
      for (int metric = 0; metric < 4; ++metric) {
        for (double p : cfg.p_levels) {
          const bqtf::Metrics avg = table.cell(method, prior, p).average();
          const double v = metric == 0   ? avg.mse
                           : metric == 1 ? avg.mad
                           : metric == 2 ? avg.mciw
                                         : avg.cp;
          out << ',' << bqtf::fmt_g17(v);
        }
      }
      out << '\n';
    }
  }
  json meta;
  meta["scenario"] = bqtf::to_string(cfg.signal);
  meta["noise"] = bqtf::to_string(cfg.noise);
  meta["k"] = cfg.k;
  meta["replications"] = cfg.replications;
  meta["master_seed"] = cfg.seed;
  meta["protocol"] = cfg.protocol;
  bqtf::write_json(fs::path(out_dir) / "meta.json", meta);
  return 0;
}

int run_diffop(const GraphSource& gs, int k, const std::string& out_dir) {
  const bqtf::Graph graph = gs.build();
  bqtf::DifferenceOperator op;
  if (graph.weighted()) {
    if (k != 1)
      throw std::invalid_argument("weighted graphs define only the adjusted k=1 operator");
    op = bqtf::adjusted_second_difference(graph);
  } else {
    op = bqtf::higher_difference_operator(graph, k);
  }
  const bqtf::DifferenceOperator reg =
      bqtf::regularize_operator(op, graph.n_vertices);
  fs::create_directories(out_dir);
  auto out = bqtf::open_output(fs::path(out_dir) / "operator.csv");
  out << "row,col,value\n";
  for (Eigen::Index r = 0; r < op.matrix.rows(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(op.matrix, r);
         it; ++it)
      out << (r + 1) << ',' << (it.col() + 1) << ',' << bqtf::fmt_g17(it.value())
          << '\n';
  json meta;
  meta["order"] = op.order;
  meta["rows"] = op.matrix.rows();
  meta["cols"] = op.matrix.cols();
  meta["nonzeros"] = op.matrix.nonZeros();
  std::vector<long> fixed;
  for (Eigen::Index r : reg.fixed_rows) fixed.push_back(static_cast<long>(r) + 1);
  meta["fixed_rows"] = fixed;  // 1-based rows of the regularized operator
  meta["graph"] = graph_json(graph);
  bqtf::write_json(fs::path(out_dir) / "meta.json", meta);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian quantile trend filtering on graphs"};
  app.require_subcommand(1);
  app.set_config("--config");

  GraphSource gs_fit, gs_diffop;
  std::string data_path, out_dir = "bqtf_out";
  bqtf::ModelSpec spec;
  std::string prior = "horseshoe", method = "mcmc";
  bqtf::SamplingProtocol prot;
  bqtf::VbOptions vb_opts;
  std::uint64_t seed = 1;

  auto* fit = app.add_subcommand("fit", "fit one model to one dataset");
  fit->add_option("--data", data_path, "observation CSV (node,value)")->required();
  gs_fit.add_options(fit);
  fit->add_option("--p", spec.p, "quantile level in (0,1)");
  fit->add_option("--k", spec.k, "difference order minus one (k >= 0)");
  fit->add_option("--prior", prior, "normal | laplace | horseshoe");
  fit->add_option("--method", method, "mcmc | vb");
  fit->add_option("--iters", prot.iterations, "MCMC iterations");
  fit->add_option("--burnin", prot.burn_in, "MCMC burn-in");
  fit->add_option("--thin", prot.thin, "MCMC thinning");
  fit->add_option("--max-iter", vb_opts.max_iter, "VB iteration cap");
  fit->add_option("--tol", vb_opts.tol, "VB convergence tolerance");
  fit->add_option("--seed", seed, "random seed");
  fit->add_option("--a-sigma", spec.a_sigma, "sigma2 prior shape");
  fit->add_option("--b-sigma", spec.b_sigma, "sigma2 prior rate");
  fit->add_option("--out", out_dir, "output directory");

  std::string scenario = "pc", noise = "gauss", lattice_dims;
  int sim_n = 100, reps = 100;
  double mu = 10.0, sim_p = 0.5;
  auto* sim = app.add_subcommand("simulate", "write benchmark scenario files");
  sim->add_option("--scenario", scenario, "pc | vs | lattice")->required();
  sim->add_option("--noise", noise, "gauss | beta | mixed");
  sim->add_option("--n", sim_n, "chain length");
  sim->add_option("--lattice", lattice_dims, "lattice dims RxC");
  sim->add_option("--mu", mu, "outlier magnitude (lattice)");
  sim->add_option("--p", sim_p, "quantile level for the truth file");
  sim->add_option("--reps", reps, "replication count");
  sim->add_option("--seed", seed, "master seed");
  sim->add_option("--out", out_dir, "output directory");

  bqtf::BenchConfig bench_cfg;
  std::string bench_scenario = "pc", bench_noise = "gauss";
  std::vector<std::string> bench_priors{"horseshoe", "laplace", "normal"};
  std::vector<std::string> bench_methods{"mcmc", "vb"};
  auto* bench = app.add_subcommand("benchmark", "replicated scenario benchmark");
  bench->add_option("--scenario", bench_scenario, "pc | vs | lattice");
  bench->add_option("--noise", bench_noise, "gauss | beta | mixed | contaminated");
  bench->add_option("--k", bench_cfg.k, "difference order minus one");
  bench->add_option("--n", bench_cfg.n, "chain length");
  bench->add_option("--lattice", lattice_dims, "lattice dims RxC");
  bench->add_option("--mu", bench_cfg.mu, "outlier magnitude (lattice)");
  bench->add_option("--p-levels", bench_cfg.p_levels, "quantile levels");
  bench->add_option("--priors", bench_priors, "prior grid");
  bench->add_option("--methods", bench_methods, "method grid");
  bench->add_option("--reps", bench_cfg.replications, "replication count");
  bench->add_option("--iters", bench_cfg.protocol.iterations, "MCMC iterations");
  bench->add_option("--burnin", bench_cfg.protocol.burn_in, "MCMC burn-in");
  bench->add_option("--thin", bench_cfg.protocol.thin, "MCMC thinning");
  bench->add_option("--max-iter", bench_cfg.vb.max_iter, "VB iteration cap");
  bench->add_option("--tol", bench_cfg.vb.tol, "VB convergence tolerance");
  bench->add_option("--a-sigma", bench_cfg.a_sigma, "sigma2 prior shape");
  bench->add_option("--b-sigma", bench_cfg.b_sigma, "sigma2 prior rate");
  bench->add_option("--seed", bench_cfg.seed, "master seed");
  bench->add_option("--threads", bench_cfg.threads, "worker pool size");
  bench->add_option("--out", out_dir, "output directory");

  int diff_k = 0;
  auto* diffop = app.add_subcommand("diffop", "dump a difference operator");
  gs_diffop.add_options(diffop);
  diffop->add_option("--k", diff_k, "difference order minus one");
  diffop->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (fit->parsed()) {
      if (!gs_fit.configured())
        throw std::invalid_argument("fit: give one of --edges/--chain/--lattice");
      spec.prior = bqtf::prior_from_string(prior);
      prot.seed = seed;
      return run_fit(gs_fit, data_path, spec, method, prot, vb_opts, out_dir);
    }
    if (sim->parsed())
      return run_simulate(scenario, noise, sim_n, lattice_dims, mu, sim_p, reps,
                          seed, out_dir);
    if (bench->parsed()) {
      bench_cfg.signal = bqtf::signal_from_string(bench_scenario);
      bench_cfg.noise = bqtf::noise_from_string(bench_noise);
      if (!lattice_dims.empty()) {
        const auto sep = lattice_dims.find_first_of("xX");
        bench_cfg.rows = std::stoi(lattice_dims.substr(0, sep));
        bench_cfg.cols = std::stoi(lattice_dims.substr(sep + 1));
      }
      bench_cfg.priors.clear();
      for (const auto& s : bench_priors)
        bench_cfg.priors.push_back(bqtf::prior_from_string(s));
      bench_cfg.methods.clear();
      for (const auto& s : bench_methods)
        bench_cfg.methods.push_back(bqtf::method_from_string(s));
      return run_benchmark(bench_cfg, out_dir);
    }
    if (diffop->parsed()) {
      if (!gs_diffop.configured())
        throw std::invalid_argument("diffop: give one of --edges/--chain/--lattice");
      return run_diffop(gs_diffop, diff_k, out_dir);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
