#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bqtf/gibbs.hpp"
#include "bqtf/model.hpp"
#include "bqtf/posterior.hpp"
#include "bqtf/vb.hpp"

namespace bqtf {

// full round-trip decimal formatting so downstream comparisons are exact
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

inline void write_summary_csv(const std::filesystem::path& path,
                              const FitSummary& s) {
  auto out = open_output(path);
  out << "node,point,lower,upper\n";
  for (Eigen::Index i = 0; i < s.point.size(); ++i) {
    out << (i + 1) << ',' << fmt_g17(s.point[i]) << ',' << fmt_g17(s.lower[i])
        << ',' << fmt_g17(s.upper[i]) << '\n';
  }
}

inline void write_samples_csv(const std::filesystem::path& path,
                              const PosteriorSamples& s) {
  auto out = open_output(path);
  for (Eigen::Index i = 0; i < s.theta.cols(); ++i)
    out << "theta_" << (i + 1) << ',';
  out << "sigma2,tau2\n";
  for (Eigen::Index r = 0; r < s.theta.rows(); ++r) {
    for (Eigen::Index i = 0; i < s.theta.cols(); ++i)
      out << fmt_g17(s.theta(r, i)) << ',';
    out << fmt_g17(s.sigma2[r]) << ',' << fmt_g17(s.tau2[r]) << '\n';
  }
}

inline void write_vb_state_csv(const std::filesystem::path& path,
                               const VbResult& r) {
  auto out = open_output(path);
  out << "node,theta_mean,theta_var\n";
  for (Eigen::Index i = 0; i < r.state.theta_mean.size(); ++i) {
    out << (i + 1) << ',' << fmt_g17(r.state.theta_mean[i]) << ','
        << fmt_g17(r.state.theta_var[i]) << '\n';
  }
}

inline void write_metrics_csv(const std::filesystem::path& path,
                              const Metrics& m) {
  auto out = open_output(path);
  out << "mse,mad,mciw,cp\n";
  out << fmt_g17(m.mse) << ',' << fmt_g17(m.mad) << ',' << fmt_g17(m.mciw)
      << ',' << fmt_g17(m.cp) << '\n';
}

inline void write_vector_csv(const std::filesystem::path& path,
                             const Eigen::VectorXd& v,
                             const std::string& value_name = "value") {
  auto out = open_output(path);
  out << "node," << value_name << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out << (i + 1) << ',' << fmt_g17(v[i]) << '\n';
}

inline void write_edge_list_csv(const std::filesystem::path& path,
                                const Graph& g) {
  auto out = open_output(path);
  out << (g.weighted() ? "u,v,w\n" : "u,v\n");
  for (std::size_t l = 0; l < g.edges.size(); ++l) {
    out << (g.edges[l].u + 1) << ',' << (g.edges[l].v + 1);
    if (g.weighted()) out << ',' << fmt_g17(g.weights[l]);
    out << '\n';
  }
}

inline void to_json(nlohmann::json& j, const TruncationBounds& b) {
  j = {{"lower", b.lower}, {"upper", b.upper}};
}

inline void from_json(const nlohmann::json& j, TruncationBounds& b) {
  j.at("lower").get_to(b.lower);
  j.at("upper").get_to(b.upper);
}

inline void to_json(nlohmann::json& j, const ModelSpec& s) {
  j = {{"p", s.p},
       {"k", s.k},
       {"prior", to_string(s.prior)},
       {"a_sigma", s.a_sigma},
       {"b_sigma", s.b_sigma},
       {"bounds", s.bounds}};
}

inline void from_json(const nlohmann::json& j, ModelSpec& s) {
  j.at("p").get_to(s.p);
  j.at("k").get_to(s.k);
  s.prior = prior_from_string(j.at("prior").get<std::string>());
  j.at("a_sigma").get_to(s.a_sigma);
  j.at("b_sigma").get_to(s.b_sigma);
  j.at("bounds").get_to(s.bounds);
}

inline void to_json(nlohmann::json& j, const SamplingProtocol& p) {
  j = {{"iterations", p.iterations},
       {"burn_in", p.burn_in},
       {"thin", p.thin},
       {"seed", p.seed}};
}

inline void write_json(const std::filesystem::path& path,
                       const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace bqtf
