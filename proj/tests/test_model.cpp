#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "bqtf/io.hpp"
#include "bqtf/model.hpp"

using namespace bqtf;
using Catch::Approx;

TEST_CASE("augmentation constants") {
  auto [psi, t2] = derive_augmentation_constants(0.5);
  CHECK(psi == 0.0);
  CHECK(t2 == 8.0);
  auto [psi25, t225] = derive_augmentation_constants(0.25);
  CHECK(psi25 == Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(t225 == Approx(32.0 / 3.0).epsilon(1e-15));
  auto [psi75, t275] = derive_augmentation_constants(0.75);
  CHECK(psi75 == Approx(-8.0 / 3.0).epsilon(1e-15));
  CHECK(t275 == Approx(32.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(derive_augmentation_constants(0.0), std::invalid_argument);
  CHECK_THROWS_AS(derive_augmentation_constants(1.0), std::invalid_argument);
}

TEST_CASE("model spec recomputes derived constants") {
  ModelSpec spec;
  spec.p = 0.25;
  CHECK(spec.psi() == Approx(8.0 / 3.0));
  spec.p = 0.75;
  CHECK(spec.psi() == Approx(-8.0 / 3.0));
  CHECK(spec.t2() == Approx(32.0 / 3.0));
}

TEST_CASE("validate_spec") {
  ModelSpec spec;
  const Graph chain = build_chain_graph(100);

  SECTION("single observation per node is valid") {
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(100, 0.0, 1.0);
    const Model m = validate_spec(spec, chain, Dataset::from_vector(y));
    CHECK(m.n() == 100);
    CHECK(m.m_rows() == 100);  // 99 edge rows + 1 augmented
    CHECK(m.op.fixed_rows.size() == 1);
    CHECK(m.n_free_rows() == 99);
  }

  SECTION("multiple observations per location with a weighted chain") {
    // Munich-shaped: repeated observations on an irregular grid
    const int n = 134;
    std::vector<Edge> edges;
    std::vector<double> weights;
    for (int i = 0; i + 1 < n; ++i) {
      edges.push_back({i, i + 1});
      weights.push_back(0.5 + (i % 7) * 0.25);
    }
    const Graph weighted = make_graph(n, edges, weights);
    Dataset data;
    data.node_count = n;
    data.observations.resize(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i % 3; ++j)
        data.observations[i].push_back(0.1 * i + 0.01 * j);
    ModelSpec s2;
    s2.k = 1;
    const Model m = validate_spec(s2, weighted, data);
    CHECK(m.op.order == 2);
    CHECK(m.n() == n);

    // weights without k = 1 are rejected
    s2.k = 0;
    CHECK_THROWS_AS(validate_spec(s2, weighted, data), std::invalid_argument);
  }

  SECTION("empty dataset is rejected") {
    Dataset empty;
    empty.node_count = 100;
    empty.observations.resize(100);
    CHECK_THROWS_AS(validate_spec(spec, chain, empty), std::invalid_argument);
  }

  SECTION("dimension mismatch is rejected") {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(7);
    CHECK_THROWS_AS(validate_spec(spec, chain, Dataset::from_vector(y)),
                    std::invalid_argument);
  }

  SECTION("bad hyperparameters are rejected") {
    ModelSpec bad;
    bad.a_sigma = 0.0;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(100);
    CHECK_THROWS_AS(validate_spec(bad, chain, Dataset::from_vector(y)),
                    std::invalid_argument);
  }
}

TEST_CASE("prior state initialization") {
  ModelSpec spec;
  spec.prior = PriorFamily::horseshoe;
  const Graph chain = build_chain_graph(10);
  Eigen::VectorXd y = Eigen::VectorXd::Random(10);
  const Model m = validate_spec(spec, chain, Dataset::from_vector(y));
  const PriorState ps = init_prior_state(m);
  for (Eigen::Index r = 0; r < ps.w2.size(); ++r) {
    if (m.row_fixed[static_cast<std::size_t>(r)]) {
      CHECK(ps.w2[r] == m.spec.bounds.upper);
    } else {
      CHECK(ps.w2[r] > m.spec.bounds.lower);
      CHECK(ps.w2[r] < m.spec.bounds.upper);
    }
  }
  CHECK(ps.nu_local.size() == m.m_rows());
}

TEST_CASE("model spec json round trip is bit exact") {
  ModelSpec spec;
  spec.p = 0.3141592653589793;
  spec.k = 2;
  spec.prior = PriorFamily::laplace;
  spec.a_sigma = 0.017;
  spec.b_sigma = 123.456789;
  nlohmann::json j = spec;
  const auto back = j.get<ModelSpec>();
  CHECK(back.p == spec.p);
  CHECK(back.k == spec.k);
  CHECK(back.prior == spec.prior);
  CHECK(back.psi() == spec.psi());
  CHECK(back.t2() == spec.t2());
  CHECK(back.bounds.lower == spec.bounds.lower);
}

TEST_CASE("observation file loading") {
  const auto dir = std::filesystem::temp_directory_path() / "bqtf_model_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "obs.csv");
    out << "node,value\n1,0.5\n2,1.5\n1,0.25\n3,-1\n";
  }
  const Dataset d = load_observations((dir / "obs.csv").string());
  REQUIRE(d.node_count == 3);
  CHECK(d.total() == 4);
  CHECK(d.observations[0].size() == 2);
  CHECK(d.observations[0][1] == 0.25);
  CHECK_THROWS_AS(load_observations((dir / "nope.csv").string()),
                  std::invalid_argument);
}
