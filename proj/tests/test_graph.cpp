#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include "rlap/errors.hpp"
#include "rlap/graph.hpp"

using namespace rlap;

namespace {

SparseGraph parse(const std::string& text) {
  std::istringstream in(text);
  return parse_edge_list(in);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::path(RLAP_TEST_DATA_DIR) / name;
}

SparseGraph random_graph(NodeId n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (coin(rng)) edges.emplace_back(i, j);
  return SparseGraph::from_edges(n, edges);
}

}  // namespace

TEST_CASE("triangle file") {
  const auto g = parse("0 1\n1 2\n0 2\n");
  CHECK(g.num_nodes() == 3);
  CHECK(g.num_edges() == 3);
  for (NodeId i = 0; i < 3; ++i) CHECK(g.degree(i) == 2);
  CHECK(g.check_invariants().empty());
}

TEST_CASE("duplicate and reversed edges collapse") {
  const auto g = parse("# n 2\n0 1\n1 0\n0 1\n");
  CHECK(g.num_nodes() == 2);
  CHECK(g.num_edges() == 1);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(1) == 1);
}

TEST_CASE("header keeps trailing isolated nodes") {
  const auto g = parse("# n 6\n0 1\n");
  CHECK(g.num_nodes() == 6);
  CHECK(g.degree(5) == 0);
}

TEST_CASE("malformed lines report their line number") {
  try {
    parse("0 1\n1 x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("0 1 2\n"), ParseError);
  CHECK_THROWS_AS(parse("3 3\n"), ParseError);
  CHECK_THROWS_AS(parse("-1 2\n"), ParseError);
}

TEST_CASE("index beyond declared n is a bounds error") {
  try {
    parse("# n 3\n0 1\n1 3\n");
    FAIL("expected a bounds error");
  } catch (const BoundsError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("edge list round trip") {
  const auto g = random_graph(100, 0.05, 7);
  const auto path = temp_path("roundtrip.edges");
  const std::vector<std::string> comments{"config model.n = 100"};
  save_edge_list(g, path, comments);
  const auto h = load_edge_list(path);
  CHECK(h == g);
  CHECK(std::equal(h.row_offsets().begin(), h.row_offsets().end(), g.row_offsets().begin(), g.row_offsets().end()));
  CHECK(std::equal(h.col_indices().begin(), h.col_indices().end(), g.col_indices().begin(), g.col_indices().end()));
}

TEST_CASE("missing file is an i/o error") {
  CHECK_THROWS_AS(load_edge_list(temp_path("does-not-exist.edges")), IoError);
}

TEST_CASE("label round trip") {
  const std::vector<int> labels{0, 2, 1, 1, 0};
  const auto path = temp_path("labels.txt");
  save_labels(labels, path);
  CHECK(load_labels(path) == labels);
}

TEST_CASE("from_edges rejects self-loops and bad indices") {
  const std::vector<Edge> loop{{1, 1}};
  CHECK_THROWS_AS(SparseGraph::from_edges(3, loop), std::invalid_argument);
  const std::vector<Edge> out_of_range{{0, 3}};
  CHECK_THROWS_AS(SparseGraph::from_edges(3, out_of_range), std::invalid_argument);
}

TEST_CASE("estimate_c_phi by hand") {
  // K5: every degree is 4, so 16*5/(4*5) - 1 = 3.
  std::vector<Edge> k5;
  for (NodeId i = 0; i < 5; ++i)
    for (NodeId j = i + 1; j < 5; ++j) k5.emplace_back(i, j);
  CHECK(estimate_c_phi(SparseGraph::from_edges(5, k5)) == doctest::Approx(3.0));

  // Star with 5 leaves: (25 + 5) / 10 - 1 = 2.
  std::vector<Edge> star;
  for (NodeId j = 1; j <= 5; ++j) star.emplace_back(0, j);
  CHECK(estimate_c_phi(SparseGraph::from_edges(6, star)) == doctest::Approx(2.0));

  CHECK_THROWS(estimate_c_phi(SparseGraph::from_edges(4, {})));
}

TEST_CASE("estimate_c_phi is invariant under relabeling") {
  const auto g = random_graph(200, 0.03, 11);
  std::vector<NodeId> perm(200);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  const auto h = g.permuted(perm);
  CHECK(h.check_invariants().empty());
  CHECK(h.num_edges() == g.num_edges());
  CHECK(estimate_c_phi(h) == doctest::Approx(estimate_c_phi(g)).epsilon(1e-14));
}

TEST_CASE("components and induced subgraphs") {
  const auto g = parse("# n 7\n0 1\n1 2\n3 4\n");
  const auto comp = g.components();
  CHECK(comp == std::vector<NodeId>{0, 0, 0, 1, 1, 2, 3});
  const auto keep = largest_component(g);
  CHECK(keep == std::vector<NodeId>{0, 1, 2});
  const auto sub = g.induced(keep);
  CHECK(sub.num_nodes() == 3);
  CHECK(sub.num_edges() == 2);
  CHECK(non_isolated_nodes(g) == std::vector<NodeId>{0, 1, 2, 3, 4});
}

TEST_CASE("config validation") {
  const auto theta = ThetaSpec::constant();
  Eigen::MatrixXd c(2, 2);
  c << 8, 2, 2, 8;
  CHECK_NOTHROW(DcsbmConfig(100, c, Eigen::Vector2d(0.5, 0.5), theta));
  CHECK_THROWS_AS(DcsbmConfig(100, c, Eigen::Vector2d(0.6, 0.5), theta), std::invalid_argument);
  CHECK_THROWS_AS(DcsbmConfig(100, c, Eigen::Vector2d(1.0, 0.0), theta), std::invalid_argument);
  Eigen::MatrixXd asym(2, 2);
  asym << 8, 2, 3, 8;
  CHECK_THROWS_AS(DcsbmConfig(100, asym, Eigen::Vector2d(0.5, 0.5), theta), std::invalid_argument);
  Eigen::MatrixXd uneven(2, 2);
  uneven << 8, 2, 2, 9;  // rows of C Pi 1 differ
  CHECK_THROWS_AS(DcsbmConfig(100, uneven, Eigen::Vector2d(0.5, 0.5), theta), std::invalid_argument);
  Eigen::MatrixXd negative(2, 2);
  negative << 12, -2, -2, 12;
  CHECK_THROWS_AS(DcsbmConfig(100, negative, Eigen::Vector2d(0.5, 0.5), theta), std::invalid_argument);
  CHECK_THROWS_AS(generate_dcsbm(DcsbmConfig::planted(1, 1, 1, 1, theta), 0), std::invalid_argument);
  CHECK_THROWS_AS(DcsbmConfig::planted(100, 2, 8, 2, ThetaSpec::uniform_power(0.0, 1.0, 1.0)), std::invalid_argument);
}

TEST_CASE("theta spec text form") {
  const auto t = ThetaSpec::parse("uniform 3 15 ^ 5");
  CHECK(t.kind == ThetaSpec::Kind::Uniform);
  CHECK(t.low == 3.0);
  CHECK(t.high == 15.0);
  CHECK(t.power == 5.0);
  const auto u = ThetaSpec::parse(t.to_string());
  CHECK(u.low == t.low);
  CHECK(u.power == t.power);
  CHECK(ThetaSpec::parse("uniform 1 2").power == 1.0);
  CHECK_THROWS_AS(ThetaSpec::parse("gamma 1 2"), ConfigError);
  CHECK_THROWS_AS(ThetaSpec::parse("uniform 1"), ConfigError);
}

TEST_CASE("ground truth invariants") {
  const auto cfg = DcsbmConfig::planted(4000, 3, 18, 1, ThetaSpec::uniform_power(3, 15, 5));
  const auto gen = generate_dcsbm(cfg, 5);
  const auto& t = gen.truth;
  const double mean = std::accumulate(t.theta.begin(), t.theta.end(), 0.0) / t.theta.size();
  CHECK(std::abs(mean - 1.0) < 1e-12);
  CHECK(std::all_of(t.theta.begin(), t.theta.end(), [](double v) { return v > 0.0; }));
  CHECK(t.c == doctest::Approx(20.0 / 3.0));
  CHECK(std::abs(t.model_eigs[0] - t.c) <= 1e-6 * t.c);
  // CPi = (18 - 1)/3 I + (1/3) 11^T: remaining eigenvalues are 17/3.
  CHECK(t.model_eigs[1] == doctest::Approx(17.0 / 3.0));
  double phi = 0.0;
  for (double v : t.theta) phi += v * v;
  CHECK(t.phi == doctest::Approx(phi / t.theta.size()));
  CHECK(std::all_of(t.labels.begin(), t.labels.end(), [](int l) { return l >= 0 && l < 3; }));
}

TEST_CASE("Phi of the limiting theta distribution") {
  const auto spec = ThetaSpec::uniform_power(3, 15, 5);
  // E[X^10] / E[X^5]^2 for X ~ U(3, 15), computed independently.
  const double m5 = (std::pow(15.0, 6) - std::pow(3.0, 6)) / (6.0 * 12.0);
  const double m10 = (std::pow(15.0, 11) - std::pow(3.0, 11)) / (11.0 * 12.0);
  CHECK(spec.expected_phi() == doctest::Approx(m10 / (m5 * m5)).epsilon(1e-12));
  const auto gen = generate_dcsbm(DcsbmConfig::planted(50000, 2, 8, 2, spec), 1);
  CHECK(gen.truth.phi == doctest::Approx(spec.expected_phi()).epsilon(0.05));
}

TEST_CASE("generated graphs satisfy the structural invariants") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const NodeId n = 50 + static_cast<NodeId>(rng() % 400);
    const int k = 1 + static_cast<int>(rng() % 4);
    const double c_out = static_cast<double>(rng() % 5);
    const double c_in = c_out + static_cast<double>(rng() % 20);
    const double power = 1.0 + static_cast<double>(rng() % 5);
    const auto cfg = DcsbmConfig::planted(n, k, c_in, c_out, ThetaSpec::uniform_power(1, 4, power));
    const auto gen = generate_dcsbm(cfg, rng());
    CHECK_MESSAGE(gen.graph.check_invariants().empty(), "trial " << trial);
    CHECK(gen.graph.num_nodes() == n);
  }
}

TEST_CASE("generation is deterministic per seed") {
  const auto cfg = DcsbmConfig::planted(3000, 2, 17, 3, ThetaSpec::uniform_power(3, 15, 5));
  const auto a = generate_dcsbm(cfg, 99);
  const auto b = generate_dcsbm(cfg, 99);
  const auto c = generate_dcsbm(cfg, 100);
  CHECK(a.graph == b.graph);
  CHECK(a.truth.labels == b.truth.labels);
  CHECK_FALSE(a.graph == c.graph);
}

TEST_CASE("zero affinity gives no edges") {
  const auto gen = generate_dcsbm(DcsbmConfig::planted(500, 2, 0, 0, ThetaSpec::uniform_power(3, 7, 3)), 1);
  CHECK(gen.graph.num_edges() == 0);
}

TEST_CASE("mean degree in the sparse regime") {
  const auto cfg = DcsbmConfig::planted(5000, 2, 8, 2, ThetaSpec::uniform_power(3, 7, 3));
  const auto gen = generate_dcsbm(cfg, 17);
  const double mean = 2.0 * gen.graph.num_edges() / gen.graph.num_nodes();
  CHECK(mean == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("estimate_c_phi tracks the model value") {
  const auto cfg = DcsbmConfig::planted(5000, 2, 15, 5, ThetaSpec::uniform_power(3, 15, 5));
  const auto gen = generate_dcsbm(cfg, 4);
  CHECK(estimate_c_phi(gen.graph) == doctest::Approx(gen.truth.c * gen.truth.phi).epsilon(0.10));
}

TEST_CASE("block edge frequencies match the model (Monte Carlo)") {
  // Model fixed, edges resampled: per block, the mean edge count over R draws
  // must sit within 3 standard errors of sum p_ij.
  const NodeId n = 200;
  Eigen::MatrixXd aff(2, 2);
  aff << 30, 6, 6, 30;
  const auto cfg = DcsbmConfig(n, aff, Eigen::Vector2d(0.5, 0.5), ThetaSpec::uniform_power(1, 3, 2));
  std::mt19937_64 rng(8);
  const auto truth = sample_model(cfg, rng);

  double expected[2][2] = {{0, 0}, {0, 0}};
  double variance[2][2] = {{0, 0}, {0, 0}};
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) {
      const int a = std::min(truth.labels[i], truth.labels[j]);
      const int b = std::max(truth.labels[i], truth.labels[j]);
      const double p = std::min(1.0, truth.theta[i] * truth.theta[j] * aff(a, b) / n);
      expected[a][b] += p;
      variance[a][b] += p * (1.0 - p);
    }

  const int R = 500;
  double total[2][2] = {{0, 0}, {0, 0}};
  for (int rep = 0; rep < R; ++rep) {
    const auto g = sample_edges(truth, aff, rng);
    for (const auto& [i, j] : g.edge_list()) {
      const int a = std::min(truth.labels[i], truth.labels[j]);
      const int b = std::max(truth.labels[i], truth.labels[j]);
      total[a][b] += 1.0;
    }
  }
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b) {
      const double mean = total[a][b] / R;
      const double se = std::sqrt(variance[a][b] / R);
      CHECK_MESSAGE(std::abs(mean - expected[a][b]) < 3.0 * se,
                    "block " << a << b << " mean " << mean << " expected " << expected[a][b] << " se " << se);
    }
}

TEST_CASE("per-node mean degree converges to c theta_i") {
  const NodeId n = 500;
  const auto cfg = DcsbmConfig::planted(n, 2, 25, 15, ThetaSpec::uniform_power(1, 2, 1));
  std::mt19937_64 rng(21);
  const auto truth = sample_model(cfg, rng);
  std::vector<double> sum(n, 0.0);
  const int R = 200;
  for (int rep = 0; rep < R; ++rep) {
    const auto g = sample_edges(truth, cfg.affinity(), rng);
    for (NodeId i = 0; i < n; ++i) sum[i] += g.degree(i);
  }
  double worst = 0.0;
  for (NodeId i = 0; i < n; ++i) {
    const double target = truth.c * truth.theta[i];
    worst = std::max(worst, std::abs(sum[i] / R - target) / target);
  }
  CHECK(worst < 0.15);
}
