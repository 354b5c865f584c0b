#include <doctest.h>

#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "dgtd/graph.hpp"

using namespace dgtd;

namespace {

GraphDistribution path(int n, double p) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
  return GraphDistribution::uniform_bernoulli(n, pairs, p);
}

GraphDistribution complete(int n, double p) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  return GraphDistribution::uniform_bernoulli(n, pairs, p);
}

double min_eigenvalue(const MatrixXd& L) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(L, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

}  // namespace

TEST_CASE("sampled Laplacians") {
  Rng rng(3);
  const auto full = complete(5, 1.0);
  const MatrixXd base = mean_laplacian(full).laplacian();
  for (int k = 0; k < 20; ++k) CHECK(sample_graph(full, rng).laplacian() == base);

  const auto half = complete(5, 0.5);
  for (int k = 0; k < 200; ++k) {
    const LaplacianView L = sample_graph(half, rng);
    CHECK((L.laplacian() * VectorXd::Ones(5)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((L.laplacian() - L.laplacian().transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(min_eigenvalue(L.laplacian()) >= -1e-12);
  }

  const auto edge = GraphDistribution::uniform_bernoulli(2, {{0, 1}}, 0.5);
  int on = 0;
  for (int k = 0; k < 100'000; ++k) on += sample_graph(edge, rng).edges().size();
  CHECK(on / 1e5 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("sampling is reproducible for a fixed seed") {
  const auto dist = complete(6, 0.4);
  Rng a(99), b(99);
  for (int k = 0; k < 100; ++k) CHECK(sample_graph(dist, a).edges() == sample_graph(dist, b).edges());
}

TEST_CASE("mean Laplacian") {
  const auto edge = GraphDistribution::uniform_bernoulli(2, {{0, 1}}, 0.3);
  MatrixXd expected(2, 2);
  expected << 0.3, -0.3, -0.3, 0.3;
  CHECK((mean_laplacian(edge).laplacian() - expected).cwiseAbs().maxCoeff() <= 1e-15);

  Rng rng(5);
  const auto dist = complete(4, 0.35);
  MatrixXd sum = MatrixXd::Zero(4, 4);
  for (int k = 0; k < 100'000; ++k) sum += sample_graph(dist, rng).laplacian();
  CHECK((sum / 1e5 - mean_laplacian(dist).laplacian()).cwiseAbs().maxCoeff() <= 0.02);

  const auto mix = GraphDistribution::mixture(
      3, {{1.0, {{0, 1, 1.0}}}, {3.0, {{1, 2, 1.0}, {0, 1, 1.0}}}});
  MatrixXd mix_sum = MatrixXd::Zero(3, 3);
  for (int k = 0; k < 100'000; ++k) mix_sum += sample_graph(mix, rng).laplacian();
  CHECK((mix_sum / 1e5 - mean_laplacian(mix).laplacian()).cwiseAbs().maxCoeff() <= 0.02);
  CHECK(mean_laplacian(mix).laplacian()(1, 2) == doctest::Approx(-0.75));
}

TEST_CASE("mean connectivity") {
  const auto cliques = GraphDistribution::uniform_bernoulli(
      6, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}}, 1.0);
  try {
    assert_mean_connectivity(cliques);
    FAIL("expected NotConnected");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotConnected);
  }
  CHECK(assert_mean_connectivity(path(3, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  for (int n : {2, 4, 7}) {
    CHECK(assert_mean_connectivity(complete(n, 1.0)) == doctest::Approx(n).epsilon(1e-12));
  }
}

TEST_CASE("lambda_2 never decreases when an edge is added") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform() * 5);
    std::vector<Edge> edges;
    std::vector<std::pair<int, int>> missing;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.bernoulli(0.5)) {
          edges.push_back({i, j, 1.0});
        } else {
          missing.emplace_back(i, j);
        }
      }
    }
    if (missing.empty()) continue;
    const double before = LaplacianView(n, edges).algebraic_connectivity();
    const auto [i, j] = missing[static_cast<std::size_t>(rng.uniform() * missing.size())];
    edges.push_back({i, j, 1.0});
    CHECK(LaplacianView(n, edges).algebraic_connectivity() >= before - 1e-12);
  }
}

TEST_CASE("Laplacian pseudo-inverse") {
  const LaplacianView k2(2, {{0, 1, 1.0}});
  CHECK((laplacian_pseudoinverse(k2) - k2.laplacian() / 4.0).cwiseAbs().maxCoeff() <= 1e-12);

  for (const auto& dist : {path(5, 1.0), complete(5, 0.6), path(5, 0.3)}) {
    const MatrixXd L = mean_laplacian(dist).laplacian();
    const MatrixXd P = laplacian_pseudoinverse(mean_laplacian(dist));
    CHECK((L * P * L - L).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((P * L * P - P).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(((L * P).transpose() - L * P).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(((P * L).transpose() - P * L).cwiseAbs().maxCoeff() <= 1e-9);
    const MatrixXd centering = MatrixXd::Identity(5, 5) - MatrixXd::Constant(5, 5, 0.2);
    CHECK((P * L - centering).cwiseAbs().maxCoeff() <= 1e-9);
  }

  const LaplacianView split(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  CHECK_THROWS_AS(laplacian_pseudoinverse(split), Error);
}

TEST_CASE("stacked Laplacian") {
  const LaplacianView L = mean_laplacian(complete(3, 0.7));
  Rng rng(21);
  VectorXd x(3);
  for (int j = 0; j < 3; ++j) x(j) = rng.uniform(-1, 1);
  const StackedLaplacian one(L, 1);
  CHECK((one.apply(x) - L.laplacian() * x).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((one.dense() - L.laplacian()).cwiseAbs().maxCoeff() == 0.0);

  const StackedLaplacian two(L, 2);
  VectorXd consensus(6);
  consensus << 1.5, -2.0, 1.5, -2.0, 1.5, -2.0;
  CHECK(two.apply(consensus).cwiseAbs().maxCoeff() <= 1e-15);

  VectorXd w(6);
  for (int j = 0; j < 6; ++j) w(j) = rng.uniform(-3, 3);
  const MatrixXd kron = Eigen::kroneckerProduct(L.laplacian(), MatrixXd::Identity(2, 2));
  CHECK((two.apply(w) - kron * w).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((two.dense() - kron).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(two.quadratic(w) == doctest::Approx(w.dot(kron * w)).epsilon(1e-12));

  const StackedLaplacian huge(LaplacianView(100, {{0, 1, 1.0}}), 6);
  CHECK_THROWS_AS(huge.dense(), Error);
}

TEST_CASE("edge list text format") {
  std::istringstream in("# agents 1..3\n1 2 0.5\n2 3 1   # always up\n\n");
  const auto dist = GraphDistribution::parse_edge_list(3, in);
  REQUIRE(dist.base_edges().size() == 2);
  CHECK(dist.base_edges()[0] == Edge{0, 1, 0.5});
  CHECK(dist.base_edges()[1] == Edge{1, 2, 1.0});

  std::ostringstream out;
  const auto odd = GraphDistribution::uniform_bernoulli(3, {{0, 2}}, 0.1 + 0.2);
  odd.write_edge_list(out);
  std::istringstream back(out.str());
  CHECK(GraphDistribution::parse_edge_list(3, back).base_edges() == odd.base_edges());

  std::istringstream bad("1 2\n");
  CHECK_THROWS_AS(GraphDistribution::parse_edge_list(3, bad), Error);
  std::istringstream loop("2 2 0.5\n");
  CHECK_THROWS_AS(GraphDistribution::parse_edge_list(3, loop), Error);
  std::istringstream range("1 4 0.5\n");
  CHECK_THROWS_AS(GraphDistribution::parse_edge_list(3, range), Error);
  std::istringstream prob("1 2 1.5\n");
  CHECK_THROWS_AS(GraphDistribution::parse_edge_list(3, prob), Error);
}
