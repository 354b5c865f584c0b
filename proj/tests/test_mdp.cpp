#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "dgtd/engine.hpp"
#include "dgtd/oracle.hpp"
#include "dgtd/presets.hpp"
#include "support.hpp"

using namespace dgtd;

namespace {

// Eigenvector of P^T for the eigenvalue closest to 1, normalized to sum 1.
VectorXd eigen_stationary(const MatrixXd& P) {
  Eigen::EigenSolver<MatrixXd> es(P.transpose());
  Eigen::Index best = 0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (std::abs(es.eigenvalues()(k) - 1.0) < std::abs(es.eigenvalues()(best) - 1.0)) best = k;
  }
  VectorXd v = es.eigenvectors().col(best).real();
  return v / v.sum();
}

MdpModel two_state(const MatrixXd& P) {
  MdpModel m;
  m.transition = P;
  m.agent_rewards = {VectorXd::Zero(P.rows())};
  m.sigma = 1.0;
  m.gamma = 0.9;
  return m;
}

}  // namespace

TEST_CASE("stationary distribution: reducible and periodic chains") {
  CHECK_THROWS_AS(stationary_distribution(two_state(MatrixXd::Identity(2, 2))), Error);
  try {
    stationary_distribution(two_state(MatrixXd::Identity(2, 2)));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonErgodic);
  }
  MatrixXd flip(2, 2);
  flip << 0, 1, 1, 0;
  const VectorXd d = stationary_distribution(two_state(flip));
  CHECK(d(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("stationary distribution of the 4-state chain") {
  const MdpModel m = chain4_model(5);
  const VectorXd d = stationary_distribution(m);
  CHECK((d.transpose() * m.transition - d.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((d - eigen_stationary(m.transition)).cwiseAbs().maxCoeff() <= 1e-10);
  // Frozen from the eigensolve above.
  CHECK(d(0) == doctest::Approx(0.23161764705882354).epsilon(1e-9));
  CHECK(d(3) == doctest::Approx(0.38051470588235292).epsilon(1e-9));

  // Long-run visit frequencies of a single trajectory.
  Rng rng(7);
  const BellmanMatrices mats = assemble_bellman(m, chain4_features());
  const TransitionSampler sampler(m, mats);
  VectorXd visits = VectorXd::Zero(4);
  int s = 0;
  std::vector<double> row_cdf(4);
  for (int k = 0; k < 1'000'000; ++k) {
    double acc = 0.0;
    for (int t = 0; t < 4; ++t) row_cdf[static_cast<std::size_t>(t)] = acc += m.transition(s, t);
    s = rng.categorical(row_cdf);
    visits(s) += 1.0;
  }
  CHECK((visits / 1e6 - d).cwiseAbs().maxCoeff() <= 1e-2);
}

TEST_CASE("model validation rejects bad inputs") {
  MdpModel m = chain4_model(2);
  m.transition(0, 0) += 0.1;
  CHECK_THROWS_AS(m.validate(), Error);
  m = chain4_model(2);
  m.gamma = 1.0;
  CHECK_THROWS_AS(m.validate(), Error);
  m = chain4_model(2);
  m.agent_rewards[1](2) = 60.0;
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("assemble_bellman: tabular reduction and projector") {
  const MdpModel m = chain4_model(1);
  const BellmanMatrices tab = assemble_bellman(m, FeatureMap{MatrixXd::Identity(4, 4)});
  CHECK((tab.Pi - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
  const MatrixXd expected_b = tab.D * (MatrixXd::Identity(4, 4) - m.gamma * m.transition);
  CHECK((tab.B - expected_b).cwiseAbs().maxCoeff() <= 1e-14);

  const BellmanMatrices mats = assemble_bellman(m, chain4_features());
  CHECK(mats.phi.rows() == 4);
  CHECK(mats.phi.cols() == 2);
  CHECK((mats.Pi * mats.Pi - mats.Pi).cwiseAbs().rowwise().sum().maxCoeff() <= 1e-10);
  CHECK(mats.xi == doctest::Approx(mats.d.minCoeff()));
}

TEST_CASE("rank-deficient features are rejected") {
  FeatureMap f;
  f.phi.resize(4, 2);
  f.phi.col(0) << 1, 2, 3, 4;
  f.phi.col(1) = f.phi.col(0);
  try {
    assemble_bellman(chain4_model(1), f);
    FAIL("expected SingularGram");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularGram);
  }
}

TEST_CASE("mspbe values") {
  MdpModel zero = chain4_model(1);
  zero.agent_rewards[0].setZero();
  const BellmanMatrices mats = assemble_bellman(zero, chain4_features());
  CHECK(mspbe(VectorXd::Zero(2), 0, mats, zero) == 0.0);

  // At w = 0 the MSPBE is 1/2 |Pi r|_D^2; check it against psi's quadratic
  // form: 1/2 c^T G^{-1} c with c = Phi^T D r.
  const MdpModel m = chain4_model(5);
  const BellmanMatrices mm = assemble_bellman(m, chain4_features());
  const VectorXd c = mm.phi.transpose() * mm.D * m.agent_rewards[0];
  const double quad = 0.5 * c.dot(mm.gram.ldlt().solve(c));
  CHECK(mspbe(VectorXd::Zero(2), 0, mm, m) == doctest::Approx(quad).epsilon(1e-12));
}

TEST_CASE("exact global solution") {
  const MdpModel m = chain4_model(5);
  const BellmanMatrices mats = assemble_bellman(m, chain4_features());
  const VectorXd w = exact_global_solution(mats, m);
  // Independent path: a generic LU solve of B w = Phi^T D r_avg.
  const VectorXd rhs = mats.phi.transpose() * mats.D * m.average_reward();
  const VectorXd lu = mats.B.fullPivLu().solve(rhs);
  CHECK((w - lu).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(w(0) == doctest::Approx(15.903236570).epsilon(1e-8));
  CHECK(w(1) == doctest::Approx(21.028399420).epsilon(1e-8));
  CHECK(projected_bellman_residual(w, mats, m).cwiseAbs().maxCoeff() <= 1e-8);

  // Gradient of sum_i MSPBE_i at the consensus point 1 (x) w* vanishes.
  VectorXd stacked(10);
  for (int i = 0; i < 5; ++i) stacked.segment(2 * i, 2) = w;
  auto single = [&](const VectorXd& x) {
    VectorXd s(10);
    for (int i = 0; i < 5; ++i) s.segment(2 * i, 2) = x;
    return distributed_objective(s, mats, m);
  };
  CHECK(finite_difference_gradient(single, w, 1e-6).norm() <= 1e-4);

  MdpModel zero = m;
  for (auto& r : zero.agent_rewards) r.setZero();
  CHECK(exact_global_solution(mats, zero).cwiseAbs().maxCoeff() == 0.0);

  MdpModel copies = chain4_model(1);
  const VectorXd one = exact_global_solution(mats, copies);
  copies.agent_rewards.assign(3, m.agent_rewards[0]);
  CHECK((exact_global_solution(mats, copies) - one).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("properties over random instances") {
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const auto inst = testing::random_instance(rng);
    const BellmanMatrices mats = assemble_bellman(inst.model, inst.features);
    const VectorXd w = exact_global_solution(mats, inst.model);
    CHECK(projected_bellman_residual(w, mats, inst.model).cwiseAbs().maxCoeff() <= 1e-8);

    MdpModel scaled = inst.model;
    scaled.sigma *= 3.0;
    for (auto& r : scaled.agent_rewards) r *= 3.0;
    CHECK((exact_global_solution(mats, scaled) - 3.0 * w).cwiseAbs().maxCoeff() <=
          1e-9 * (1.0 + w.cwiseAbs().maxCoeff()));

    const VectorXd J = true_value(inst.model);
    CHECK((J - inst.model.average_reward() - inst.model.gamma * inst.model.transition * J)
              .cwiseAbs()
              .maxCoeff() <= 1e-10 * (1.0 + J.cwiseAbs().maxCoeff()));
  }

  // Tabular case: w* is the exact value function.
  const MdpModel m = chain4_model(3);
  const BellmanMatrices tab = assemble_bellman(m, FeatureMap{MatrixXd::Identity(4, 4)});
  CHECK((exact_global_solution(tab, m) - true_value(m)).cwiseAbs().maxCoeff() <= 1e-10);
}
