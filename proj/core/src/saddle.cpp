#include "dgtd/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dgtd {

StackedIterate StackedIterate::zeros(int num_agents, int q) {
  const Eigen::Index n = static_cast<Eigen::Index>(num_agents) * q;
  return {VectorXd::Zero(n), VectorXd::Zero(n), VectorXd::Zero(n), VectorXd::Zero(n)};
}

void StackedIterate::check_size(Eigen::Index expected) const {
  require(theta.size() == expected && v.size() == expected && mu.size() == expected &&
              w.size() == expected,
          ErrorKind::DimensionMismatch,
          "stacked iterate blocks must all have length " + std::to_string(expected));
}

StackedIterate& StackedIterate::operator+=(const StackedIterate& o) {
  theta += o.theta;
  v += o.v;
  mu += o.mu;
  w += o.w;
  return *this;
}

StackedIterate& StackedIterate::operator-=(const StackedIterate& o) {
  theta -= o.theta;
  v -= o.v;
  mu -= o.mu;
  w -= o.w;
  return *this;
}

StackedIterate& StackedIterate::operator*=(double s) {
  theta *= s;
  v *= s;
  mu *= s;
  w *= s;
  return *this;
}

double StackedIterate::max_abs() const {
  auto m = [](const VectorXd& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; };
  return std::max({m(theta), m(v), m(mu), m(w)});
}

void BoxConstraints::validate() const {
  require(radius_theta > 0 && radius_v > 0 && radius_mu > 0 && radius_w > 0,
          ErrorKind::InvalidModel, "box radii must be strictly positive");
}

namespace {

Eigen::SparseMatrix<double> sparse_of(const MatrixXd& m) { return m.sparseView(0.0, 0.0); }

auto block(const VectorXd& x, int i, int q) {
  return x.segment(static_cast<Eigen::Index>(i) * q, q);
}
auto block(VectorXd& x, int i, int q) { return x.segment(static_cast<Eigen::Index>(i) * q, q); }

double max_row_sum(const MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

// ---------------------------------------------------------------------------
// Box-constrained convex quadratic programs: min 1/2 x^T H x - c^T x, |x|_inf <= R.

struct BoxQp {
  VectorXd x;
  double value = 0.0;
};

double qp_value(const MatrixXd& H, const VectorXd& c, const VectorXd& x) {
  return 0.5 * x.dot(H * x) - c.dot(x);
}

VectorXd clamp(const VectorXd& x, double R) { return x.cwiseMax(-R).cwiseMin(R); }

bool is_diagonal(const MatrixXd& H) {
  for (Eigen::Index r = 0; r < H.rows(); ++r) {
    for (Eigen::Index c = 0; c < H.cols(); ++c) {
      if (r != c && H(r, c) != 0.0) return false;
    }
  }
  return true;
}

BoxQp solve_diagonal(const MatrixXd& H, const VectorXd& c, double R, const VectorXd& start) {
  VectorXd x(c.size());
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    const double h = H(j, j);
    if (h > 0.0) {
      x(j) = std::clamp(c(j) / h, -R, R);
    } else if (c(j) != 0.0) {
      x(j) = c(j) > 0.0 ? R : -R;
    } else {
      x(j) = std::clamp(start(j), -R, R);
    }
  }
  return {x, qp_value(H, c, x)};
}

// The optimum with the largest active set has a nonsingular free block, so
// scanning every (free, lower, upper) pattern finds it exactly.
BoxQp solve_by_enumeration(const MatrixXd& H, const VectorXd& c, double R,
                           const VectorXd& start) {
  const Eigen::Index n = c.size();
  BoxQp best{clamp(start, R), 0.0};
  best.value = qp_value(H, c, best.x);
  long patterns = 1;
  for (Eigen::Index j = 0; j < n; ++j) patterns *= 3;

  std::vector<Eigen::Index> free_idx;
  VectorXd x(n);
  for (long code = 0; code < patterns; ++code) {
    free_idx.clear();
    long rest = code;
    for (Eigen::Index j = 0; j < n; ++j) {
      const int state = static_cast<int>(rest % 3);
      rest /= 3;
      if (state == 0) {
        free_idx.push_back(j);
        x(j) = 0.0;
      } else {
        x(j) = state == 1 ? -R : R;
      }
    }
    if (!free_idx.empty()) {
      const auto f = static_cast<Eigen::Index>(free_idx.size());
      MatrixXd hff(f, f);
      VectorXd rhs(f);
      for (Eigen::Index a = 0; a < f; ++a) {
        rhs(a) = c(free_idx[static_cast<std::size_t>(a)]) -
                 H.row(free_idx[static_cast<std::size_t>(a)]).dot(x);
        for (Eigen::Index b = 0; b < f; ++b) {
          hff(a, b) = H(free_idx[static_cast<std::size_t>(a)], free_idx[static_cast<std::size_t>(b)]);
        }
      }
      Eigen::FullPivLU<MatrixXd> lu(hff);
      lu.setThreshold(1e-12);
      if (!lu.isInvertible()) continue;
      const VectorXd xf = lu.solve(rhs);
      if (xf.cwiseAbs().maxCoeff() > R * (1.0 + 1e-12)) continue;
      for (Eigen::Index a = 0; a < f; ++a) {
        x(free_idx[static_cast<std::size_t>(a)]) = std::clamp(xf(a), -R, R);
      }
    }
    const double value = qp_value(H, c, x);
    if (value < best.value) best = {x, value};
  }
  return best;
}

// Projected accelerated gradient with function-value restarts.
BoxQp solve_by_projected_gradient(const MatrixXd& H, const VectorXd& c, double R,
                                  const VectorXd& start) {
  constexpr double kTolerance = 1e-9;
  constexpr long kMaxIterations = 100'000;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(H, Eigen::EigenvaluesOnly);
  const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / lipschitz;

  VectorXd x = clamp(start, R);
  VectorXd y = x;
  double fx = qp_value(H, c, x);
  double momentum = 1.0;
  for (long it = 0; it < kMaxIterations; ++it) {
    VectorXd next = clamp(y - step * (H * y - c), R);
    double fnext = qp_value(H, c, next);
    if (fnext > fx) {
      momentum = 1.0;
      next = clamp(x - step * (H * x - c), R);
      fnext = qp_value(H, c, next);
    }
    const double mapping = lipschitz * (next - x).cwiseAbs().maxCoeff();
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = next + ((momentum - 1.0) / next_momentum) * (next - x);
    momentum = next_momentum;
    x.swap(next);
    fx = fnext;
    if (mapping <= kTolerance) break;
  }
  return {x, fx};
}

BoxQp minimize_box_qp(const MatrixXd& H, const VectorXd& c, double R, const VectorXd& start) {
  if (is_diagonal(H)) return solve_diagonal(H, c, R, start);
  if (c.size() <= 8) return solve_by_enumeration(H, c, R, start);
  return solve_by_projected_gradient(H, c, R, start);
}

void validate_complexity_inputs(double epsilon, double delta, double alpha0, double C) {
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::DomainError, "epsilon must be > 0");
  require(delta > 0.0 && delta < 1.0, ErrorKind::DomainError, "delta must lie in (0, 1)");
  require(alpha0 > 0.0 && std::isfinite(alpha0), ErrorKind::DomainError, "alpha0 must be > 0");
  require(C > 0.0 && std::isfinite(C), ErrorKind::DomainError, "C must be > 0");
}

}  // namespace

SolutionBounds solution_bounds(const MdpModel& model, const BellmanMatrices& mats,
                               const LaplacianView& mean_graph, double v_bound) {
  const double n_states = model.num_states();
  const double n_agents = model.num_agents();
  const MatrixXd& phi = mats.phi;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(phi.transpose() * phi, Eigen::EigenvaluesOnly);
  const double lambda_min = eig.eigenvalues()(0);

  const VectorXd value = true_value(model);
  const VectorXd approx_err = mats.Pi * value - value;
  const double err_d = std::sqrt(approx_err.dot(mats.d.cwiseProduct(approx_err)));

  SolutionBounds b;
  b.w = (1.0 / (1.0 - model.gamma)) * std::sqrt(n_states / lambda_min) *
        (err_d / std::sqrt(mats.xi) + model.sigma);
  b.v = v_bound;
  b.theta = 2.0 * model.sigma * n_states * std::sqrt(n_agents / (mats.xi * lambda_min));
  const double phi_inf = max_row_sum(phi);
  b.mu = max_row_sum(laplacian_pseudoinverse(mean_graph)) * phi_inf * phi_inf * 2.0 *
         model.sigma * n_states * n_states * std::sqrt(n_agents / (mats.xi * lambda_min));
  return b;
}

SolutionBounds solution_bounds(const SaddleProblem& p) { return p.bounds; }

BoxConstraints boxes_from_bounds(const SolutionBounds& b, double scale, double margin) {
  require(scale > 0.0 && margin >= 0.0, ErrorKind::InvalidModel,
          "box scale must be positive and margin non-negative");
  BoxConstraints boxes{scale * b.theta + margin, scale * b.v + margin, scale * b.mu + margin,
                       scale * b.w + margin, false};
  boxes.audited = boxes.radius_theta >= b.theta && boxes.radius_v >= b.v &&
                  boxes.radius_mu >= b.mu && boxes.radius_w >= b.w;
  return boxes;
}

SaddleProblem make_saddle_problem(const MdpModel& model, const FeatureMap& features,
                                  const GraphDistribution& graph, const ProblemOptions& options) {
  require(options.kappa >= 0.0, ErrorKind::InvalidModel, "kappa must be non-negative");
  require(options.rho >= 0.0, ErrorKind::InvalidModel, "rho must be non-negative");
  require(graph.num_agents() == model.num_agents(), ErrorKind::DimensionMismatch,
          "graph and model disagree on the number of agents");
  assert_mean_connectivity(graph);

  BellmanMatrices mats = assemble_bellman(model, features);
  LaplacianView mean = mean_laplacian(graph);
  const int q = features.dim();
  const int n = model.num_agents();

  SaddleProblem p{model,
                  features,
                  std::move(mats),
                  mean,
                  StackedLaplacian(mean, q),
                  laplacian_pseudoinverse(mean),
                  options.kappa,
                  options.rho,
                  {},
                  {},
                  VectorXd(static_cast<Eigen::Index>(n) * q),
                  {},
                  {},
                  {}};

  const MatrixXd phi_t_d = p.mats.phi.transpose() * p.mats.D;
  for (int i = 0; i < n; ++i) {
    block(p.phi_d_rewards, i, q) = phi_t_d * model.agent_rewards[static_cast<std::size_t>(i)];
  }
  p.gram_sparse = sparse_of(p.mats.gram);
  p.b_sparse = sparse_of(p.mats.B);
  p.bt_sparse = sparse_of(p.mats.B.transpose());

  SolutionBounds raw = solution_bounds(model, p.mats, p.mean_graph, 0.0);
  raw.v = options.v_bound.value_or(raw.theta);
  p.bounds = raw;
  if (options.boxes) {
    p.boxes = *options.boxes;
    p.boxes.audited = p.boxes.radius_theta >= raw.theta && p.boxes.radius_v >= raw.v &&
                      p.boxes.radius_mu >= raw.mu && p.boxes.radius_w >= raw.w;
  } else {
    p.boxes = boxes_from_bounds(raw, options.box_scale, options.box_margin);
  }
  p.boxes.validate();
  return p;
}

double lagrangian_value(const SaddleProblem& p, const StackedIterate& it) {
  const Eigen::Index nq = p.stacked_size();
  it.check_size(nq);
  const int q = p.dim();
  double value = 0.0;
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto th = block(it.theta, i, q);
    const auto w = block(it.w, i, q);
    const VectorXd g_th = p.gram_sparse * th;
    const VectorXd b_w = p.b_sparse * w;
    value += 0.5 * th.dot(g_th) - th.dot(block(p.phi_d_rewards, i, q)) + th.dot(b_w);
  }
  value += 0.5 * it.v.squaredNorm();
  const VectorXd lv = p.mean_block.apply(it.v);
  const VectorXd lmu = p.mean_block.apply(it.mu);
  value -= (lv + lmu).dot(it.w);
  value -= 0.5 * p.kappa * p.mean_block.quadratic(it.w);
  value += 0.5 * p.rho * (it.mu.squaredNorm() - it.w.squaredNorm());
  return value;
}

SaddleGradient exact_gradients(const SaddleProblem& p, const StackedIterate& it) {
  const Eigen::Index nq = p.stacked_size();
  it.check_size(nq);
  const int q = p.dim();
  SaddleGradient g = StackedIterate::zeros(p.num_agents(), q);
  const VectorXd lw = p.mean_block.apply(it.w);
  const VectorXd lv = p.mean_block.apply(it.v);
  const VectorXd lmu = p.mean_block.apply(it.mu);
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto th = block(it.theta, i, q);
    const auto w = block(it.w, i, q);
    block(g.theta, i, q) = p.gram_sparse * th - block(p.phi_d_rewards, i, q) + p.b_sparse * w;
    block(g.w, i, q) = p.bt_sparse * th;
  }
  g.v = it.v - lw;
  g.mu = -lw + p.rho * it.mu;
  g.w += -lv - lmu - p.kappa * lw - p.rho * it.w;
  return g;
}

StackedIterate kkt_point(const SaddleProblem& p) {
  const int n = p.num_agents();
  const int q = p.dim();
  StackedIterate s = StackedIterate::zeros(n, q);
  const Eigen::LDLT<MatrixXd> gram_ldlt(p.mats.gram);

  if (p.rho == 0.0) {
    const VectorXd w_star = exact_global_solution(p.mats, p.model);
    VectorXd mean_c = VectorXd::Zero(q);
    for (int i = 0; i < n; ++i) mean_c += block(p.phi_d_rewards, i, q);
    mean_c /= n;
    VectorXd bt_theta(static_cast<Eigen::Index>(n) * q);
    for (int i = 0; i < n; ++i) {
      block(s.w, i, q) = w_star;
      block(s.theta, i, q) = gram_ldlt.solve(block(p.phi_d_rewards, i, q) - mean_c);
      block(bt_theta, i, q) = p.mats.B.transpose() * block(s.theta, i, q);
    }
    for (int i = 0; i < n; ++i) {
      VectorXd acc = VectorXd::Zero(q);
      for (int j = 0; j < n; ++j) acc += p.mean_pinv(i, j) * block(bt_theta, j, q);
      block(s.mu, i, q) = acc;
    }
    return s;
  }

  // Eliminating theta, v = L w and mu = L w / rho leaves
  //   (I (x) M + ((1 + 1/rho) L^2 + kappa L + rho I) (x) I) w = (I (x) B^T G^{-1}) c
  // with M = B^T G^{-1} B. The eigenbasis of L splits it into N q x q systems.
  const MatrixXd g_inv_b = gram_ldlt.solve(p.mats.B);
  const MatrixXd M = p.mats.B.transpose() * g_inv_b;
  Eigen::SelfAdjointEigenSolver<MatrixXd> lap(p.mean_graph.laplacian());
  const MatrixXd& U = lap.eigenvectors();
  const VectorXd& lambda = lap.eigenvalues();

  MatrixXd rhs(n, q);
  for (int i = 0; i < n; ++i) {
    rhs.row(i) = (g_inv_b.transpose() * block(p.phi_d_rewards, i, q)).transpose();
  }
  const MatrixXd rotated = U.transpose() * rhs;
  MatrixXd z(n, q);
  for (int k = 0; k < n; ++k) {
    const double shift = (1.0 + 1.0 / p.rho) * lambda(k) * lambda(k) + p.kappa * lambda(k) + p.rho;
    const MatrixXd system = M + shift * MatrixXd::Identity(q, q);
    z.row(k) = system.ldlt().solve(rotated.row(k).transpose()).transpose();
  }
  const MatrixXd W = U * z;
  for (int i = 0; i < n; ++i) block(s.w, i, q) = W.row(i).transpose();
  const VectorXd lw = p.mean_block.apply(s.w);
  s.v = lw;
  s.mu = lw / p.rho;
  for (int i = 0; i < n; ++i) {
    block(s.theta, i, q) =
        gram_ldlt.solve(block(p.phi_d_rewards, i, q) - p.mats.B * block(s.w, i, q));
  }
  return s;
}

VectorXd multiplier_residual(const SaddleProblem& p, const StackedIterate& it) {
  it.check_size(p.stacked_size());
  const int q = p.dim();
  VectorXd r = p.mean_block.apply(it.mu);
  for (int i = 0; i < p.num_agents(); ++i) block(r, i, q) -= p.bt_sparse * block(it.theta, i, q);
  return r;
}

double auxiliary_constraint_residual(const SaddleProblem& p, const StackedIterate& it) {
  it.check_size(p.stacked_size());
  const int q = p.dim();
  double worst = 0.0;
  for (int i = 0; i < p.num_agents(); ++i) {
    const VectorXd eps = p.gram_sparse * block(it.theta, i, q);
    const VectorXd row = p.b_sparse * block(it.w, i, q) + eps - block(p.phi_d_rewards, i, q);
    worst = std::max(worst, row.cwiseAbs().maxCoeff());
  }
  const VectorXd lw = p.mean_block.apply(it.w);
  worst = std::max(worst, (lw - it.v).cwiseAbs().maxCoeff());
  worst = std::max(worst, lw.cwiseAbs().maxCoeff());
  return worst;
}

StackedIterate project_boxes(const BoxConstraints& boxes, const StackedIterate& it) {
  return {clamp(it.theta, boxes.radius_theta), clamp(it.v, boxes.radius_v),
          clamp(it.mu, boxes.radius_mu), clamp(it.w, boxes.radius_w)};
}

GapResult saddle_gap(const SaddleProblem& p, const StackedIterate& candidate) {
  const int n = p.num_agents();
  const int q = p.dim();
  candidate.check_size(p.stacked_size());
  const auto& boxes = p.boxes;

  // w-problem: the Lagrangian is a^T w - 1/2 w^T (kappa L + rho I) (x) I_q w
  // plus terms free of w, which separates by feature coordinate.
  VectorXd a = -p.mean_block.apply(candidate.v) - p.mean_block.apply(candidate.mu);
  for (int i = 0; i < n; ++i) block(a, i, q) += p.bt_sparse * block(candidate.theta, i, q);
  const MatrixXd h_w = p.kappa * p.mean_graph.laplacian() + p.rho * MatrixXd::Identity(n, n);
  VectorXd w_best(candidate.w.size());
  for (int j = 0; j < q; ++j) {
    VectorXd c(n), start(n);
    for (int i = 0; i < n; ++i) {
      c(i) = a(static_cast<Eigen::Index>(i) * q + j);
      start(i) = candidate.w(static_cast<Eigen::Index>(i) * q + j);
    }
    const BoxQp sol = minimize_box_qp(h_w, c, boxes.radius_w, start);
    for (int i = 0; i < n; ++i) w_best(static_cast<Eigen::Index>(i) * q + j) = sol.x(i);
  }

  // x-problem separates into per-agent theta programs and closed-form v, mu.
  StackedIterate x_best = candidate;
  const VectorXd lw = p.mean_block.apply(candidate.w);
  for (int i = 0; i < n; ++i) {
    const VectorXd c = block(p.phi_d_rewards, i, q) - p.b_sparse * block(candidate.w, i, q);
    block(x_best.theta, i, q) =
        minimize_box_qp(p.mats.gram, c, boxes.radius_theta, block(candidate.theta, i, q)).x;
  }
  x_best.v = clamp(lw, boxes.radius_v);
  for (Eigen::Index k = 0; k < lw.size(); ++k) {
    if (p.rho > 0.0) {
      x_best.mu(k) = std::clamp(lw(k) / p.rho, -boxes.radius_mu, boxes.radius_mu);
    } else if (lw(k) != 0.0) {
      x_best.mu(k) = lw(k) > 0.0 ? boxes.radius_mu : -boxes.radius_mu;
    }
  }

  StackedIterate at_w = candidate;
  at_w.w = w_best;
  StackedIterate at_x = x_best;
  at_x.w = candidate.w;
  const double base = lagrangian_value(p, candidate);
  GapResult out;
  out.sup_over_w = std::max(lagrangian_value(p, at_w), base);
  out.inf_over_x = std::min(lagrangian_value(p, at_x), base);
  out.gap = out.sup_over_w - out.inf_over_x;
  out.best_response = x_best;
  out.best_response.w = w_best;
  return out;
}

double gap_proxy(const SaddleProblem& p, const StackedIterate& candidate,
                 const StackedIterate& saddle) {
  StackedIterate x_hat_w_star = candidate;
  x_hat_w_star.w = saddle.w;
  StackedIterate x_star_w_hat = saddle;
  x_star_w_hat.w = candidate.w;
  return lagrangian_value(p, x_hat_w_star) - lagrangian_value(p, x_star_w_hat);
}

ComplexityResult sample_complexity(double epsilon, double delta, double alpha0, double C) {
  validate_complexity_inputs(epsilon, delta, alpha0, C);
  const double c2 = C * C;
  ComplexityResult r;
  r.omega1 = 8.0 * c2 * ((alpha0 + 2.0) * (alpha0 + 2.0) * c2 + (alpha0 + 4.0) * epsilon / 6.0) /
             (epsilon * epsilon) * std::log(1.0 / delta);
  const double shape = 2.0 / alpha0 + alpha0;
  r.omega2 = 4.0 * c2 * c2 * shape * shape / (epsilon * epsilon);
  r.t_required = std::max(r.omega1, r.omega2);
  return r;
}

ComplexityResult consensus_complexity(double epsilon, double delta, double alpha0, double C,
                                      double kappa) {
  require(kappa > 0.0, ErrorKind::DomainError, "consensus rate needs kappa > 0");
  return sample_complexity(0.5 * kappa * epsilon, delta, alpha0, C);
}

ComplexityResult primal_error_complexity(double epsilon, double delta, double alpha0, double C,
                                         const MatrixXd& gram) {
  // The stacked Gram is I_N (x) gram, so the spectrum of its square is that of gram^2.
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const VectorXd squared = eig.eigenvalues().array().square();
  const double scale =
      std::min(squared.minCoeff(), 1.0) / (2.0 * std::sqrt(squared.maxCoeff() + 1.0));
  return sample_complexity(scale * epsilon, delta, alpha0, C);
}

}  // namespace dgtd
