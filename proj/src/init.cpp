#include "twf/init.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "twf/errors.hpp"

namespace twf {

double norm_estimate(const ProblemInstance& instance) {
  return instance.measurements().mean();
}

Vector marginal_signals(const ProblemInstance& instance) {
  const DesignMatrix& A = instance.design();
  const Vector& y = instance.measurements();
  const int m = instance.m();
  const int p = instance.p();
  Vector I = Vector::Zero(p);
  for (int j = 0; j < m; ++j)
    I += y[j] * A.row(j).transpose().array().square().matrix();
  return I / static_cast<double>(m);
}

std::vector<int> select_support(const Vector& marginals, double phi_sq,
                                double alpha, int m, int p) {
  if (alpha < 0.0) throw std::invalid_argument("select_support: alpha must be >= 0");
  if (m < 1 || p < 1) throw std::invalid_argument("select_support: need m, p >= 1");
  const double log_mp = std::log(static_cast<double>(m) * static_cast<double>(p));
  const double cutoff = (1.0 + alpha * std::sqrt(log_mp / m)) * phi_sq;
  std::vector<int> selected;
  for (Eigen::Index l = 0; l < marginals.size(); ++l)
    if (marginals[l] > cutoff) selected.push_back(static_cast<int>(l));
  return selected;
}

Matrix restricted_second_moment(const ProblemInstance& instance,
                                const std::vector<int>& selected) {
  if (selected.empty())
    throw std::invalid_argument("restricted_second_moment: empty coordinate set");
  const DesignMatrix& A = instance.design();
  const Vector& y = instance.measurements();
  const int m = instance.m();
  const int d = static_cast<int>(selected.size());
  Matrix B(m, d);
  for (int c = 0; c < d; ++c) B.col(c) = A.col(selected[c]);
  Matrix W = B.transpose() * (y.asDiagonal() * B) / static_cast<double>(m);
  W = ((W + W.transpose()) / 2.0).eval();
  return W;
}

namespace {

void normalize_sign(Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (v[best] < 0.0) v = -v;
}

}  // namespace

EigenResult leading_eigenvector(const Matrix& matrix, double tol, int max_iter,
                                RngStream* restart_rng) {
  const Eigen::Index d = matrix.rows();
  if (d < 1 || matrix.cols() != d)
    throw std::invalid_argument("leading_eigenvector: matrix must be square, d >= 1");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::invalid_argument("leading_eigenvector: matrix is not symmetric");

  if (d == 1) return {Vector::Ones(1), matrix(0, 0), 0, 0.0};

  RngStream fallback_rng(0x7f4a7c15u);
  RngStream* rng = restart_rng ? restart_rng : &fallback_rng;

  // All-ones start with a deterministic tilt, so a dominant eigenvector
  // exactly orthogonal to the ones vector still leaves a nonzero component.
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i)
    v[i] = 1.0 + 1e-6 * static_cast<double>(i + 1) / static_cast<double>(d);
  v /= v.norm();
  double lambda = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  double initial_residual = -1.0;
  Vector best_v = v;
  double best_lambda = 0.0;
  double best_residual = residual;
  bool restarted = false;

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    Vector w = matrix * v;
    lambda = v.dot(w);
    residual = (w - lambda * v).norm();
    if (initial_residual < 0.0) initial_residual = residual;
    if (residual < best_residual) {
      best_residual = residual;
      best_lambda = lambda;
      best_v = v;
    }
    if (residual <= tol * std::max(std::abs(lambda), 1.0)) {
      normalize_sign(v);
      return {v, lambda, iter + 1, residual};
    }
    // A start orthogonal to the dominant eigenspace shows up as a stalled
    // residual; re-randomize once past the halfway budget.
    bool stalled = iter >= max_iter / 2 &&
                   best_residual > 0.5 * initial_residual;
    if ((!restarted && stalled) || w.norm() == 0.0) {
      restarted = true;
      for (Eigen::Index i = 0; i < d; ++i) v[i] = rng->next_normal();
      v.normalize();
      continue;
    }
    v = w / w.norm();
  }
  normalize_sign(best_v);
  throw ConvergenceFailure(
      "leading_eigenvector: residual not reached within max_iter",
      std::vector<double>(best_v.data(), best_v.data() + best_v.size()),
      best_lambda, best_residual, iter);
}

InitResult initialize(const ProblemInstance& instance, double alpha,
                      double eig_tol, int eig_max_iter, RngStream* restart_rng) {
  if (alpha < 0.0) throw std::invalid_argument("initialize: alpha must be >= 0");
  InitResult result;
  result.phi_sq = norm_estimate(instance);
  if (result.phi_sq <= 0.0)
    throw DegenerateInstanceError(
        "initialize: nonpositive norm estimate (noise overwhelmed signal)",
        result.phi_sq);
  result.marginals = marginal_signals(instance);
  result.selected = select_support(result.marginals, result.phi_sq, alpha,
                                   instance.m(), instance.p());
  if (result.selected.empty()) {
    Eigen::Index top = 0;
    for (Eigen::Index l = 1; l < result.marginals.size(); ++l)
      if (result.marginals[l] > result.marginals[top]) top = l;
    result.selected = {static_cast<int>(top)};
    result.fallback_used = true;
  }
  Matrix W = restricted_second_moment(instance, result.selected);
  EigenResult eig = leading_eigenvector(W, eig_tol, eig_max_iter, restart_rng);
  result.eigen_iterations = eig.iterations;
  result.eigen_residual = eig.residual;

  const double phi = std::sqrt(std::max(result.phi_sq, 0.0));
  result.x0 = Vector::Zero(instance.p());
  for (std::size_t i = 0; i < result.selected.size(); ++i)
    result.x0[result.selected[i]] = phi * eig.vector[static_cast<Eigen::Index>(i)];
  return result;
}

}  // namespace twf
