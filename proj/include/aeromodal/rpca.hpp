#ifndef AEROMODAL_RPCA_HPP
#define AEROMODAL_RPCA_HPP

#include <vector>

#include <Eigen/Core>

namespace aeromodal {

// Principal component pursuit,  min ||L||_* + lambda0 ||S||_1  s.t.  L + S = X,
// solved by the inexact augmented Lagrange multiplier iteration.
struct RpcaConfig {
  double lambda = 1.0;   // lambda0 = lambda / sqrt(max(n, m))
  double mu0 = 0.0;      // 0 selects 1.25 / sigma_1(X)
  double rho = 1.5;      // penalty growth factor
  double tol = 1e-7;     // relative Frobenius convergence tolerance
  int max_iter = 500;
};

struct RpcaResult {
  Eigen::MatrixXd low_rank;
  Eigen::MatrixXd sparse;
  int iterations = 0;
  bool converged = false;
  double final_residual = 0.0;
  // ||L||_* + lambda0 ||S||_1 per iteration, for the monotonicity diagnostic
  std::vector<double> objective_history;
};

// Entrywise shrinkage sign(m) * max(|m| - tau, 0), usable on any dense expression.
template <class Derived>
auto soft_threshold(const Eigen::MatrixBase<Derived>& m, double tau) {
  return m.array().sign() * (m.array().abs() - tau).max(0.0);
}

enum class SvtMethod {
  Auto, // Gram eigendecomposition when one dimension is much smaller
  Svd,  // thin SVD
  Gram, // eigendecomposition of M M^T (or M^T M), evaluated as a spectral function
};

// Shrinks the singular values of M by tau: U * max(Sigma - tau, 0) * V^T.
Eigen::MatrixXd singular_value_threshold(const Eigen::MatrixXd& m, double tau,
                                         SvtMethod method = SvtMethod::Svd);

double pcp_lambda0(double lambda, Eigen::Index n, Eigen::Index m);

RpcaResult rpca_ialm(const Eigen::MatrixXd& x, const RpcaConfig& cfg = {});

} // namespace aeromodal

#endif
