#include "aeromodal/rpca.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "aeromodal/errors.hpp"

namespace aeromodal {

namespace {

// nuclear_out, when given, receives ||result||_* = sum of shrunk singular values
Eigen::MatrixXd svt_svd(const Eigen::MatrixXd& m, double tau, double* nuclear_out) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("singular_value_threshold: SVD failed");
  Eigen::VectorXd shrunk = (svd.singularValues().array() - tau).max(0.0);
  if (nuclear_out) *nuclear_out = shrunk.sum();
  const Eigen::Index k = (shrunk.array() > 0.0).count();
  if (k == 0) return Eigen::MatrixXd::Zero(m.rows(), m.cols());
  return svd.matrixU().leftCols(k) * shrunk.head(k).asDiagonal() *
         svd.matrixV().leftCols(k).transpose();
}

// SVT as the spectral function g(M M^T) M with g(l) = max(1 - tau/sqrt(l), 0),
// which needs only a symmetric eigendecomposition of the smaller Gram matrix.
Eigen::MatrixXd svt_gram(const Eigen::MatrixXd& m, double tau, double* nuclear_out) {
  const bool wide = m.rows() <= m.cols();
  const Eigen::MatrixXd gram = wide ? Eigen::MatrixXd(m * m.transpose())
                                    : Eigen::MatrixXd(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw NumericalError("singular_value_threshold: Gram eigendecomposition failed");

  const Eigen::VectorXd& lambdas = eig.eigenvalues(); // ascending, may dip slightly below 0
  Eigen::VectorXd gain(lambdas.size());
  double nuclear = 0.0;
  Eigen::Index first = lambdas.size();
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const double sigma = std::sqrt(std::max(lambdas(i), 0.0));
    gain(i) = sigma > tau ? 1.0 - tau / sigma : 0.0;
    nuclear += std::max(sigma - tau, 0.0);
    if (gain(i) > 0.0 && first == lambdas.size()) first = i;
  }
  if (nuclear_out) *nuclear_out = nuclear;
  const Eigen::Index k = lambdas.size() - first;
  if (k == 0) return Eigen::MatrixXd::Zero(m.rows(), m.cols());

  const auto u = eig.eigenvectors().rightCols(k);
  const auto g = gain.tail(k);
  if (wide) return u * (g.asDiagonal() * (u.transpose() * m));
  return ((m * u) * g.asDiagonal()) * u.transpose();
}

Eigen::MatrixXd svt_dispatch(const Eigen::MatrixXd& m, double tau, SvtMethod method,
                             double* nuclear_out) {
  if (tau < 0.0) throw NumericalError("singular_value_threshold: tau must be >= 0");
  if (method == SvtMethod::Auto)
    method = std::min(m.rows(), m.cols()) * 3 <= std::max(m.rows(), m.cols()) ? SvtMethod::Gram
                                                                              : SvtMethod::Svd;
  return method == SvtMethod::Gram ? svt_gram(m, tau, nuclear_out)
                                   : svt_svd(m, tau, nuclear_out);
}

} // namespace

Eigen::MatrixXd singular_value_threshold(const Eigen::MatrixXd& m, double tau, SvtMethod method) {
  return svt_dispatch(m, tau, method, nullptr);
}

double pcp_lambda0(double lambda, Eigen::Index n, Eigen::Index m) {
  return lambda / std::sqrt(static_cast<double>(std::max(n, m)));
}

RpcaResult rpca_ialm(const Eigen::MatrixXd& x, const RpcaConfig& cfg) {
  if (!x.allFinite()) throw NumericalError("rpca_ialm: input has non-finite entries");
  if (cfg.lambda <= 0 || cfg.rho < 1 || cfg.tol <= 0 || cfg.max_iter < 1)
    throw NumericalError("rpca_ialm: invalid configuration");

  RpcaResult result;
  const double x_norm = x.norm();
  if (x_norm == 0.0) {
    result.low_rank = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    result.sparse = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    result.iterations = 1;
    result.converged = true;
    return result;
  }

  const double lambda0 = pcp_lambda0(cfg.lambda, x.rows(), x.cols());
  double mu = cfg.mu0;
  if (mu <= 0.0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x);
    mu = 1.25 / svd.singularValues()(0);
  }

  Eigen::MatrixXd low_rank = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  Eigen::MatrixXd sparse = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  Eigen::MatrixXd multiplier = Eigen::MatrixXd::Zero(x.rows(), x.cols());

  // the Gram route matches full-SVD SVT to ~1e-10 and is markedly faster on
  // wide matrices; keep full SVD for small or near-square inputs
  const SvtMethod method =
      std::min(x.rows(), x.cols()) * 2 <= std::max(x.rows(), x.cols()) ? SvtMethod::Gram
                                                                       : SvtMethod::Svd;

  double residual = 1.0;
  int iter = 0;
  for (iter = 1; iter <= cfg.max_iter; ++iter) {
    double nuclear = 0.0;
    low_rank = svt_dispatch(x - sparse + multiplier / mu, 1.0 / mu, method, &nuclear);
    sparse = soft_threshold(x - low_rank + multiplier / mu, lambda0 / mu);
    const Eigen::MatrixXd gap = x - low_rank - sparse;
    multiplier += mu * gap;
    mu *= cfg.rho;

    residual = gap.norm() / x_norm;
    result.objective_history.push_back(nuclear + lambda0 * sparse.cwiseAbs().sum());
    if (residual <= cfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.low_rank = std::move(low_rank);
  result.sparse = std::move(sparse);
  result.iterations = std::min(iter, cfg.max_iter);
  result.final_residual = residual;
  return result;
}

} // namespace aeromodal
