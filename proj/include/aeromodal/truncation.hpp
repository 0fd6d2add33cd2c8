#ifndef AEROMODAL_TRUNCATION_HPP
#define AEROMODAL_TRUNCATION_HPP

#include <optional>

#include <Eigen/Core>

namespace aeromodal {

// Outcome of the optimal hard threshold applied to a singular spectrum.
struct TruncationDecision {
  Eigen::Index rank = 1;
  double threshold = 0.0;       // tau
  double beta = 1.0;            // min(n,m) / max(n,m)
  std::optional<double> eta;    // noise magnitude, when known
  double energy_captured = 1.0; // cumulative sigma^2 fraction at `rank`
};

// lambda(beta) = sqrt(2(beta+1) + 8 beta / ((beta+1) + sqrt(beta^2 + 14 beta + 1))),
// equal to 4/sqrt(3) at beta = 1.
double gd_lambda(double beta);

// Median of the Marcenko-Pastur distribution on [(1-sqrt(beta))^2, (1+sqrt(beta))^2],
// located by adaptive-quadrature CDF evaluation and bisection to 1e-10.
double mp_median(double beta);

// CDF of the Marcenko-Pastur distribution (exposed for cross-checks).
double mp_cdf(double beta, double x);

// omega(beta) = lambda(beta) / sqrt(mp_median(beta)); about 2.858 at beta = 1.
double gd_omega(double beta);

// Optimal hard threshold for a descending singular spectrum of an n x m matrix.
// With known noise eta: tau = lambda(beta) * sqrt(max(n,m)) * eta. Otherwise
// tau = omega(beta) * median(singular values). Rank counts values above tau
// (and above numerical noise), clamped to at least 1.
TruncationDecision optimal_hard_threshold(const Eigen::VectorXd& singular_values, Eigen::Index n,
                                          Eigen::Index m, std::optional<double> eta = {});

// Smallest rank whose cumulative sigma^2 reaches `energy` (0 < energy <= 1).
Eigen::Index energy_rank(const Eigen::VectorXd& singular_values, double energy);

} // namespace aeromodal

#endif
