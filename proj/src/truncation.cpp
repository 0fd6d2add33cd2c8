#include "aeromodal/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "aeromodal/errors.hpp"

namespace aeromodal {

namespace {

struct MpSupport {
  double lo, hi;
};

MpSupport mp_support(double beta) {
  const double root = std::sqrt(beta);
  return {(1.0 - root) * (1.0 - root), (1.0 + root) * (1.0 + root)};
}

// Density integrand after t = lo + (hi - lo) sin^2(theta), which removes the
// edge singularities (including the 1/sqrt(t) one at beta = 1).
double mp_theta_integrand(double beta, double theta) {
  const auto [lo, hi] = mp_support(beta);
  const double width = hi - lo;
  const double sin2 = std::sin(theta) * std::sin(theta);
  const double cos2 = 1.0 - sin2;
  const double t = lo + width * sin2;
  // width * sin^2 / t -> 1 as theta -> 0 when lo == 0
  const double ratio = t > 0.0 ? width * sin2 / t : 1.0;
  return (width / (std::numbers::pi * beta)) * cos2 * ratio;
}

double adaptive_simpson(double beta, double a, double b, double fa, double fm, double fb,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = mp_theta_integrand(beta, lm);
  const double frm = mp_theta_integrand(beta, rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(beta, a, m, fa, flm, fm, tol * 0.5, depth - 1) +
         adaptive_simpson(beta, m, b, fm, frm, fb, tol * 0.5, depth - 1);
}

double mp_cdf_impl(double beta, double x) {
  const auto [lo, hi] = mp_support(beta);
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double theta_x = std::asin(std::sqrt((x - lo) / (hi - lo)));
  const double fa = mp_theta_integrand(beta, 0.0);
  const double fb = mp_theta_integrand(beta, theta_x);
  const double fm = mp_theta_integrand(beta, 0.5 * theta_x);
  return adaptive_simpson(beta, 0.0, theta_x, fa, fm, fb, 1e-12, 40);
}

} // namespace

double gd_lambda(double beta) {
  if (!(beta > 0.0) || beta > 1.0) throw NumericalError("gd_lambda: beta must be in (0, 1]");
  const double inner = (beta + 1.0) + std::sqrt(beta * beta + 14.0 * beta + 1.0);
  return std::sqrt(2.0 * (beta + 1.0) + 8.0 * beta / inner);
}

double mp_cdf(double beta, double x) {
  if (!(beta > 0.0) || beta > 1.0) throw NumericalError("mp_cdf: beta must be in (0, 1]");
  return mp_cdf_impl(beta, x);
}

double mp_median(double beta) {
  if (!(beta > 0.0) || beta > 1.0) throw NumericalError("mp_median: beta must be in (0, 1]");
  auto [lo, hi] = mp_support(beta);
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (mp_cdf_impl(beta, mid) < 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double gd_omega(double beta) { return gd_lambda(beta) / std::sqrt(mp_median(beta)); }

Eigen::Index energy_rank(const Eigen::VectorXd& singular_values, double energy) {
  if (!(energy > 0.0) || energy > 1.0) throw NumericalError("energy_rank: energy must be in (0, 1]");
  const double total = singular_values.squaredNorm();
  if (total <= 0.0) throw NumericalError("energy_rank: all-zero spectrum");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
    acc += singular_values(i) * singular_values(i);
    if (acc >= energy * total) return i + 1;
  }
  return singular_values.size();
}

TruncationDecision optimal_hard_threshold(const Eigen::VectorXd& singular_values, Eigen::Index n,
                                          Eigen::Index m, std::optional<double> eta) {
  if (n < 1 || m < 1) throw NumericalError("optimal_hard_threshold: empty matrix shape");
  if (singular_values.size() == 0 || singular_values.maxCoeff() <= 0.0)
    throw NumericalError("optimal_hard_threshold: degenerate all-zero spectrum");

  TruncationDecision decision;
  decision.beta = static_cast<double>(std::min(n, m)) / static_cast<double>(std::max(n, m));
  decision.eta = eta;

  if (eta) {
    decision.threshold = gd_lambda(decision.beta) *
                         std::sqrt(static_cast<double>(std::max(n, m))) * *eta;
  } else {
    std::vector<double> sorted(singular_values.data(),
                               singular_values.data() + singular_values.size());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t half = sorted.size() / 2;
    const double median = sorted.size() % 2 == 1
                              ? sorted[half]
                              : 0.5 * (sorted[half - 1] + sorted[half]);
    decision.threshold = gd_omega(decision.beta) * median;
  }

  // values at the level of floating-point noise never count toward the rank
  const double numerical_floor =
      singular_values(0) * static_cast<double>(std::max(n, m)) * 1e-15;
  const double cut = std::max(decision.threshold, numerical_floor);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i)
    if (singular_values(i) > cut) ++rank;
  decision.rank = std::max<Eigen::Index>(rank, 1);

  const double total = singular_values.squaredNorm();
  decision.energy_captured = singular_values.head(decision.rank).squaredNorm() / total;
  return decision;
}

} // namespace aeromodal
