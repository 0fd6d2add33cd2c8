#ifndef AEROMODAL_DMD_HPP
#define AEROMODAL_DMD_HPP

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "aeromodal/errors.hpp"
#include "aeromodal/truncation.hpp"

namespace aeromodal {

enum class RankMethod { Auto, GavishDonoho, Energy, Fixed };

struct FirstLevelConfig {
  RankMethod method = RankMethod::Auto; // Auto keeps max(hard-threshold, energy) modes
  double energy = 0.999;
  Eigen::Index fixed_rank = 0;
  std::optional<double> eta; // known noise magnitude for the hard threshold
};

struct HankelConfig {
  Eigen::Index d = 300;                      // time-delay order
  double second_level_energy = 1.0 - 1e-8;   // sigma^2 capture for the embedded SVD
  Eigen::Index max_rank = 0;                 // 0: max(first-level rank, 64)
};

struct ChainConfig {
  FirstLevelConfig truncation;
  HankelConfig hankel;
};

struct LoopConfig {
  double threshold = 0.2; // target relative RMS against the reference matrix
  int max_outer = 5;
  double stall = 0.005;   // stop when absolute improvement falls below this
};

// Full-state decomposition: x(t) ~ sum_k modes_k exp(omega_k t) amplitudes_k.
struct DmdResult {
  Eigen::VectorXcd eigenvalues; // discrete-time
  Eigen::VectorXcd omega;       // ln(eigenvalue) / dt
  Eigen::MatrixXcd modes;       // n x k, one column per eigenvalue
  Eigen::VectorXcd amplitudes;
  Eigen::Index rank = 0; // first-level POD rank
  Eigen::Index delay = 1;
  double dt = 1.0;
};

struct ExactDmdResult {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd reduced_modes; // exact-DMD modes in the embedded space
  Eigen::MatrixXd second_basis;   // left singular vectors of the first split half
  Eigen::VectorXd second_singular_values;
  Eigen::Index second_rank = 0;
};

struct ChainResult {
  DmdResult dmd;
  Eigen::VectorXd singular_values; // first-level spectrum, for diagnostics
  TruncationDecision truncation;
  Eigen::Index second_rank = 0;
};

struct ReconstructionReport {
  double rel_rms = 0.0;
  int iterations = 0;
  std::vector<double> history;
  bool converged = false;
};

struct DelayPoint {
  Eigen::Index d = 0;
  double rel_rms = 0.0;
};

struct DelaySweep {
  std::vector<DelayPoint> curve;
  Eigen::Index recommended = 0; // smallest d within 1% absolute of the minimum
};

// Modal parameters of one conjugate-collapsed mode. Frequencies are reported
// as 2 f dt, damping as -Re(omega)/|omega|.
struct ModalParameter {
  double scaled_freq = 0.0;
  double damping_ratio = 0.0;
  double growth_rate = 0.0;
  bool is_static = false;
  std::complex<double> amplitude;
};

// Projection onto the leading POD modes: returns (U_r^T X, U_r).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> pod_project(const Eigen::MatrixXd& x,
                                                        Eigen::Index rank);

// Block-Hankel time-delay embedding: block row j holds columns j .. j+m-d of x.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> hankel_embed(
    const Eigen::MatrixBase<Derived>& x, Eigen::Index d) {
  const Eigen::Index r = x.rows();
  const Eigen::Index m = x.cols();
  if (d < 1) throw NumericalError("hankel_embed: delay must be >= 1");
  if (d >= m) throw NumericalError("hankel_embed: delay must be smaller than the column count");
  const Eigen::Index n_cols = m - d + 1;
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> h(r * d, n_cols);
  for (Eigen::Index j = 0; j < d; ++j) h.middleRows(j * r, r) = x.middleCols(j, n_cols);
  return h;
}

// Exact DMD of a snapshot matrix: split into H1/H2, truncated SVD of H1,
// eigendecomposition of the projected operator, modes H2 V S^-1 W.
ExactDmdResult exact_dmd(const Eigen::MatrixXd& h, double second_level_energy,
                         Eigen::Index max_rank = 0);

// Same decomposition evaluated through Gram prefix sums of X^T X, without ever
// forming the embedded matrix; returns only the current-time block of each
// reduced mode (all that full-state lifting needs).
struct HankelDmdResult {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd first_block_modes; // r x k
  Eigen::VectorXd second_singular_values;
  Eigen::Index second_rank = 0;
};
HankelDmdResult hankel_dmd(const Eigen::MatrixXd& x_reduced, const HankelConfig& cfg,
                           Eigen::Index max_rank_auto = 0);

// Current-time block of the embedded reduced modes, lifted by the first-level
// POD basis back to the full state dimension.
Eigen::MatrixXcd lift_modes(const Eigen::MatrixXcd& reduced_modes, const Eigen::MatrixXd& basis,
                            Eigen::Index d);

// Minimum-norm least-squares amplitudes from the first snapshot: b = pinv(Phi) x1.
Eigen::VectorXcd amplitudes_pinv(const Eigen::MatrixXcd& modes, const Eigen::VectorXcd& x1);

// Evaluates Re(Phi diag(b) Vandermonde) over n_steps columns.
Eigen::MatrixXd reconstruct(const DmdResult& result, Eigen::Index n_steps);

template <class DerivedA, class DerivedB>
double rel_rms(const Eigen::MatrixBase<DerivedA>& reference,
               const Eigen::MatrixBase<DerivedB>& reconstruction) {
  return (reference - reconstruction).norm() / reference.norm();
}

// One pass of truncate -> project -> delay-embed -> DMD -> lift -> amplitudes.
ChainResult run_dmd_chain(const Eigen::MatrixXd& x, const ChainConfig& cfg, double dt = 1.0);

// Reconstruction-error curve over candidate delays; recommends the smallest d
// whose error is within 1% absolute of the curve minimum.
DelaySweep sweep_delay(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& candidates,
                       const ChainConfig& cfg, double dt = 1.0);

// Re-runs the chain on its own reconstruction until the error against
// `reference` (the original matrix when null) drops below the threshold,
// the improvement stalls, or the outer budget is exhausted.
std::pair<ChainResult, ReconstructionReport> iterate_until_converged(
    const Eigen::MatrixXd& x, const ChainConfig& cfg, const LoopConfig& loop, double dt = 1.0,
    const Eigen::MatrixXd* reference = nullptr);

// Conjugate pairing of an eigenvalue set: (i, j) index pairs matched within
// `tol`, plus the indices left unpaired.
struct ConjugatePairing {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  std::vector<Eigen::Index> singles;
};
ConjugatePairing conjugate_pairs(const Eigen::VectorXcd& eigenvalues, double tol = 1e-8);

// One entry per conjugate pair (plus unpaired modes), sorted by frequency.
std::vector<ModalParameter> extract_modal_parameters(const DmdResult& result);

} // namespace aeromodal

#endif
