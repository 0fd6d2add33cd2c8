#ifndef AEROMODAL_SPARSITY_HPP
#define AEROMODAL_SPARSITY_HPP

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace aeromodal {

// Quadratic amplitude cost J(b) = b^* P b - q^* b - b^* q + s, equal to the
// Frobenius residual || X - Phi diag(b) V ||_F^2 of the mode superposition.
struct AmplitudeProblem {
  Eigen::MatrixXcd p; // Hermitian positive semidefinite
  Eigen::VectorXcd q;
  double s = 0.0;
  Eigen::VectorXcd eigenvalues;
  Eigen::Index n_time = 0;

  Eigen::Index size() const { return q.size(); }
};

// Row k holds powers eigenvalue_k^0 .. eigenvalue_k^(n_time-1).
Eigen::MatrixXcd build_vandermonde(const Eigen::VectorXcd& eigenvalues, Eigen::Index n_time);

AmplitudeProblem build_amplitude_problem(const Eigen::MatrixXd& x, const Eigen::MatrixXcd& modes,
                                         const Eigen::VectorXcd& eigenvalues);

double amplitude_cost(const AmplitudeProblem& problem, const Eigen::VectorXcd& b);

// Percent reconstruction loss of b relative to the zero model: 100 sqrt(J/s).
double performance_loss(const AmplitudeProblem& problem, const Eigen::VectorXcd& b);

struct OptimalAmplitudes {
  Eigen::VectorXcd b;
  bool regularized = false; // ridge fallback was needed
};

// Unconstrained minimizer P b = q (ridge-regularized when P is singular).
OptimalAmplitudes optimal_amplitudes(const AmplitudeProblem& problem);

struct AdmmConfig {
  double rho = 1.0;
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;
  int max_iter = 10000;
};

struct SparseAmplitudes {
  Eigen::VectorXcd b;
  double loss_percent = 0.0;
  bool converged = true;
  int iterations = 0;
};

// min J(b) + gamma sum |b_i| by scaled-form ADMM with a complex soft-threshold
// z-update. The returned vector is the sparse iterate (exact zeros).
SparseAmplitudes admm_sparsify(const AmplitudeProblem& problem, double gamma,
                               const AdmmConfig& cfg = {});

struct SparsitySweep {
  Eigen::VectorXd gammas; // ascending, log-spaced
  std::vector<Eigen::VectorXcd> amplitudes;
  std::vector<int> cardinality;
  Eigen::VectorXd performance_loss;
  Eigen::Index selected_index = -1;
};

// Log-spaced gamma grid. Without an explicit span the endpoints are calibrated
// so that the densest solution keeps every mode and the sparsest keeps at most
// two, by a doubling/halving search capped at 40 probes.
SparsitySweep gamma_sweep(const AmplitudeProblem& problem, int n_gammas = 200,
                          std::optional<std::pair<double, double>> span = {},
                          const AdmmConfig& cfg = {});

struct SelectedModes {
  std::vector<Eigen::Index> indices; // sorted support
  Eigen::VectorXcd amplitudes;       // full-length, polished on the support
  double gamma = 0.0;
  double loss_percent = 0.0;
};

// Fixed-support re-solve of J, removing the shrinkage bias of the l1 step.
Eigen::VectorXcd polish_amplitudes(const AmplitudeProblem& problem,
                                   const std::vector<Eigen::Index>& support,
                                   bool* regularized = nullptr);

// Adds the conjugate partner of every supported mode.
std::vector<Eigen::Index> symmetrize_support(const Eigen::VectorXcd& eigenvalues,
                                             std::vector<Eigen::Index> support);

// Picks the gamma where the normalized falling cardinality curve meets the
// normalized rising loss curve (ties resolved toward the sparser model),
// symmetrizes the support over conjugate pairs, and polishes. Records the
// choice in sweep.selected_index.
SelectedModes select_optimal_gamma(const AmplitudeProblem& problem, SparsitySweep& sweep);

} // namespace aeromodal

#endif
