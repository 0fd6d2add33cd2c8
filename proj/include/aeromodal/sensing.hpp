#ifndef AEROMODAL_SENSING_HPP
#define AEROMODAL_SENSING_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aeromodal/channels.hpp"

namespace aeromodal {

enum class MeasurementKind { UniformRandom, GaussianRandom, SinglePixel };

std::string to_string(MeasurementKind kind);
MeasurementKind measurement_kind_from_string(const std::string& name);

// p x n sensor-space projection. Gaussian entries are N(0, 1/n), uniform
// entries U(-1,1)/sqrt(n), single-pixel rows are distinct canonical basis
// vectors. Fully determined by (kind, p, n, seed).
struct MeasurementMatrix {
  MeasurementKind kind = MeasurementKind::GaussianRandom;
  Eigen::MatrixXd entries;
  std::uint64_t seed = 0;
  Eigen::Index p = 0;
  Eigen::Index n = 0;
};

MeasurementMatrix make_measurement(MeasurementKind kind, Eigen::Index p, Eigen::Index n,
                                   std::uint64_t seed);

// Audit format: one header line `kind,p,n,seed`, then one CSV row per matrix row.
void save_measurement_csv(const MeasurementMatrix& c, std::ostream& out);
MeasurementMatrix load_measurement_csv(std::istream& in);

// Sensor-level compression: each pseudo-channel is the C-weighted combination
// of the valid channels. C.n must equal the valid channel count.
TestPointDataset compress(const TestPointDataset& dataset, const MeasurementMatrix& c);

// Same projection applied to an already stacked snapshot matrix, block by
// maneuver, preserving the channel-major row layout.
SnapshotMatrix compress(const SnapshotMatrix& snapshot, const MeasurementMatrix& c);

// Transform basis for sparse mode recovery; columns are unit norm.
struct SparseBasis {
  Eigen::MatrixXd psi;
  std::string label;
};

SparseBasis identity_basis(Eigen::Index n);
// Orthonormal real Fourier (DCT-II) basis.
SparseBasis fourier_basis(Eigen::Index n);

// Monte Carlo lower bound on the restricted-isometry constant of C Psi over
// random k-sparse unit vectors: max |  ||C Psi s||^2 - 1 |.
double rip_diagnostic(const MeasurementMatrix& c, const SparseBasis& psi, Eigen::Index k,
                      int trials, std::uint64_t seed);

// Orthogonal matching pursuit: repeatedly picks the atom with the largest
// normalized conjugate correlation, refits by least squares on the support,
// and stops at max_atoms atoms or when the residual drops below tol.
Eigen::VectorXcd omp(const Eigen::MatrixXcd& dictionary, const Eigen::VectorXcd& y,
                     Eigen::Index max_atoms, double tol = 0.0);
Eigen::VectorXd omp(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& y,
                    Eigen::Index max_atoms, double tol = 0.0);

struct FullModeRecovery {
  Eigen::MatrixXcd modes;     // n x k full-state modes (zero columns on failure)
  std::vector<bool> ok;       // per-mode success flag
  std::vector<double> residual;
};

// Per compressed mode, solves (C Psi) phi_s = phi_y by OMP at sparsity k and
// lifts phi_x = Psi phi_s. Failures are flagged per mode.
FullModeRecovery reconstruct_full_modes(const Eigen::MatrixXcd& compressed_modes,
                                        const MeasurementMatrix& c, const SparseBasis& psi,
                                        Eigen::Index k);

} // namespace aeromodal

#endif
