#include "aeromodal/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "aeromodal/errors.hpp"
#include "aeromodal/rng.hpp"

namespace aeromodal {

namespace {

using Cplx = std::complex<double>;

// maneuver count and per-maneuver channel count implied by channel-major labels
std::pair<Eigen::Index, Eigen::Index> snapshot_layout(const SnapshotMatrix& snapshot) {
  const auto rows = static_cast<Eigen::Index>(snapshot.row_labels.size());
  if (rows == 0 || rows != snapshot.values.rows())
    throw NumericalError("compress: snapshot lacks consistent row labels");
  Eigen::Index maneuvers = 0;
  while (maneuvers < rows &&
         snapshot.row_labels[static_cast<std::size_t>(maneuvers)].channel_id ==
             snapshot.row_labels[0].channel_id)
    ++maneuvers;
  if (maneuvers == 0 || rows % maneuvers != 0)
    throw NumericalError("compress: snapshot rows are not channel-major blocks");
  return {rows / maneuvers, maneuvers};
}

} // namespace

std::string to_string(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::UniformRandom: return "uniform";
    case MeasurementKind::GaussianRandom: return "gaussian";
    case MeasurementKind::SinglePixel: return "single_pixel";
  }
  return "gaussian";
}

MeasurementKind measurement_kind_from_string(const std::string& name) {
  if (name == "uniform" || name == "uniform_random") return MeasurementKind::UniformRandom;
  if (name == "gaussian" || name == "gaussian_random") return MeasurementKind::GaussianRandom;
  if (name == "single_pixel" || name == "single-pixel") return MeasurementKind::SinglePixel;
  throw ParseError("unknown measurement kind '" + name + "'");
}

MeasurementMatrix make_measurement(MeasurementKind kind, Eigen::Index p, Eigen::Index n,
                                   std::uint64_t seed) {
  if (p < 1 || p > n) throw NumericalError("make_measurement: need 1 <= p <= n");
  MeasurementMatrix c;
  c.kind = kind;
  c.seed = seed;
  c.p = p;
  c.n = n;
  c.entries = Eigen::MatrixXd::Zero(p, n);

  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  switch (kind) {
    case MeasurementKind::UniformRandom:
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < n; ++j) c.entries(i, j) = rng.uniform(-1.0, 1.0) * scale;
      break;
    case MeasurementKind::GaussianRandom:
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < n; ++j) c.entries(i, j) = rng.normal() * scale;
      break;
    case MeasurementKind::SinglePixel: {
      const auto rows = rng.sample_without_replacement(n, p);
      for (Eigen::Index i = 0; i < p; ++i) c.entries(i, rows[static_cast<std::size_t>(i)]) = 1.0;
      break;
    }
  }
  return c;
}

void save_measurement_csv(const MeasurementMatrix& c, std::ostream& out) {
  out << to_string(c.kind) << ',' << c.p << ',' << c.n << ',' << c.seed << '\n';
  for (Eigen::Index i = 0; i < c.p; ++i) {
    for (Eigen::Index j = 0; j < c.n; ++j) out << (j ? "," : "") << c.entries(i, j);
    out << '\n';
  }
}

MeasurementMatrix load_measurement_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty measurement file", 1);
  std::istringstream header(line);
  std::string kind_name, field;
  MeasurementMatrix c;
  if (!std::getline(header, kind_name, ',')) throw ParseError("measurement header", 1);
  c.kind = measurement_kind_from_string(kind_name);
  std::getline(header, field, ',');
  c.p = std::stol(field);
  std::getline(header, field, ',');
  c.n = std::stol(field);
  std::getline(header, field, ',');
  c.seed = std::stoull(field);
  c.entries.resize(c.p, c.n);
  for (Eigen::Index i = 0; i < c.p; ++i) {
    if (!std::getline(in, line)) throw ParseError("truncated measurement file", i + 2);
    std::istringstream row(line);
    for (Eigen::Index j = 0; j < c.n; ++j) {
      if (!std::getline(row, field, ',')) throw ParseError("short measurement row", i + 2);
      c.entries(i, j) = std::stod(field);
    }
  }
  return c;
}

TestPointDataset compress(const TestPointDataset& dataset, const MeasurementMatrix& c) {
  const Eigen::Index n_valid = dataset.valid_channel_count();
  if (c.n != n_valid)
    throw NumericalError("compress: measurement expects " + std::to_string(c.n) +
                         " sensors, dataset has " + std::to_string(n_valid) + " valid channels");

  Eigen::MatrixXd full(n_valid, dataset.sample_count());
  Eigen::Index row = 0;
  for (const auto& ch : dataset.channels)
    if (ch.valid) full.row(row++) = ch.samples.transpose();
  const Eigen::MatrixXd projected = c.entries * full;

  TestPointDataset out;
  out.test_point_id = dataset.test_point_id;
  out.dt = dataset.dt;
  out.channels.resize(static_cast<std::size_t>(c.p));
  for (Eigen::Index i = 0; i < c.p; ++i) {
    auto& ch = out.channels[static_cast<std::size_t>(i)];
    char name[16];
    std::snprintf(name, sizeof(name), "cs%02ld", static_cast<long>(i));
    ch.channel_id = name;
    ch.samples = projected.row(i).transpose();
    ch.valid = true;
  }
  return out;
}

SnapshotMatrix compress(const SnapshotMatrix& snapshot, const MeasurementMatrix& c) {
  const auto [n_channels, n_maneuvers] = snapshot_layout(snapshot);
  if (c.n != n_channels)
    throw NumericalError("compress: measurement expects " + std::to_string(c.n) +
                         " sensors, snapshot has " + std::to_string(n_channels));

  SnapshotMatrix out;
  out.dt = snapshot.dt;
  out.values.resize(c.p * n_maneuvers, snapshot.values.cols());
  out.row_labels.reserve(static_cast<std::size_t>(c.p * n_maneuvers));
  for (Eigen::Index i = 0; i < c.p; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "cs%02ld", static_cast<long>(i));
    for (Eigen::Index j = 0; j < n_maneuvers; ++j)
      out.row_labels.push_back({name, snapshot.row_labels[static_cast<std::size_t>(j)].maneuver});
  }
  for (Eigen::Index j = 0; j < n_maneuvers; ++j) {
    Eigen::MatrixXd block(n_channels, snapshot.values.cols());
    for (Eigen::Index ch = 0; ch < n_channels; ++ch)
      block.row(ch) = snapshot.values.row(ch * n_maneuvers + j);
    const Eigen::MatrixXd projected = c.entries * block;
    for (Eigen::Index i = 0; i < c.p; ++i) out.values.row(i * n_maneuvers + j) = projected.row(i);
  }
  return out;
}

SparseBasis identity_basis(Eigen::Index n) {
  return {Eigen::MatrixXd::Identity(n, n), "identity"};
}

SparseBasis fourier_basis(Eigen::Index n) {
  Eigen::MatrixXd psi(n, n);
  const double norm0 = std::sqrt(1.0 / static_cast<double>(n));
  const double norm = std::sqrt(2.0 / static_cast<double>(n));
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      psi(i, k) = (k == 0 ? norm0 : norm) *
                  std::cos(std::numbers::pi * static_cast<double>(k) *
                           (static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return {std::move(psi), "fourier"};
}

double rip_diagnostic(const MeasurementMatrix& c, const SparseBasis& psi, Eigen::Index k,
                      int trials, std::uint64_t seed) {
  if (k < 0 || k > c.p) throw NumericalError("rip_diagnostic: need 0 <= k <= p");
  if (trials < 1) throw NumericalError("rip_diagnostic: need at least one trial");
  if (psi.psi.rows() != c.n) throw NumericalError("rip_diagnostic: basis dimension mismatch");
  if (k == 0) return 0.0;

  const Eigen::MatrixXd a = c.entries * psi.psi;
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto support = rng.sample_without_replacement(a.cols(), k);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(a.cols());
    for (const Eigen::Index idx : support) s(idx) = rng.normal();
    const double norm = s.norm();
    if (norm == 0.0) continue;
    s /= norm;
    worst = std::max(worst, std::abs((a * s).squaredNorm() - 1.0));
  }
  return worst;
}

Eigen::VectorXcd omp(const Eigen::MatrixXcd& dictionary, const Eigen::VectorXcd& y,
                     Eigen::Index max_atoms, double tol) {
  const Eigen::Index n_atoms = dictionary.cols();
  if (max_atoms < 0 || max_atoms > dictionary.rows())
    throw NumericalError("omp: sparsity must satisfy 0 <= k <= measurements");

  Eigen::VectorXd norms(n_atoms);
  for (Eigen::Index j = 0; j < n_atoms; ++j) {
    norms(j) = dictionary.col(j).norm();
    if (norms(j) == 0.0)
      throw NumericalError("omp: dictionary column " + std::to_string(j) + " has zero norm");
  }

  Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(n_atoms);
  if (max_atoms == 0) return coeffs;

  Eigen::VectorXcd residual = y;
  std::vector<Eigen::Index> support;
  std::vector<bool> picked(static_cast<std::size_t>(n_atoms), false);
  Eigen::MatrixXcd selected(dictionary.rows(), max_atoms);
  Eigen::VectorXcd fit;

  for (Eigen::Index step = 0; step < max_atoms; ++step) {
    Eigen::Index best = -1;
    double best_corr = -1.0;
    for (Eigen::Index j = 0; j < n_atoms; ++j) {
      if (picked[static_cast<std::size_t>(j)]) continue;
      const double corr = std::abs(dictionary.col(j).dot(residual)) / norms(j);
      if (corr > best_corr) {
        best_corr = corr;
        best = j;
      }
    }
    if (best < 0) break;
    picked[static_cast<std::size_t>(best)] = true;
    support.push_back(best);
    selected.col(static_cast<Eigen::Index>(support.size()) - 1) = dictionary.col(best);

    const auto k = static_cast<Eigen::Index>(support.size());
    fit = selected.leftCols(k).householderQr().solve(y);
    residual = y - selected.leftCols(k) * fit;
    if (residual.norm() <= tol) break;
  }
  for (std::size_t i = 0; i < support.size(); ++i)
    coeffs(support[i]) = fit(static_cast<Eigen::Index>(i));
  return coeffs;
}

Eigen::VectorXd omp(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& y,
                    Eigen::Index max_atoms, double tol) {
  return omp(Eigen::MatrixXcd(dictionary.cast<Cplx>()), Eigen::VectorXcd(y.cast<Cplx>()),
             max_atoms, tol)
      .real();
}

FullModeRecovery reconstruct_full_modes(const Eigen::MatrixXcd& compressed_modes,
                                        const MeasurementMatrix& c, const SparseBasis& psi,
                                        Eigen::Index k) {
  if (psi.psi.rows() != c.n) throw NumericalError("reconstruct_full_modes: basis dimension mismatch");
  if (compressed_modes.rows() != c.p)
    throw NumericalError("reconstruct_full_modes: mode rows must equal measurement count");

  const Eigen::MatrixXcd dictionary = (c.entries * psi.psi).cast<Cplx>();
  const Eigen::MatrixXcd lift = psi.psi.cast<Cplx>();

  FullModeRecovery out;
  const Eigen::Index n_modes = compressed_modes.cols();
  out.modes = Eigen::MatrixXcd::Zero(psi.psi.rows(), n_modes);
  out.ok.assign(static_cast<std::size_t>(n_modes), false);
  out.residual.assign(static_cast<std::size_t>(n_modes), 0.0);

  for (Eigen::Index j = 0; j < n_modes; ++j) {
    const Eigen::VectorXcd target = compressed_modes.col(j);
    if (k > c.p) {
      out.residual[static_cast<std::size_t>(j)] = target.norm();
      continue; // underdetermined beyond the sparsity budget
    }
    try {
      const Eigen::VectorXcd sparse = omp(dictionary, target, k, 1e-12 * target.norm());
      out.modes.col(j) = lift * sparse;
      out.residual[static_cast<std::size_t>(j)] = (dictionary * sparse - target).norm();
      out.ok[static_cast<std::size_t>(j)] = true;
    } catch (const Error&) {
      out.modes.col(j).setZero();
    }
  }
  return out;
}

} // namespace aeromodal
