#include "aeromodal/dmd.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace aeromodal {

namespace {

constexpr double k_zero_eigenvalue = 1e-12; // eigenvalues below this are dropped before log

Eigen::Index clamp_rank(Eigen::Index rank, Eigen::Index hi) {
  return std::max<Eigen::Index>(1, std::min(rank, hi));
}

// count of singular values meaningfully above floating-point noise
Eigen::Index numerical_rank(const Eigen::VectorXd& sv, double dim_scale) {
  const double floor = sv(0) * dim_scale * 1e-15;
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > floor) ++n;
  return std::max<Eigen::Index>(n, 1);
}

struct SecondLevel {
  Eigen::MatrixXd v;      // right singular vectors, descending
  Eigen::VectorXd sigma;  // singular values, descending
};

Eigen::Index second_level_rank(const Eigen::VectorXd& sigma_desc, double energy,
                               Eigen::Index max_rank, double dim_scale) {
  Eigen::Index k = energy_rank(sigma_desc, energy);
  k = std::min(k, numerical_rank(sigma_desc, dim_scale));
  if (max_rank > 0) k = std::min(k, max_rank);
  return clamp_rank(k, sigma_desc.size());
}

} // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> pod_project(const Eigen::MatrixXd& x,
                                                        Eigen::Index rank) {
  if (rank < 1 || rank > std::min(x.rows(), x.cols()))
    throw NumericalError("pod_project: rank out of range");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success) throw NumericalError("pod_project: SVD failed");
  Eigen::MatrixXd basis = svd.matrixU().leftCols(rank);
  Eigen::MatrixXd reduced = basis.transpose() * x;
  return {std::move(reduced), std::move(basis)};
}

ExactDmdResult exact_dmd(const Eigen::MatrixXd& h, double second_level_energy,
                         Eigen::Index max_rank) {
  const Eigen::Index n_cols = h.cols();
  if (n_cols < 2) throw NumericalError("exact_dmd: need at least two snapshots");
  const auto h1 = h.leftCols(n_cols - 1);
  const auto h2 = h.rightCols(n_cols - 1);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(h1, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("exact_dmd: SVD failed");
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma(0) <= 0.0)
    throw NumericalError("exact_dmd: first split half has rank zero");

  const auto dim_scale = static_cast<double>(std::max(h.rows(), n_cols - 1));
  const Eigen::Index k = second_level_rank(sigma, second_level_energy, max_rank, dim_scale);

  const Eigen::MatrixXd u = svd.matrixU().leftCols(k);
  const Eigen::MatrixXd v_scaled =
      svd.matrixV().leftCols(k) * sigma.head(k).cwiseInverse().asDiagonal();
  const Eigen::MatrixXd a_tilde = u.transpose() * h2 * v_scaled;

  Eigen::EigenSolver<Eigen::MatrixXd> eig(a_tilde);
  if (eig.info() != Eigen::Success) throw NumericalError("exact_dmd: eigendecomposition failed");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < k; ++i)
    if (std::abs(eig.eigenvalues()(i)) >= k_zero_eigenvalue) keep.push_back(i);

  ExactDmdResult result;
  result.second_basis = u;
  result.second_singular_values = sigma.head(k);
  result.second_rank = k;
  result.eigenvalues.resize(static_cast<Eigen::Index>(keep.size()));
  Eigen::MatrixXcd w(k, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    result.eigenvalues(static_cast<Eigen::Index>(j)) = eig.eigenvalues()(keep[j]);
    w.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(keep[j]);
  }
  result.reduced_modes = (h2 * v_scaled).cast<std::complex<double>>() * w;
  return result;
}

HankelDmdResult hankel_dmd(const Eigen::MatrixXd& x_reduced, const HankelConfig& cfg,
                           Eigen::Index max_rank_auto) {
  const Eigen::Index m = x_reduced.cols();
  const Eigen::Index d = cfg.d;
  if (d < 1) throw NumericalError("hankel_dmd: delay must be >= 1");
  if (d >= m) throw NumericalError("hankel_dmd: delay must be smaller than the column count");
  const Eigen::Index len = m - d; // columns of each split half

  // Gram matrices of the two split halves follow from diagonal prefix sums of
  // K = X^T X: (H1^T H1)[a,b] = sum_j K[a+j, b+j], (H1^T H2)[a,b] = sum_j K[a+j, b+1+j].
  const Eigen::MatrixXd k_full = x_reduced.transpose() * x_reduced;
  Eigen::MatrixXd gram(len, len);
  Eigen::MatrixXd cross(len, len);
  Eigen::VectorXd prefix(m);
  for (Eigen::Index delta = 0; delta <= len; ++delta) {
    const Eigen::Index diag_len = m - delta;
    double acc = 0.0;
    for (Eigen::Index u = 0; u < diag_len; ++u) {
      acc += k_full(u, u + delta);
      prefix(u) = acc;
    }
    auto window_sum = [&](Eigen::Index first) {
      return prefix(first + d - 1) - (first > 0 ? prefix(first - 1) : 0.0);
    };
    if (delta <= len - 1)
      for (Eigen::Index a = 0; a + delta < len; ++a)
        gram(a, a + delta) = gram(a + delta, a) = window_sum(a);
    const Eigen::Index a_lo = delta == 0 ? 1 : 0;
    const Eigen::Index a_hi = std::min(len - 1, len - delta);
    for (Eigen::Index a = a_lo; a <= a_hi; ++a) cross(a, a + delta - 1) = window_sum(a);
    if (delta >= 1)
      for (Eigen::Index b = 0; b + delta + 2 <= len; ++b)
        cross(b + delta + 1, b) = prefix(b + d) - prefix(b);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_gram(gram);
  if (eig_gram.info() != Eigen::Success)
    throw NumericalError("hankel_dmd: Gram eigendecomposition failed");

  Eigen::VectorXd sigma(len);
  for (Eigen::Index i = 0; i < len; ++i)
    sigma(i) = std::sqrt(std::max(eig_gram.eigenvalues()(len - 1 - i), 0.0));
  if (sigma(0) <= 0.0) throw NumericalError("hankel_dmd: embedded matrix has rank zero");

  Eigen::Index cap = cfg.max_rank;
  if (cap == 0 && max_rank_auto > 0) cap = std::max<Eigen::Index>(max_rank_auto, 64);
  // the Gram route squares the spectrum, so its noise floor sits at sqrt(eps)
  const Eigen::Index k = [&] {
    Eigen::Index rank = energy_rank(sigma, cfg.second_level_energy);
    const double floor = sigma(0) * std::sqrt(static_cast<double>(len) * 1e-14);
    Eigen::Index significant = 0;
    for (Eigen::Index i = 0; i < len; ++i)
      if (sigma(i) > floor) ++significant;
    rank = std::min(rank, std::max<Eigen::Index>(significant, 1));
    if (cap > 0) rank = std::min(rank, cap);
    return clamp_rank(rank, len);
  }();

  Eigen::MatrixXd v(len, k);
  for (Eigen::Index i = 0; i < k; ++i) v.col(i) = eig_gram.eigenvectors().col(len - 1 - i);
  const Eigen::VectorXd inv_sigma = sigma.head(k).cwiseInverse();

  const Eigen::MatrixXd cross_v = cross * v;
  const Eigen::MatrixXd a_tilde =
      inv_sigma.asDiagonal() * (v.transpose() * cross_v) * inv_sigma.asDiagonal();

  Eigen::EigenSolver<Eigen::MatrixXd> eig(a_tilde);
  if (eig.info() != Eigen::Success) throw NumericalError("hankel_dmd: eigendecomposition failed");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < k; ++i)
    if (std::abs(eig.eigenvalues()(i)) >= k_zero_eigenvalue) keep.push_back(i);

  HankelDmdResult result;
  result.second_singular_values = sigma.head(k);
  result.second_rank = k;
  result.eigenvalues.resize(static_cast<Eigen::Index>(keep.size()));
  Eigen::MatrixXcd w(k, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    result.eigenvalues(static_cast<Eigen::Index>(j)) = eig.eigenvalues()(keep[j]);
    w.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(keep[j]);
  }
  // current-time block of H2 is X[:, 1 .. len], so the block of each exact-DMD
  // mode H2 V S^-1 W needs only that slice
  const Eigen::MatrixXd t = x_reduced.middleCols(1, len) * (v * inv_sigma.asDiagonal());
  result.first_block_modes = t.cast<std::complex<double>>() * w;
  return result;
}

Eigen::MatrixXcd lift_modes(const Eigen::MatrixXcd& reduced_modes, const Eigen::MatrixXd& basis,
                            Eigen::Index d) {
  const Eigen::Index r = basis.cols();
  if (d < 1 || reduced_modes.rows() != r * d)
    throw NumericalError("lift_modes: reduced modes rows must equal basis columns times delay");
  return basis.cast<std::complex<double>>() * reduced_modes.topRows(r);
}

Eigen::VectorXcd amplitudes_pinv(const Eigen::MatrixXcd& modes, const Eigen::VectorXcd& x1) {
  if (modes.rows() != x1.size())
    throw NumericalError("amplitudes_pinv: mode rows must match the state dimension");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(modes);
  return cod.solve(x1);
}

Eigen::MatrixXd reconstruct(const DmdResult& result, Eigen::Index n_steps) {
  if (n_steps < 1) throw NumericalError("reconstruct: need at least one step");
  const Eigen::Index k = result.eigenvalues.size();
  Eigen::MatrixXcd evolution(k, n_steps);
  if (k > 0) {
    evolution.col(0) = result.amplitudes;
    for (Eigen::Index t = 1; t < n_steps; ++t)
      evolution.col(t) = evolution.col(t - 1).cwiseProduct(result.eigenvalues);
  }
  return (result.modes * evolution).real();
}

ChainResult run_dmd_chain(const Eigen::MatrixXd& x, const ChainConfig& cfg, double dt) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  if (n < 1 || m < 2) throw NumericalError("run_dmd_chain: matrix too small");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success) throw NumericalError("run_dmd_chain: SVD failed");
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv(0) <= 0.0) throw NumericalError("run_dmd_chain: zero data matrix");

  ChainResult out;
  out.singular_values = sv;

  const Eigen::Index num_rank = numerical_rank(sv, static_cast<double>(std::max(n, m)));
  Eigen::Index rank = 1;
  switch (cfg.truncation.method) {
    case RankMethod::GavishDonoho:
      out.truncation = optimal_hard_threshold(sv, n, m, cfg.truncation.eta);
      rank = out.truncation.rank;
      break;
    case RankMethod::Energy:
      rank = energy_rank(sv, cfg.truncation.energy);
      break;
    case RankMethod::Fixed:
      rank = cfg.truncation.fixed_rank;
      break;
    case RankMethod::Auto: {
      out.truncation = optimal_hard_threshold(sv, n, m, cfg.truncation.eta);
      rank = std::max(out.truncation.rank, energy_rank(sv, cfg.truncation.energy));
      break;
    }
  }
  rank = clamp_rank(std::min(rank, num_rank), sv.size());
  out.truncation.rank = rank;
  out.truncation.energy_captured = sv.head(rank).squaredNorm() / sv.squaredNorm();
  out.truncation.beta = static_cast<double>(std::min(n, m)) / static_cast<double>(std::max(n, m));

  const Eigen::MatrixXd basis = svd.matrixU().leftCols(rank);
  const Eigen::MatrixXd reduced = basis.transpose() * x;

  HankelConfig hankel = cfg.hankel;
  if (hankel.d >= m)
    throw NumericalError("run_dmd_chain: delay " + std::to_string(hankel.d) +
                         " too large for " + std::to_string(m) + " snapshots");
  const HankelDmdResult embedded = hankel_dmd(reduced, hankel, rank);
  out.second_rank = embedded.second_rank;

  DmdResult& dmd = out.dmd;
  dmd.eigenvalues = embedded.eigenvalues;
  dmd.modes = lift_modes(embedded.first_block_modes, basis, 1);
  dmd.rank = rank;
  dmd.delay = hankel.d;
  dmd.dt = dt;
  dmd.omega.resize(dmd.eigenvalues.size());
  for (Eigen::Index i = 0; i < dmd.eigenvalues.size(); ++i)
    dmd.omega(i) = std::log(dmd.eigenvalues(i)) / dt;
  dmd.amplitudes = amplitudes_pinv(dmd.modes, x.col(0).cast<std::complex<double>>());
  return out;
}

DelaySweep sweep_delay(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& candidates,
                       const ChainConfig& cfg, double dt) {
  if (candidates.empty()) throw NumericalError("sweep_delay: no candidates");
  for (const Eigen::Index d : candidates)
    if (d < 1 || d >= x.cols()) throw NumericalError("sweep_delay: candidate delay out of range");

  DelaySweep sweep;
  sweep.curve.resize(candidates.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(candidates.size()); ++i) {
    try {
      ChainConfig local = cfg;
      local.hankel.d = candidates[static_cast<std::size_t>(i)];
      const ChainResult chain = run_dmd_chain(x, local, dt);
      const Eigen::MatrixXd rec = reconstruct(chain.dmd, x.cols());
      sweep.curve[static_cast<std::size_t>(i)] = {candidates[static_cast<std::size_t>(i)],
                                                  rel_rms(x, rec)};
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  double best = sweep.curve.front().rel_rms;
  for (const auto& point : sweep.curve) best = std::min(best, point.rel_rms);
  sweep.recommended = sweep.curve.front().d;
  for (const auto& point : sweep.curve)
    if (point.rel_rms <= best + 0.01) {
      sweep.recommended = point.d;
      break;
    }
  return sweep;
}

std::pair<ChainResult, ReconstructionReport> iterate_until_converged(
    const Eigen::MatrixXd& x, const ChainConfig& cfg, const LoopConfig& loop, double dt,
    const Eigen::MatrixXd* reference) {
  if (!(loop.threshold > 0.0) || loop.threshold >= 1.0 || loop.max_outer < 1)
    throw NumericalError("iterate_until_converged: invalid loop configuration");
  const Eigen::MatrixXd& ref = reference ? *reference : x;

  ReconstructionReport report;
  Eigen::MatrixXd current = x;
  ChainResult chain;
  for (int outer = 1; outer <= loop.max_outer; ++outer) {
    chain = run_dmd_chain(current, cfg, dt);
    const Eigen::MatrixXd rec = reconstruct(chain.dmd, x.cols());
    const double err = rel_rms(ref, rec);
    report.history.push_back(err);
    if (err <= loop.threshold) {
      report.converged = true;
      break;
    }
    const std::size_t steps = report.history.size();
    if (steps >= 2 && report.history[steps - 2] - err < loop.stall) break;
    if (outer < loop.max_outer) current = rec;
  }
  report.rel_rms = report.history.back();
  report.iterations = static_cast<int>(report.history.size());
  return {std::move(chain), std::move(report)};
}

ConjugatePairing conjugate_pairs(const Eigen::VectorXcd& eigenvalues, double tol) {
  const Eigen::Index k = eigenvalues.size();
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  ConjugatePairing pairing;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (used[static_cast<std::size_t>(i)]) continue;
    used[static_cast<std::size_t>(i)] = true;
    const std::complex<double> target = std::conj(eigenvalues(i));
    Eigen::Index best = -1;
    double best_dist = tol;
    if (eigenvalues(i).imag() != 0.0) {
      for (Eigen::Index j = i + 1; j < k; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double dist = std::abs(eigenvalues(j) - target);
        if (dist <= best_dist) {
          best_dist = dist;
          best = j;
        }
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = true;
      pairing.pairs.emplace_back(i, best);
    } else {
      pairing.singles.push_back(i);
    }
  }
  return pairing;
}

std::vector<ModalParameter> extract_modal_parameters(const DmdResult& result) {
  const ConjugatePairing pairing = conjugate_pairs(result.eigenvalues);

  std::vector<Eigen::Index> representatives;
  representatives.reserve(pairing.pairs.size() + pairing.singles.size());
  for (const auto& [i, j] : pairing.pairs)
    representatives.push_back(result.omega(i).imag() >= 0.0 ? i : j);
  for (const Eigen::Index s : pairing.singles) representatives.push_back(s);

  std::vector<ModalParameter> params;
  params.reserve(representatives.size());
  for (const Eigen::Index idx : representatives) {
    const std::complex<double> w = result.omega(idx);
    ModalParameter p;
    p.scaled_freq = std::abs(w.imag()) * result.dt / std::numbers::pi;
    const double mag = std::abs(w);
    p.damping_ratio = mag > 0.0 ? -w.real() / mag : 0.0;
    p.growth_rate = w.real();
    p.is_static = p.scaled_freq < 1e-4;
    p.amplitude = result.amplitudes.size() > idx ? result.amplitudes(idx) : 0.0;
    params.push_back(p);
  }
  std::sort(params.begin(), params.end(),
            [](const ModalParameter& a, const ModalParameter& b) {
              return a.scaled_freq < b.scaled_freq;
            });
  return params;
}

} // namespace aeromodal
