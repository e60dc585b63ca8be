// Copyright 2026 the pawlab authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "pawlab/clockwork.hpp"
#include "pawlab/hilbert.hpp"

#include <cstdint>
#include <random>

namespace pawlab::typicality {

using clockwork::ClockSpectrum;

/// Total energy window [E, E + delta], with delta far below the system gaps so
/// the per-level environment index sets stay pairwise disjoint.
struct EnergyShell {
  double total_energy = 0.0; // E
  double width = 0.0;        // delta
};

/// One Gaussian-random universe drawn inside an energy shell.
struct ShellSample {
  ClockSpectrum environment;
  Operator system_h;
  Spectrum system_eigs;
  EnergyShell shell;
  std::uint64_t seed = 0;
  std::vector<std::vector<Index>> index_sets;  // I_j: environment levels per system level
  std::vector<std::vector<double>> offsets;    // Delta_ij in [0, delta]
  Eigen::MatrixXcd coeffs;                     // c_ij, rows = environment, cols = system
  StateVector global_state;                    // dims {d_env, d_S}

  Index env_dim() const { return environment.dim(); }
  Index system_dim() const { return system_h.size(); }
  double system_level(Index j) const { return system_eigs.eigenvalues(j); }
};

namespace detail {

/// Deterministic standard-normal draws: Box-Muller on explicit 53-bit
/// uniforms, so outputs are identical across standard libraries.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open();
    double u2 = uniform_open();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double uniform_open() {
    // (0, 1]: never zero, so the log above is finite.
    return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1p-53;
  }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace detail

/// Draws the shell-supported Gaussian state: independent real and imaginary
/// parts with variance 1/2 on every allowed (environment, system) pair, zero
/// elsewhere, then normalized. Deterministic under the seed.
inline ShellSample sample_shell_state(const Operator &system_h, const ClockSpectrum &env,
                                      const EnergyShell &shell, std::uint64_t seed) {
  if (!is_hermitian(system_h.mat))
    throw std::invalid_argument("sample_shell_state: system Hamiltonian must be Hermitian");
  if (!(shell.width > 0.0))
    throw std::invalid_argument("sample_shell_state: shell width must be positive");
  env.validate();

  ShellSample s;
  s.environment = env;
  s.system_h = system_h;
  s.system_eigs = eigensystem(system_h);
  s.shell = shell;
  s.seed = seed;

  const Index dj = system_h.size();
  const Index di = env.dim();
  s.index_sets.resize(dj);
  s.offsets.resize(dj);
  std::vector<Index> owner(di, -1);
  for (Index j = 0; j < dj; ++j) {
    double lo = shell.total_energy - s.system_eigs.eigenvalues(j);
    for (Index i = 0; i < di; ++i) {
      double e = env.energy(i);
      if (e >= lo - 1e-12 && e <= lo + shell.width + 1e-12) {
        if (owner[i] >= 0)
          throw std::invalid_argument(
              "sample_shell_state: overlapping index sets (shell too wide for the system gaps)");
        owner[i] = j;
        s.index_sets[j].push_back(i);
        s.offsets[j].push_back(e - lo);
      }
    }
    if (s.index_sets[j].empty())
      throw std::invalid_argument("sample_shell_state: shell misses system level " +
                                  std::to_string(s.system_eigs.eigenvalues(j)));
  }

  detail::GaussianStream gauss(seed);
  s.coeffs = Eigen::MatrixXcd::Zero(di, dj);
  double norm2 = 0.0;
  for (Index j = 0; j < dj; ++j)
    for (Index i : s.index_sets[j]) {
      cxd c(gauss() * std::numbers::sqrt2 / 2.0, gauss() * std::numbers::sqrt2 / 2.0);
      s.coeffs(i, j) = c;
      norm2 += std::norm(c);
    }
  s.coeffs /= std::sqrt(norm2);

  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(di * dj);
  for (Index j = 0; j < dj; ++j)
    for (Index i : s.index_sets[j])
      amps.segment(i * dj, dj) += s.coeffs(i, j) * s.system_eigs.eigenvectors.col(j);
  s.global_state = StateVector(std::move(amps), {di, dj});
  return s;
}

/// Environment spectrum plus shell hosting a prescribed number of levels per
/// system level. System levels must land on the delta / max(sizes) lattice.
struct DesignedShell {
  ClockSpectrum environment;
  EnergyShell shell;
};

inline DesignedShell design_shell(const Spectrum &system_eigs, const std::vector<Index> &sizes,
                                  double delta) {
  const Index dj = system_eigs.eigenvalues.size();
  if (static_cast<Index>(sizes.size()) != dj)
    throw std::invalid_argument("design_shell: one size per system level required");
  Index n_max = 1;
  for (Index n : sizes) {
    if (n < 1) throw std::invalid_argument("design_shell: sizes must be positive");
    n_max = std::max(n_max, n);
  }
  double min_gap = std::numeric_limits<double>::infinity();
  for (Index j = 1; j < dj; ++j)
    min_gap = std::min(min_gap, system_eigs.eigenvalues(j) - system_eigs.eigenvalues(j - 1));
  if (dj > 1 && !(delta < min_gap))
    throw std::invalid_argument("design_shell: delta must be below the smallest system gap");

  const double step = delta / static_cast<double>(n_max);
  const double e_top = system_eigs.eigenvalues(dj - 1);
  // Window for level j starts at E - E_j; take E = E_top so the top window
  // starts at lattice origin 0.
  std::vector<long long> labels;
  for (Index j = dj - 1; j >= 0; --j) {
    double start = e_top - system_eigs.eigenvalues(j);
    double raw = start / step;
    if (std::abs(raw - std::round(raw)) > 1e-9 * std::max(1.0, std::abs(raw)))
      throw std::invalid_argument("design_shell: system gaps must sit on the delta/max(sizes) "
                                  "lattice");
    long long base = std::llround(raw);
    for (Index k = 0; k < sizes[j]; ++k) labels.push_back(base + k);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  Index total = 0;
  for (Index n : sizes) total += n;
  if (static_cast<Index>(labels.size()) != total)
    throw std::invalid_argument("design_shell: windows collide; reduce delta or sizes");

  DesignedShell out;
  out.environment =
      ClockSpectrum::from_labels(std::move(labels), clockwork::two_pi / step, 0.0, 1.0);
  out.shell = EnergyShell{e_top, delta};
  return out;
}

struct CanonicalReport {
  Operator rho_s;     // reduced density matrix, caller's basis
  Operator canonical; // exp(-beta H_S) / Z
  double trace_dist = 0.0;
};

/// Reduced state of S (diagonal in the energy eigenbasis thanks to disjoint
/// index sets) against the canonical state at inverse temperature beta.
inline CanonicalReport reduced_vs_canonical(const ShellSample &s, double beta) {
  const Index dj = s.system_dim();
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(dj);
  for (Index j = 0; j < dj; ++j)
    for (Index i : s.index_sets[j]) weights(j) += std::norm(s.coeffs(i, j));

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dj, dj);
  Eigen::MatrixXcd can = Eigen::MatrixXcd::Zero(dj, dj);
  double z = 0.0;
  for (Index j = 0; j < dj; ++j) z += std::exp(-beta * s.system_eigs.eigenvalues(j));
  for (Index j = 0; j < dj; ++j) {
    const auto &v = s.system_eigs.eigenvectors.col(j);
    rho += weights(j) * (v * v.adjoint());
    can += std::exp(-beta * s.system_eigs.eigenvalues(j)) / z * (v * v.adjoint());
  }
  CanonicalReport rep;
  rep.rho_s = Operator(std::move(rho), {dj});
  rep.canonical = Operator(std::move(can), {dj});
  rep.trace_dist = trace_distance(rep.rho_s, rep.canonical);
  return rep;
}

/// Least-squares fit of log(weight_j) against -E_j; diagnostic only.
inline double beta_fit(const ShellSample &s) {
  const Index dj = s.system_dim();
  double se = 0.0, sl = 0.0, see = 0.0, sel = 0.0;
  for (Index j = 0; j < dj; ++j) {
    double w = 0.0;
    for (Index i : s.index_sets[j]) w += std::norm(s.coeffs(i, j));
    double e = s.system_eigs.eigenvalues(j);
    double l = std::log(std::max(w, 1e-300));
    se += e;
    sl += l;
    see += e * e;
    sel += e * l;
  }
  double n = static_cast<double>(dj);
  double denom = see - se * se / n;
  if (denom <= 0.0) return 0.0;
  return -(sel - se * sl / n) / denom;
}

/// (1/T) int <t|Psi><Psi|t> dt. With grid_n = 0 the period average is closed
/// with the exact delta identity (one term per environment level); a positive
/// grid_n requests plain quadrature instead, for convergence studies.
inline Operator temporal_trace(const ShellSample &s, Index grid_n = 0) {
  const Index dj = s.system_dim(), di = s.env_dim();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dj, dj);
  if (grid_n == 0) {
    for (Index i = 0; i < di; ++i) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dj);
      for (Index j = 0; j < dj; ++j)
        if (s.coeffs(i, j) != cxd(0.0, 0.0))
          v += s.coeffs(i, j) * s.system_eigs.eigenvectors.col(j);
      acc += v * v.adjoint();
    }
  } else {
    const double T = s.environment.period;
    for (Index g = 0; g < grid_n; ++g) {
      double t = static_cast<double>(g) * T / static_cast<double>(grid_n);
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dj);
      for (Index j = 0; j < dj; ++j)
        for (Index i : s.index_sets[j])
          v += s.coeffs(i, j) * std::polar(1.0, s.environment.energy(i) * t) *
               s.system_eigs.eigenvectors.col(j);
      acc += v * v.adjoint() / static_cast<double>(grid_n);
    }
  }
  return Operator(std::move(acc), {dj});
}

struct RelativeDynamics {
  StateVector state;        // unnormalized, global total-energy phase removed
  Eigen::VectorXcd alpha;   // alpha_j(t)
  double norm = 0.0;        // sum_j |alpha_j(t)|^2
};

/// phi(t) = sum_j alpha_j(t) exp(-i E_j t) |E_j>, alpha_j(t) =
/// sum_{i in I_j} c_ij exp(i Delta_ij t).
inline RelativeDynamics relative_dynamics(const ShellSample &s, double t) {
  const Index dj = s.system_dim();
  RelativeDynamics out;
  out.alpha = Eigen::VectorXcd::Zero(dj);
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(dj);
  for (Index j = 0; j < dj; ++j) {
    for (std::size_t n = 0; n < s.index_sets[j].size(); ++n)
      out.alpha(j) += s.coeffs(s.index_sets[j][n], j) * std::polar(1.0, s.offsets[j][n] * t);
    amps += out.alpha(j) * std::polar(1.0, -s.system_eigs.eigenvalues(j) * t) *
            s.system_eigs.eigenvectors.col(j);
    out.norm += std::norm(out.alpha(j));
  }
  out.state = StateVector(std::move(amps), {dj});
  return out;
}

/// H_S |phi(t)> minus the shell-offset term of the non-local evolution
/// equation, both closed with the delta identity; equals i d/dt |phi(t)>.
inline StateVector nonlocal_rhs(const ShellSample &s, double t) {
  const Index dj = s.system_dim();
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(dj);
  for (Index j = 0; j < dj; ++j) {
    double ej = s.system_eigs.eigenvalues(j);
    for (std::size_t n = 0; n < s.index_sets[j].size(); ++n) {
      double delta = s.offsets[j][n];
      cxd term = s.coeffs(s.index_sets[j][n], j) * std::polar(1.0, (delta - ej) * t);
      amps += (ej - delta) * term * s.system_eigs.eigenvectors.col(j);
    }
  }
  return StateVector(std::move(amps), {dj});
}

/// <X>(t) of the two-level oscillator sample from the closed double sum over
/// the shell coefficients.
inline double oscillator_x_expectation(const ShellSample &s, double mass, double omega,
                                       double t) {
  if (s.system_dim() != 2)
    throw std::invalid_argument("oscillator_x_expectation: exactly two system levels required");
  double gap = s.system_eigs.eigenvalues(1) - s.system_eigs.eigenvalues(0);
  if (std::abs(gap - omega) > 1e-9 * std::max(1.0, std::abs(omega)))
    throw std::invalid_argument("oscillator_x_expectation: level gap does not match omega");
  double acc = 0.0;
  for (std::size_t a = 0; a < s.index_sets[0].size(); ++a)
    for (std::size_t b = 0; b < s.index_sets[1].size(); ++b) {
      cxd c0 = s.coeffs(s.index_sets[0][a], 0);
      cxd c1 = s.coeffs(s.index_sets[1][b], 1);
      double dphi = std::arg(c1) - std::arg(c0);
      acc += std::abs(c0) * std::abs(c1) *
             std::cos((omega + (s.offsets[0][a] - s.offsets[1][b])) * t - dphi);
    }
  return std::sqrt(2.0 / (mass * omega)) * acc;
}

/// First-order short-time form of <X>(t), valid for t << 1/|Delta spread|.
inline double oscillator_x_first_order(const ShellSample &s, double mass, double omega,
                                       double t) {
  if (s.system_dim() != 2)
    throw std::invalid_argument("oscillator_x_first_order: exactly two system levels required");
  RelativeDynamics at0 = relative_dynamics(s, 0.0);
  double a0 = std::abs(at0.alpha(0)), a1 = std::abs(at0.alpha(1));
  double dphi0 = std::arg(at0.alpha(1)) - std::arg(at0.alpha(0));
  double acc = a0 * a1 * std::cos(omega * t - dphi0);
  for (std::size_t a = 0; a < s.index_sets[0].size(); ++a)
    for (std::size_t b = 0; b < s.index_sets[1].size(); ++b) {
      cxd c0 = s.coeffs(s.index_sets[0][a], 0);
      cxd c1 = s.coeffs(s.index_sets[1][b], 1);
      double dphi = std::arg(c1) - std::arg(c0);
      acc -= std::abs(c0) * std::abs(c1) * t * (s.offsets[0][a] - s.offsets[1][b]) *
             std::sin(omega * t - dphi);
    }
  return std::sqrt(2.0 / (mass * omega)) * acc;
}

} // namespace pawlab::typicality
