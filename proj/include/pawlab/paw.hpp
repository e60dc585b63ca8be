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

#include <algorithm>
#include <limits>
#include <optional>
#include <set>

namespace pawlab::paw {

using clockwork::ClockSpectrum;
using clockwork::two_pi;

struct ClockBudget {
  Index dim = 0;  // d_C, strictly larger than the system dimension
  double period = two_pi;
  double hbar = 1.0;
};

/// Global state sum_k c_k |E = -E_k>_C (x) |E_k>_S annihilated by
/// H_C (x) 1 + 1 (x) H_S. Clock levels beyond the paired ones carry zero
/// amplitude; they exist so the clock POVM is well formed.
struct ConstrainedUniverse {
  ClockSpectrum clock;
  Operator system_h;            // in the caller's basis
  Spectrum system_eigs;         // cached eigensystem of system_h
  Eigen::VectorXcd coeffs;      // c_k in the system energy eigenbasis
  std::vector<Index> pairing;   // system level k -> clock level index
  StateVector global_state;     // dims {d_C, d_S}

  Index clock_dim() const { return clock.dim(); }
  Index system_dim() const { return system_h.size(); }
  double system_level(Index k) const { return system_eigs.eigenvalues(k); }
};

struct RelativeState {
  double t = 0.0;
  StateVector state;
};

inline Operator clock_hamiltonian(const ClockSpectrum &spec) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(spec.dim(), spec.dim());
  for (Index i = 0; i < spec.dim(); ++i) h(i, i) = spec.energy(i);
  return Operator(std::move(h), {spec.dim()});
}

inline Operator total_hamiltonian(const ConstrainedUniverse &u) {
  Operator hc = clock_hamiltonian(u.clock);
  Operator total = tensor_product(hc, identity_operator(u.system_dim()));
  total.mat += tensor_product(identity_operator(u.clock_dim()), u.system_h).mat;
  return total;
}

inline double constraint_residual(const ConstrainedUniverse &u) {
  return (total_hamiltonian(u).mat * u.global_state.amps).norm();
}

/// Builds the energy-constrained universe. Every system eigenvalue must sit on
/// the clock lattice (integer multiple of 2*pi*hbar/T up to 1e-9 relative);
/// otherwise the nearest representable level and the residual it would cause
/// are reported. Unused clock levels are filled with the smallest free labels.
inline ConstrainedUniverse build_universe(const Operator &system_h,
                                          const Eigen::VectorXcd &coeffs,
                                          const ClockBudget &budget) {
  if (!is_hermitian(system_h.mat))
    throw std::invalid_argument("build_universe: system Hamiltonian must be Hermitian");
  const Index ds = system_h.size();
  if (coeffs.size() != ds)
    throw std::invalid_argument("build_universe: coefficient count mismatch");
  if (std::abs(coeffs.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("build_universe: coefficients must be normalized");
  if (budget.dim <= ds)
    throw std::invalid_argument("build_universe: clock dimension must exceed system dimension");

  ConstrainedUniverse u;
  u.system_h = system_h;
  u.system_eigs = eigensystem(system_h);
  u.coeffs = coeffs;

  const double step = two_pi * budget.hbar / budget.period;
  // Only level differences need to sit on the lattice; the clock offset E0
  // absorbs the rest. Label r_k = (E_max - E_k) / step with E0 = -E_max, so
  // r = 0 pairs with the top system level.
  const double e_max = u.system_eigs.eigenvalues(ds - 1);
  std::vector<long long> paired_labels(ds);
  std::set<long long> used;
  for (Index k = 0; k < ds; ++k) {
    double raw = (e_max - u.system_eigs.eigenvalues(k)) / step;
    double rounded = std::round(raw);
    if (std::abs(raw - rounded) > 1e-9 * (1.0 + std::abs(raw))) {
      double nearest = e_max - rounded * step;
      double residual = std::abs(u.system_eigs.eigenvalues(k) - nearest) * std::abs(coeffs(k));
      throw std::invalid_argument(
          "build_universe: system level " + std::to_string(u.system_eigs.eigenvalues(k)) +
          " is not representable on the clock lattice; nearest level " +
          std::to_string(nearest) + " would leave constraint residual " +
          std::to_string(residual));
    }
    paired_labels[k] = static_cast<long long>(rounded);
    if (!used.insert(paired_labels[k]).second)
      throw std::invalid_argument("build_universe: degenerate system levels share a clock level");
  }
  long long filler = 0;
  while (static_cast<Index>(used.size()) < budget.dim) {
    if (used.insert(filler).second == false) { ++filler; continue; }
    ++filler;
  }
  std::vector<long long> labels(used.begin(), used.end());
  u.clock = ClockSpectrum::from_labels(std::move(labels), budget.period, -e_max, budget.hbar);

  u.pairing.resize(ds);
  for (Index k = 0; k < ds; ++k) {
    auto it = std::lower_bound(u.clock.labels.begin(), u.clock.labels.end(), paired_labels[k]);
    u.pairing[k] = static_cast<Index>(it - u.clock.labels.begin());
  }

  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(u.clock.dim() * ds);
  for (Index k = 0; k < ds; ++k) {
    // |E = -E_k>_C (x) |E_k>_S with the system eigvec in the caller's basis.
    amps.segment(u.pairing[k] * ds, ds) += coeffs(k) * u.system_eigs.eigenvectors.col(k);
  }
  u.global_state = StateVector(std::move(amps), {u.clock.dim(), ds});

  double res = constraint_residual(u);
  if (res > 1e-10)
    throw std::runtime_error("build_universe: constraint residual " + std::to_string(res));
  return u;
}

/// |phi(t)> = sum_k c_k exp(-i E_k t / hbar) |E_k>, expressed in the caller's
/// system basis. Plain phases: the state is periodic in T up to (and for
/// lattice-aligned E0 including) a global phase.
inline RelativeState relative_state(const ConstrainedUniverse &u, double t) {
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(u.system_dim());
  for (Index k = 0; k < u.system_dim(); ++k)
    amps += u.coeffs(k) *
            std::polar(1.0, -u.system_eigs.eigenvalues(k) * t / u.clock.hbar) *
            u.system_eigs.eigenvectors.col(k);
  return RelativeState{t, StateVector(std::move(amps), {u.system_dim()})};
}

/// || phi(t) - U_S(t - t0) phi(t0) ||.
inline double verify_schrodinger(const ConstrainedUniverse &u, double t0, double t) {
  StateVector lhs = relative_state(u, t).state;
  Operator us = unitary_from_hamiltonian(u.system_h, t - t0, u.clock.hbar);
  StateVector rhs = apply(us, relative_state(u, t0).state);
  return (lhs.amps - rhs.amps).norm();
}

inline double projector_defect(const Operator &p) {
  double idem = (p.mat * p.mat - p.mat).cwiseAbs().maxCoeff();
  return std::max(idem, hermiticity_defect(p.mat));
}

/// Born-rule conditional probability of an effect on S given clock value t.
inline double conditional_probability(const ConstrainedUniverse &u, double t,
                                      const Operator &effect) {
  if (effect.size() != u.system_dim())
    throw std::invalid_argument("conditional_probability: effect dimension mismatch");
  if (projector_defect(effect) > 1e-10)
    throw std::invalid_argument("conditional_probability: effect is not an orthogonal projector");
  return expectation(effect, relative_state(u, t).state);
}

struct SpeedLimitReport {
  double bound = std::numeric_limits<double>::infinity();
  std::optional<double> first_orthogonal_time; // absolute time, >= t0
  double scanned_min = 1.0;
  double scanned_min_time = 0.0;
};

/// Quantum speed limit for the relative state: the bound
/// max(pi hbar / 2(E - E_min), pi hbar / 2 DeltaE) over the populated levels,
/// plus a scan of |<phi(t0)|phi(t)>| for the first orthogonal time.
inline SpeedLimitReport speed_limit(const ConstrainedUniverse &u, double t0,
                                    Index grid_n = 10000) {
  double e_mean = 0.0, e2_mean = 0.0;
  double e_min = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < u.system_dim(); ++k) {
    double w = std::norm(u.coeffs(k));
    if (w == 0.0) continue;
    double e = u.system_eigs.eigenvalues(k);
    e_mean += w * e;
    e2_mean += w * e * e;
    e_min = std::min(e_min, e);
  }
  double spread = std::sqrt(std::max(0.0, e2_mean - e_mean * e_mean));
  double gap_from_ground = e_mean - e_min;

  SpeedLimitReport rep;
  const double hbar = u.clock.hbar;
  if (spread > 0.0 && gap_from_ground > 0.0)
    rep.bound = std::max(std::numbers::pi * hbar / (2.0 * gap_from_ground),
                         std::numbers::pi * hbar / (2.0 * spread));

  auto overlap = [&](double t) {
    cxd f = 0.0;
    for (Index k = 0; k < u.system_dim(); ++k)
      f += std::norm(u.coeffs(k)) *
           std::polar(1.0, -u.system_eigs.eigenvalues(k) * (t - t0) / hbar);
    return std::abs(f);
  };

  const double T = u.clock.period;
  const double h = T / static_cast<double>(grid_n);
  rep.scanned_min = 1.0;
  rep.scanned_min_time = t0;
  std::vector<double> f(grid_n + 1);
  for (Index j = 0; j <= grid_n; ++j) {
    f[j] = overlap(t0 + static_cast<double>(j) * h);
    if (f[j] < rep.scanned_min) {
      rep.scanned_min = f[j];
      rep.scanned_min_time = t0 + static_cast<double>(j) * h;
    }
  }
  // Ternary-refine each interior local minimum of |f|; the first one that
  // reaches 1e-6 is the orthogonal time.
  for (Index j = 1; j < grid_n && !rep.first_orthogonal_time; ++j) {
    if (f[j] > f[j - 1] || f[j] > f[j + 1]) continue;
    double lo = t0 + static_cast<double>(j - 1) * h;
    double hi = t0 + static_cast<double>(j + 1) * h;
    for (int it = 0; it < 200; ++it) {
      double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (overlap(m1) < overlap(m2)) hi = m2; else lo = m1;
    }
    double ta = 0.5 * (lo + hi);
    double fa = overlap(ta);
    if (fa < 1e-6) rep.first_orthogonal_time = ta;
    if (fa < rep.scanned_min) {
      rep.scanned_min = fa;
      rep.scanned_min_time = ta;
    }
  }
  if (rep.first_orthogonal_time &&
      *rep.first_orthogonal_time - t0 < rep.bound - 1e-9 * T)
    throw std::runtime_error("speed_limit: orthogonal time violates the bound");
  return rep;
}

/// Universe with an explicit clock-system interaction term. The caller
/// supplies a global state satisfying (H_C + H_S + H_int)|Psi> = 0.
struct InteractingUniverse {
  ClockSpectrum clock;
  Operator system_h;
  Operator h_int;          // on C (x) S
  StateVector global_state; // dims {d_C, d_S}
};

inline double interacting_constraint_residual(const InteractingUniverse &u) {
  const Index dc = u.clock.dim(), ds = u.system_h.size();
  Eigen::MatrixXcd total =
      kron(clock_hamiltonian(u.clock).mat, Eigen::MatrixXcd::Identity(ds, ds)) +
      kron(Eigen::MatrixXcd::Identity(dc, dc), u.system_h.mat) + u.h_int.mat;
  return (total * u.global_state.amps).norm();
}

/// Unnormalized relative state <t~|Psi> on S.
inline StateVector interacting_relative_state(const InteractingUniverse &u, double t) {
  const Index dc = u.clock.dim(), ds = u.system_h.size();
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(ds);
  for (Index n = 0; n < dc; ++n)
    amps += std::polar(1.0, u.clock.energy(n) * t / u.clock.hbar) *
            u.global_state.amps.segment(n * ds, ds);
  return StateVector(std::move(amps), {ds});
}

struct InteractionRhs {
  StateVector value;      // H_S |phi(t)> + (1/T) int K(t,t') |phi(t')> dt'
  double quad_error = 0.0; // trapezoid vs the closed-form kernel contraction
};

/// Right-hand side of the time non-local evolution equation
/// i hbar d/dt |phi(t)> = H_S |phi(t)> + (1/T) int K(t,t') |phi(t')> dt',
/// with K(t,t') = <t~| H_int |t~'> evaluated by trapezoidal quadrature on a
/// uniform grid over one period.
inline InteractionRhs interaction_rhs(const InteractingUniverse &u, double t,
                                      Index grid_n = 2048) {
  if (interacting_constraint_residual(u) > 1e-8)
    throw std::invalid_argument("interaction_rhs: global state violates the full constraint");
  const Index dc = u.clock.dim(), ds = u.system_h.size();

  // Bra phases for <t~| on the clock factor.
  Eigen::VectorXcd bra_t(dc);
  for (Index n = 0; n < dc; ++n)
    bra_t(n) = std::polar(1.0, u.clock.energy(n) * t / u.clock.hbar);

  // M(t) = (<t~| (x) 1_S) H_int : maps C (x) S to S.
  Eigen::MatrixXcd m_t = Eigen::MatrixXcd::Zero(ds, dc * ds);
  for (Index n = 0; n < dc; ++n)
    m_t += bra_t(n) * u.h_int.mat.block(n * ds, 0, ds, dc * ds);

  // Trapezoid over one period; endpoints coincide for the periodic integrand.
  Eigen::VectorXcd integral = Eigen::VectorXcd::Zero(ds);
  const double T = u.clock.period;
  for (Index j = 0; j < grid_n; ++j) {
    double tp = static_cast<double>(j) * T / static_cast<double>(grid_n);
    StateVector phi = interacting_relative_state(u, tp);
    // |t~'> (x) |phi(t')> contracted against M(t).
    Eigen::VectorXcd ket(dc * ds);
    for (Index n = 0; n < dc; ++n)
      ket.segment(n * ds, ds) =
          std::polar(1.0, -u.clock.energy(n) * tp / u.clock.hbar) * phi.amps;
    integral += m_t * ket;
  }
  integral /= static_cast<double>(grid_n);

  // Closed form of the same contraction: (1/T) int |t~'><t~'| dt' resolves the
  // identity on C, so the kernel term equals <t~| H_int |Psi>.
  Eigen::VectorXcd exact = m_t * u.global_state.amps;

  StateVector phi_t = interacting_relative_state(u, t);
  InteractionRhs out;
  out.value = StateVector(u.system_h.mat * phi_t.amps + integral, {ds});
  out.quad_error = (integral - exact).norm();
  return out;
}

/// Clock and system coupled through H_int = -g H_C (x) H_S, with an exactly
/// solvable zero mode per paired level: the clock level at -w pairs with the
/// system level w / (1 + g w), for lattice energies w = cell * 2 pi / T.
inline InteractingUniverse gravitational_interacting_universe(
    const std::vector<long long> &lattice_cells, double coupling, Index clock_dim,
    const Eigen::VectorXcd &coeffs, double period = two_pi) {
  const Index ds = static_cast<Index>(lattice_cells.size());
  if (coeffs.size() != ds)
    throw std::invalid_argument("gravitational_interacting_universe: coefficient count mismatch");
  const double step = two_pi / period;
  long long cell_max = *std::max_element(lattice_cells.begin(), lattice_cells.end());
  std::set<long long> used;
  std::vector<long long> paired(ds);
  for (Index k = 0; k < ds; ++k) {
    paired[k] = cell_max - lattice_cells[k];
    if (!used.insert(paired[k]).second)
      throw std::invalid_argument("gravitational_interacting_universe: duplicate lattice cell");
  }
  long long filler = 0;
  while (static_cast<Index>(used.size()) < clock_dim) used.insert(filler++);
  std::vector<long long> labels(used.begin(), used.end());
  ClockSpectrum clock = ClockSpectrum::from_labels(
      std::move(labels), period, -static_cast<double>(cell_max) * step);

  Eigen::MatrixXcd hs = Eigen::MatrixXcd::Zero(ds, ds);
  for (Index k = 0; k < ds; ++k) {
    double w = static_cast<double>(lattice_cells[k]) * step;
    hs(k, k) = w / (1.0 + coupling * w);
  }
  Operator hc = clock_hamiltonian(clock);
  Eigen::MatrixXcd hint = -coupling * kron(hc.mat, hs);

  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(clock.dim() * ds);
  for (Index k = 0; k < ds; ++k) {
    auto it = std::lower_bound(clock.labels.begin(), clock.labels.end(), paired[k]);
    amps(static_cast<Index>(it - clock.labels.begin()) * ds + k) = coeffs(k);
  }
  return InteractingUniverse{clock, Operator(hs, {ds}),
                             Operator(std::move(hint), {clock.dim(), ds}),
                             StateVector(std::move(amps), {clock.dim(), ds})};
}

/// K(t,t') = <t~| H_int |t~'> as an operator on S.
inline Operator interaction_kernel(const InteractingUniverse &u, double t, double tp) {
  const Index dc = u.clock.dim(), ds = u.system_h.size();
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(ds, ds);
  for (Index n = 0; n < dc; ++n)
    for (Index np = 0; np < dc; ++np)
      k += std::polar(1.0, (u.clock.energy(n) * t - u.clock.energy(np) * tp) / u.clock.hbar) *
           u.h_int.mat.block(n * ds, np * ds, ds, ds);
  return Operator(std::move(k), {ds});
}

/// i hbar times the centered finite difference of <t~|Psi>.
inline StateVector numeric_time_derivative(const InteractingUniverse &u, double t, double h) {
  Eigen::VectorXcd d = (interacting_relative_state(u, t + h).amps -
                        interacting_relative_state(u, t - h).amps) /
                       (2.0 * h);
  return StateVector(cxd(0.0, u.clock.hbar) * d, {u.system_h.size()});
}

} // namespace pawlab::paw
