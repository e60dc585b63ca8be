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

#include "pawlab/paw.hpp"
#include "pawlab/spacetime.hpp"

namespace pawlab::multitime {

using paw::ConstrainedUniverse;
using clockwork::ClockSpectrum;
using spacetime::SpacetimeUniverse;

/// Two rank-1 measurements in a common orthonormal basis of the measured
/// factor, at clock times t1 <= t2.
struct TwoTimeQuery {
  double t1 = 0.0, t2 = 0.0;
  Eigen::MatrixXcd basis; // orthonormal columns
  Index first_outcome = 0, second_outcome = 0;

  Operator first_effect() const {
    return Operator(basis.col(first_outcome) * basis.col(first_outcome).adjoint(),
                    {basis.rows()});
  }
  Operator second_effect() const {
    return Operator(basis.col(second_outcome) * basis.col(second_outcome).adjoint(),
                    {basis.rows()});
  }

  void validate(Index dim) const {
    if (basis.rows() != dim || basis.cols() < 1 || basis.cols() > dim)
      throw std::invalid_argument("TwoTimeQuery: basis shape mismatch");
    if ((basis.adjoint() * basis - Eigen::MatrixXcd::Identity(basis.cols(), basis.cols()))
            .cwiseAbs()
            .maxCoeff() > 1e-10)
      throw std::invalid_argument("TwoTimeQuery: basis columns must be orthonormal");
    if (first_outcome < 0 || first_outcome >= basis.cols() || second_outcome < 0 ||
        second_outcome >= basis.cols())
      throw std::invalid_argument("TwoTimeQuery: outcome out of range");
    if (t2 < t1) throw std::invalid_argument("TwoTimeQuery: t2 must not precede t1");
  }
};

namespace detail {

inline Index snap_to_lattice(double t, double period, Index D, const char *what) {
  double raw = t * static_cast<double>(D) / period;
  long long m = std::llround(raw);
  if (std::abs(raw - static_cast<double>(m)) > 1e-9)
    throw std::invalid_argument(std::string(what) +
                                ": time does not sit on the clock lattice");
  return static_cast<Index>(((m % D) + D) % D);
}

} // namespace detail

/// External-time-averaged two-time conditional probability. The average over
/// the unobservable external time runs over the clock's own lattice, where the
/// cyclotomic delta identity closes every phase sum exactly; with orthogonal
/// time states the collapse is sharp and the direct propagator comes out
/// exactly. POVM clocks are accepted: the weighted family overlaps then smear
/// the collapse but the result remains a normalized distribution.
inline double gppt_two_time(const ConstrainedUniverse &u, const TwoTimeQuery &q) {
  q.validate(u.system_dim());
  const ClockSpectrum &spec = u.clock;
  const Index D = static_cast<Index>(spec.max_label()) + 1;
  const double T = spec.period;
  Index m1 = detail::snap_to_lattice(q.t1, T, D, "gppt_two_time");
  Index m2 = detail::snap_to_lattice(q.t2, T, D, "gppt_two_time");

  // Squared overlaps of the time POVM family, G(s) = |<alpha_0|alpha_s>|^2.
  const Index d = spec.dim();
  std::vector<double> g(D);
  for (Index s = 0; s < D; ++s) {
    cxd acc = 0.0;
    for (Index n = 0; n < d; ++n)
      acc += std::polar(1.0 / static_cast<double>(d),
                        -clockwork::two_pi *
                            static_cast<double>((spec.labels[n] * s) % D) /
                            static_cast<double>(D));
    g[s] = std::norm(acc);
  }

  // Propagator weight h(theta_j) = |<a_f| U_S(theta_j) |a_i>|^2.
  Eigen::VectorXcd bra = q.basis.col(q.second_outcome);
  Eigen::VectorXcd ket = q.basis.col(q.first_outcome);
  Eigen::VectorXcd m_weights(u.system_dim());
  for (Index k = 0; k < u.system_dim(); ++k) {
    cxd a = bra.dot(u.system_eigs.eigenvectors.col(k));
    cxd b = u.system_eigs.eigenvectors.col(k).dot(ket);
    m_weights(k) = a * b;
  }
  auto h = [&](Index j) {
    cxd amp = 0.0;
    double theta = static_cast<double>(j) * T / static_cast<double>(D);
    for (Index k = 0; k < u.system_dim(); ++k)
      amp += m_weights(k) * std::polar(1.0, -u.system_eigs.eigenvalues(k) * theta / spec.hbar);
    return std::norm(amp);
  };

  double numer = 0.0, denom = 0.0;
  for (Index s = 0; s < D; ++s) {
    Index j = ((m2 - m1 - s) % D + D) % D;
    numer += g[s] * h(j);
    denom += g[s];
  }
  return numer / denom;
}

/// Memory bookkeeping for the von Neumann measurement model: one ancillary
/// register per measurement, correlated along the query basis, never evolving
/// afterwards.
struct MemoryLayout {
  Index observed_dim = 0;
  std::vector<Index> memory_dims;  // one per measurement
  std::vector<Index> ready_states; // index per memory

  void validate(Index d_q, Index n_outcomes) const {
    if (observed_dim != d_q)
      throw std::invalid_argument("MemoryLayout: observed dimension mismatch");
    if (memory_dims.size() != ready_states.size())
      throw std::invalid_argument("MemoryLayout: one ready state per memory required");
    for (std::size_t i = 0; i < memory_dims.size(); ++i) {
      if (memory_dims[i] < n_outcomes)
        throw std::invalid_argument("MemoryLayout: memory smaller than the outcome set");
      if (ready_states[i] < 0 || ready_states[i] >= memory_dims[i])
        throw std::invalid_argument("MemoryLayout: ready state out of range");
    }
  }

  static MemoryLayout pair(Index d_q, Index mem_dim, Index ready = 0) {
    return MemoryLayout{d_q, {mem_dim, mem_dim}, {ready, ready}};
  }
};

namespace detail {

/// The piecewise global state on C (x) Q (x) M1 (x) M2 after two von Neumann
/// measurements at lattice times m1 < m2, stored per orthonormal time slice.
struct GlmState {
  std::vector<Eigen::VectorXcd> slices; // d_C entries, each of dim d_Q * n1 * n2
  Index d_q = 0, n1 = 0, n2 = 0;
  Index m1 = 0, m2 = 0;
};

inline GlmState glm_double_measurement(const ConstrainedUniverse &u, const TwoTimeQuery &q,
                                       const MemoryLayout &layout) {
  q.validate(u.system_dim());
  layout.validate(u.system_dim(), q.basis.cols());
  if (layout.memory_dims.size() != 2)
    throw std::invalid_argument("glm_double_measurement: exactly two memories required");
  if (!u.clock.equally_spaced())
    throw std::invalid_argument("glm: POVM clock supplied; orthogonal time states required");

  const Index dc = u.clock_dim();
  const double T = u.clock.period;
  Index m1 = snap_to_lattice(q.t1, T, dc, "glm_two_time");
  Index m2 = snap_to_lattice(q.t2, T, dc, "glm_two_time");
  if (m2 <= m1)
    throw std::invalid_argument("glm: measurements must be at distinct increasing lattice times");

  const Index d_q = u.system_dim();
  const Index n1 = layout.memory_dims[0], n2 = layout.memory_dims[1];
  const Index r1 = layout.ready_states[0], r2 = layout.ready_states[1];
  const Index n_out = q.basis.cols();
  const double tau = T / static_cast<double>(dc);

  GlmState st;
  st.d_q = d_q;
  st.n1 = n1;
  st.n2 = n2;
  st.m1 = m1;
  st.m2 = m2;
  st.slices.assign(dc, Eigen::VectorXcd::Zero(d_q * n1 * n2));

  auto put = [&](Index m, const Eigen::VectorXcd &qvec, Index a, Index b, cxd scale) {
    for (Index i = 0; i < d_q; ++i)
      st.slices[m]((i * n1 + a) * n2 + b) += scale * qvec(i);
  };

  StateVector phi_m1 = paw::relative_state(u, static_cast<double>(m1) * tau).state;
  const double inv_sqrt_dc = 1.0 / std::sqrt(static_cast<double>(dc));

  for (Index m = 0; m < m1; ++m) {
    StateVector phi = paw::relative_state(u, static_cast<double>(m) * tau).state;
    put(m, phi.amps, r1, r2, inv_sqrt_dc);
  }
  for (Index m = m1; m < m2; ++m) {
    Operator uq = unitary_from_hamiltonian(u.system_h, static_cast<double>(m - m1) * tau,
                                           u.clock.hbar);
    for (Index a = 0; a < n_out; ++a) {
      cxd amp_a = q.basis.col(a).dot(phi_m1.amps);
      Eigen::VectorXcd qvec = uq.mat * q.basis.col(a);
      put(m, qvec, a, r2, inv_sqrt_dc * amp_a);
    }
  }
  Operator u12 = unitary_from_hamiltonian(u.system_h, static_cast<double>(m2 - m1) * tau,
                                          u.clock.hbar);
  for (Index m = m2; m < dc; ++m) {
    Operator uq = unitary_from_hamiltonian(u.system_h, static_cast<double>(m - m2) * tau,
                                           u.clock.hbar);
    for (Index a = 0; a < n_out; ++a) {
      cxd amp_a = q.basis.col(a).dot(phi_m1.amps);
      for (Index b = 0; b < n_out; ++b) {
        cxd prop = q.basis.col(b).dot(u12.mat * q.basis.col(a));
        Eigen::VectorXcd qvec = uq.mat * q.basis.col(b);
        put(m, qvec, a, b, inv_sqrt_dc * amp_a * prop);
      }
    }
  }
  return st;
}

} // namespace detail

/// GLM two-time probability: the norm ratio of the doubly measured global
/// state, P((b | t2) | (a | t1)). Requires orthogonal time states.
inline double glm_two_time(const ConstrainedUniverse &u, const TwoTimeQuery &q,
                           const MemoryLayout &layout) {
  detail::GlmState st = detail::glm_double_measurement(u, q, layout);
  const Index a = q.first_outcome, b = q.second_outcome;

  // ||(<t_m2| (x) <a|_M1 (x) <b|_M2) Psi||^2 over the Q factor.
  double numer = 0.0;
  for (Index i = 0; i < st.d_q; ++i)
    numer += std::norm(st.slices[st.m2]((i * st.n1 + a) * st.n2 + b));
  // ||(<t_m1| (x) <a|_M1) Psi||^2 over Q and M2.
  double denom = 0.0;
  for (Index i = 0; i < st.d_q; ++i)
    for (Index m2i = 0; m2i < st.n2; ++m2i)
      denom += std::norm(st.slices[st.m1]((i * st.n1 + a) * st.n2 + m2i));
  if (denom == 0.0)
    throw std::runtime_error("glm_two_time: first outcome has zero probability");
  return numer / denom;
}

/// Reduced memory density matrix of one time slice, for checking that the
/// registers stay frozen after correlation.
inline Eigen::MatrixXcd glm_memory_density(const ConstrainedUniverse &u, const TwoTimeQuery &q,
                                           const MemoryLayout &layout, Index slice) {
  detail::GlmState st = detail::glm_double_measurement(u, q, layout);
  if (slice < 0 || slice >= static_cast<Index>(st.slices.size()))
    throw std::invalid_argument("glm_memory_density: slice out of range");
  const Index nm = st.n1 * st.n2;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(nm, nm);
  for (Index i = 0; i < st.d_q; ++i)
    for (Index ab = 0; ab < nm; ++ab)
      for (Index cd = 0; cd < nm; ++cd)
        rho(ab, cd) += st.slices[slice](i * nm + ab) * std::conj(st.slices[slice](i * nm + cd));
  return rho;
}

/// Single-measurement readout P(a on the memory | t on C): equals |<a|r>|^2
/// before the measurement and |<a|psi(t1)>|^2 (frozen) afterwards.
inline double glm_memory_marginal(const ConstrainedUniverse &u, double t_query, double t1,
                                  const Eigen::MatrixXcd &basis, Index outcome,
                                  Index memory_dim, Index ready) {
  if (!u.clock.equally_spaced())
    throw std::invalid_argument("glm: POVM clock supplied; orthogonal time states required");
  const Index dc = u.clock_dim();
  const double T = u.clock.period;
  const double tau = T / static_cast<double>(dc);
  Index m_query = detail::snap_to_lattice(t_query, T, dc, "glm_memory_marginal");
  Index m1 = detail::snap_to_lattice(t1, T, dc, "glm_memory_marginal");
  const Index d_q = u.system_dim();
  const Index n_out = basis.cols();
  if (outcome < 0 || outcome >= memory_dim || memory_dim < n_out)
    throw std::invalid_argument("glm_memory_marginal: bad outcome/memory size");

  Eigen::VectorXcd slice = Eigen::VectorXcd::Zero(d_q * memory_dim);
  if (m_query < m1) {
    StateVector phi = paw::relative_state(u, static_cast<double>(m_query) * tau).state;
    for (Index i = 0; i < d_q; ++i) slice(i * memory_dim + ready) = phi.amps(i);
  } else {
    StateVector phi_m1 = paw::relative_state(u, static_cast<double>(m1) * tau).state;
    Operator uq = unitary_from_hamiltonian(u.system_h, static_cast<double>(m_query - m1) * tau,
                                           u.clock.hbar);
    for (Index a = 0; a < n_out; ++a) {
      cxd amp_a = basis.col(a).dot(phi_m1.amps);
      Eigen::VectorXcd qvec = uq.mat * basis.col(a);
      for (Index i = 0; i < d_q; ++i) slice(i * memory_dim + a) += amp_a * qvec(i);
    }
  }
  double p = 0.0;
  for (Index i = 0; i < d_q; ++i) p += std::norm(slice(i * memory_dim + outcome));
  return p;
}

/// Two-time joint-position propagator of the doubly constrained universe:
/// (1/(d_R^2 d_S^2)) |sum_k exp(-i eps_k dt) exp(i p_k . (Delta_f - Delta_i))|^2,
/// the matrix element of the joint propagator within the paired-mode support.
inline double spacetime_two_time(const SpacetimeUniverse &su, double t1,
                                 const std::vector<double> &x1, const std::vector<double> &y1,
                                 double t2, const std::vector<double> &x2,
                                 const std::vector<double> &y2) {
  const std::size_t axes = su.s_grids.size();
  if (x1.size() != axes || y1.size() != axes || x2.size() != axes || y2.size() != axes)
    throw std::invalid_argument("spacetime_two_time: axis count mismatch");
  if (t2 < t1) throw std::invalid_argument("spacetime_two_time: t2 must not precede t1");
  for (std::size_t ax = 0; ax < axes; ++ax) {
    double dr = su.r_grids[ax].length / static_cast<double>(su.r_grids[ax].dim);
    double ds = su.s_grids[ax].length / static_cast<double>(su.s_grids[ax].dim);
    spacetime::detail::require_on_grid(x1[ax], 0.0, dr, "x1");
    spacetime::detail::require_on_grid(x2[ax], 0.0, dr, "x2");
    spacetime::detail::require_on_grid(y1[ax], 0.0, ds, "y1");
    spacetime::detail::require_on_grid(y2[ax], 0.0, ds, "y2");
  }

  cxd amp = 0.0;
  for (Index mode = 0; mode < su.modes(); ++mode) {
    std::vector<double> p = su.momenta(mode);
    double phase = -su.eps[mode] * (t2 - t1) / su.clock.hbar;
    for (std::size_t ax = 0; ax < axes; ++ax)
      phase += p[ax] * ((y2[ax] - x2[ax]) - (y1[ax] - x1[ax])) / su.clock.hbar;
    amp += std::polar(1.0, phase);
  }
  double dr_total = 1.0, ds_total = 1.0;
  for (std::size_t ax = 0; ax < axes; ++ax) {
    dr_total *= static_cast<double>(su.r_grids[ax].dim);
    ds_total *= static_cast<double>(su.s_grids[ax].dim);
  }
  return std::norm(amp) / (dr_total * dr_total * ds_total * ds_total);
}

} // namespace pawlab::multitime
