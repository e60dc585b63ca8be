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

#include "pawlab/hilbert.hpp"

namespace pawlab::wootters {

/// Spin operators for spin s (dimension 2s+1), S_z basis ordered by
/// descending magnetic quantum number m = s, s-1, ..., -s.
inline Operator spin_z(double s) {
  const Index d = static_cast<Index>(std::llround(2.0 * s)) + 1;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (Index i = 0; i < d; ++i) m(i, i) = s - static_cast<double>(i);
  return Operator(std::move(m), {d});
}

inline Operator spin_x(double s) {
  const Index d = static_cast<Index>(std::llround(2.0 * s)) + 1;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (Index i = 0; i + 1 < d; ++i) {
    double mq = s - static_cast<double>(i) - 1.0; // raising from row i+1 to i
    double amp = 0.5 * std::sqrt(s * (s + 1.0) - mq * (mq + 1.0));
    m(i, i + 1) = amp;
    m(i + 1, i) = amp;
  }
  return Operator(std::move(m), {d});
}

/// Two-spin universe: both particles start aligned with the transverse
/// operator's top eigenstate, the external-time average over one precession
/// period keeps only the zero-total-S_z terms. Returns the normalized global
/// state in the product S_z basis.
inline StateVector two_spin_universe(const Operator &transverse) {
  Spectrum eig = eigensystem(transverse);
  const Index d = transverse.size();
  Eigen::VectorXcd top = eig.eigenvectors.col(d - 1); // largest eigenvalue s
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(d * d);
  for (Index i = 0; i < d; ++i) {
    Index j = d - 1 - i; // m_j = -m_i
    amps(i * d + j) = top(i) * top(j);
  }
  amps.normalize();
  return StateVector(std::move(amps), {d, d});
}

/// P(second spin shows the top transverse value | first spin does), evaluated
/// on the stationary two-spin universe via the conditional-probability ratio.
inline double agreement(const Operator &transverse) {
  Spectrum eig = eigensystem(transverse);
  const Index d = transverse.size();
  StateVector psi = two_spin_universe(transverse);

  Eigen::VectorXcd top = eig.eigenvectors.col(d - 1);
  // <top, x_k | Psi> for every transverse eigenstate x_k of the second spin.
  double numer = 0.0, denom = 0.0;
  for (Index k = 0; k < d; ++k) {
    cxd amp = 0.0;
    for (Index i = 0; i < d; ++i) {
      Index j = d - 1 - i;
      amp += std::conj(top(i)) * std::conj(eig.eigenvectors(j, k)) * psi.amps(i * d + j);
    }
    double p = std::norm(amp);
    denom += p;
    if (k == d - 1) numer = p;
  }
  return numer / denom;
}

inline double agreement(double s) { return agreement(spin_x(s)); }

/// Asymptotic lower bound of the agreement, sqrt(3)/2.
inline constexpr double agreement_bound = 0.8660254037844386;

} // namespace pawlab::wootters
