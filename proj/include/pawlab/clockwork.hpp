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

#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>

namespace pawlab::clockwork {

using pawlab::Index;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct Rational {
  long long num = 0;
  long long den = 1;
};

inline Rational reduced(Rational q) {
  if (q.den == 0) throw std::invalid_argument("Rational: zero denominator");
  if (q.den < 0) { q.num = -q.num; q.den = -q.den; }
  long long g = std::gcd(std::llabs(q.num), q.den);
  if (g > 1) { q.num /= g; q.den /= g; }
  return q;
}

/// Bounded, non-degenerate spectrum stored as integer labels on the lattice
/// E_i = E0 + r_i * (2*pi*hbar / T). Keeping the labels exact makes every
/// resolution-of-identity sum a closed cyclotomic sum instead of accumulated
/// e^{iEt} drift.
struct ClockSpectrum {
  double E0 = 0.0;
  double period = two_pi; // T
  double hbar = 1.0;
  std::vector<long long> labels; // r_0 = 0, strictly increasing

  Index dim() const { return static_cast<Index>(labels.size()); }
  long long max_label() const { return labels.back(); }
  double step() const { return two_pi * hbar / period; }
  double energy(Index i) const { return E0 + static_cast<double>(labels[i]) * step(); }

  bool equally_spaced() const {
    for (Index i = 0; i < dim(); ++i)
      if (labels[i] != i) return false;
    return true;
  }

  void validate() const {
    if (labels.empty()) throw std::invalid_argument("ClockSpectrum: empty");
    if (labels.front() != 0) throw std::invalid_argument("ClockSpectrum: r_0 must be 0");
    for (std::size_t i = 1; i < labels.size(); ++i)
      if (labels[i] <= labels[i - 1])
        throw std::invalid_argument("ClockSpectrum: labels must be strictly increasing (degenerate level)");
    if (!(period > 0.0) || !(hbar > 0.0))
      throw std::invalid_argument("ClockSpectrum: period and hbar must be positive");
  }

  static ClockSpectrum equally_spaced_levels(Index d, double T = two_pi, double E0 = 0.0,
                                             double hbar = 1.0) {
    ClockSpectrum s;
    s.E0 = E0;
    s.period = T;
    s.hbar = hbar;
    s.labels.resize(d);
    std::iota(s.labels.begin(), s.labels.end(), 0);
    s.validate();
    return s;
  }

  static ClockSpectrum from_labels(std::vector<long long> r, double T = two_pi,
                                   double E0 = 0.0, double hbar = 1.0) {
    ClockSpectrum s;
    s.E0 = E0;
    s.period = T;
    s.hbar = hbar;
    s.labels = std::move(r);
    s.validate();
    return s;
  }
};

/// Turns gap ratios (E_i - E0 = A_i/B_i in an arbitrary energy unit) into
/// integer labels r_i = L * A_i / B_i with L the lcm of the denominators.
/// Without a period hint the unit is taken literally, giving T = 2*pi*hbar*L.
inline ClockSpectrum build_spectrum(double E0, const std::vector<Rational> &ratios,
                                    std::optional<double> T_hint = std::nullopt,
                                    double hbar = 1.0) {
  if (ratios.empty()) throw std::invalid_argument("build_spectrum: no ratios");
  std::vector<Rational> rs;
  rs.reserve(ratios.size());
  for (const Rational &q : ratios) {
    Rational r = reduced(q);
    if (r.num <= 0) throw std::invalid_argument("build_spectrum: ratios must be positive");
    rs.push_back(r);
  }
  long long lcm = 1;
  for (const Rational &r : rs) {
    lcm = std::lcm(lcm, r.den);
    if (lcm <= 0 || lcm > (1LL << 40))
      throw std::runtime_error("build_spectrum: denominator lcm overflow (malformed rationals)");
  }
  std::vector<long long> labels{0};
  for (const Rational &r : rs) {
    if (lcm % r.den != 0)
      throw std::runtime_error("build_spectrum: non-integer label after lcm");
    long long lab = (lcm / r.den) * r.num;
    labels.push_back(lab);
  }
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i] <= labels[i - 1])
      throw std::invalid_argument("build_spectrum: duplicate or non-increasing levels");

  double T;
  if (T_hint) {
    T = *T_hint;
  } else {
    // T = 2*pi*hbar*r_1 / (E_1 - E0) with the gap equal to the stated ratio.
    double gap = static_cast<double>(rs.front().num) / static_cast<double>(rs.front().den);
    T = two_pi * hbar * static_cast<double>(labels[1]) / gap;
  }
  return ClockSpectrum::from_labels(std::move(labels), T, E0, hbar);
}

/// The D time (or position) states conjugate to a spectrum:
/// |alpha_m> = (1/sqrt(d)) sum_i exp(-i E_i alpha_m / hbar) |E_i>,
/// alpha_m = t0 + m T / D. Orthonormal basis iff equally spaced and D = d,
/// a POVM family otherwise.
struct ComplementFamily {
  ClockSpectrum spectrum;
  Index count = 0; // D
  double t0 = 0.0;
  std::vector<StateVector> states;
  std::vector<double> values;

  Index dim() const { return spectrum.dim(); }
};

namespace detail {

/// Phase of level i in state m, with the lattice part reduced mod D before
/// any trig so the cyclotomic sums close exactly.
inline cxd family_amplitude(const ClockSpectrum &spec, Index D, double t0, Index m, Index i) {
  long long rm = (spec.labels[i] % D) * (m % D) % D;
  double lattice = -two_pi * static_cast<double>(rm) / static_cast<double>(D);
  double offset = -(spec.E0 * (t0 + static_cast<double>(m) * spec.period / static_cast<double>(D)) / spec.hbar)
                  - two_pi * static_cast<double>(spec.labels[i]) * t0 / spec.period;
  return std::polar(1.0 / std::sqrt(static_cast<double>(spec.dim())), lattice + offset);
}

} // namespace detail

inline ComplementFamily complement_family(const ClockSpectrum &spec, Index D, double t0 = 0.0) {
  spec.validate();
  if (D < spec.max_label() + 1 || D < spec.dim())
    throw std::invalid_argument("complement_family: D must be at least max(r_max + 1, d)");
  ComplementFamily fam;
  fam.spectrum = spec;
  fam.count = D;
  fam.t0 = t0;
  fam.states.reserve(D);
  fam.values.reserve(D);
  const Index d = spec.dim();
  for (Index m = 0; m < D; ++m) {
    Eigen::VectorXcd amps(d);
    for (Index i = 0; i < d; ++i) amps(i) = detail::family_amplitude(spec, D, t0, m, i);
    fam.states.emplace_back(std::move(amps), std::vector<Index>{d});
    fam.values.push_back(t0 + static_cast<double>(m) * spec.period / static_cast<double>(D));
  }
  return fam;
}

/// Diagnostic family built from raw energies (no lattice): used to probe how
/// far a non-commensurate spectrum is from resolving the identity.
inline ComplementFamily family_from_energies(const std::vector<double> &energies, double T,
                                             Index D, double t0 = 0.0, double hbar = 1.0) {
  const Index d = static_cast<Index>(energies.size());
  if (d == 0) throw std::invalid_argument("family_from_energies: empty spectrum");
  if (D < d) throw std::invalid_argument("family_from_energies: D must be at least d");
  ComplementFamily fam;
  fam.spectrum.E0 = energies.front();
  fam.spectrum.period = T;
  fam.spectrum.hbar = hbar;
  fam.spectrum.labels.assign(d, 0); // placeholder labels; states carry the physics
  fam.count = D;
  fam.t0 = t0;
  for (Index m = 0; m < D; ++m) {
    double alpha = t0 + static_cast<double>(m) * T / static_cast<double>(D);
    Eigen::VectorXcd amps(d);
    for (Index i = 0; i < d; ++i)
      amps(i) = std::polar(1.0 / std::sqrt(static_cast<double>(d)), -energies[i] * alpha / hbar);
    fam.states.emplace_back(std::move(amps), std::vector<Index>{d});
    fam.values.push_back(alpha);
  }
  return fam;
}

/// Max-abs entry of (d/D) sum_m |alpha_m><alpha_m| - 1.
inline double identity_defect(const ComplementFamily &fam) {
  const Index d = fam.dim();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  for (const StateVector &s : fam.states) acc += s.amps * s.amps.adjoint();
  acc *= static_cast<double>(d) / static_cast<double>(fam.count);
  acc -= Eigen::MatrixXcd::Identity(d, d);
  return acc.cwiseAbs().maxCoeff();
}

inline StateVector continuous_ket(const ClockSpectrum &spec, double t) {
  Eigen::VectorXcd amps(spec.dim());
  for (Index i = 0; i < spec.dim(); ++i)
    amps(i) = std::polar(1.0, -spec.energy(i) * t / spec.hbar);
  return StateVector(std::move(amps), {spec.dim()});
}

/// Unnormalized ket |t~> = sum_i e^{-i E_i t / hbar} |E_i> (squared norm d):
/// the continuous-limit POVM element is |t~><t~| dt / T.
struct ContinuousKet {
  ClockSpectrum spectrum;
  double t = 0.0;

  StateVector state() const { return continuous_ket(spectrum, t); }
};

/// Quadrature check of (1/T) int |t~><t~| dt = 1 on an N-point grid; exact up
/// to roundoff once N exceeds the bandwidth 2 r_max.
inline double continuous_identity_defect(const ClockSpectrum &spec, Index grid_n = 1024,
                                         double t0 = 0.0) {
  const Index d = spec.dim();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  for (Index j = 0; j < grid_n; ++j) {
    StateVector ket = continuous_ket(spec, t0 + static_cast<double>(j) * spec.period /
                                               static_cast<double>(grid_n));
    acc += ket.amps * ket.amps.adjoint();
  }
  acc /= static_cast<double>(grid_n);
  acc -= Eigen::MatrixXcd::Identity(d, d);
  return acc.cwiseAbs().maxCoeff();
}

/// Hermitian time operator tau = sum_m tau_m |tau_m><tau_m| in the energy
/// basis. Only defined for equally-spaced spectra (POVM-only regime rejected).
inline Operator tau_operator(const ClockSpectrum &spec, double t0 = 0.0) {
  spec.validate();
  if (!spec.equally_spaced())
    throw std::invalid_argument("tau_operator: spectrum is not equally spaced (POVM-only regime)");
  ComplementFamily fam = complement_family(spec, spec.dim(), t0);
  const Index d = spec.dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (Index k = 0; k < d; ++k) m += fam.values[k] * (fam.states[k].amps * fam.states[k].amps.adjoint());
  return Operator(std::move(m), {d});
}

/// Age operator in the energy basis:
/// A = (alpha0 + T/2) 1 + i hbar sum_{i != j} e^{-i (E_i - E_j) alpha0 / hbar} / (E_i - E_j) |E_i><E_j|.
inline Operator age_operator(const ClockSpectrum &spec, double alpha0 = 0.0) {
  spec.validate();
  const Index d = spec.dim();
  Eigen::MatrixXcd m =
      (alpha0 + spec.period / 2.0) * Eigen::MatrixXcd::Identity(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      if (i == j) continue;
      double gap = spec.energy(i) - spec.energy(j);
      m(i, j) += cxd(0.0, spec.hbar) * std::polar(1.0, -gap * alpha0 / spec.hbar) / gap;
    }
  return Operator(std::move(m), {d});
}

/// P(alpha) = (1/T) |<alpha~|psi>|^2 for a clock-space state in the energy basis.
inline double alpha_probability_density(const StateVector &state, const ClockSpectrum &spec,
                                        double t) {
  if (state.size() != spec.dim())
    throw std::invalid_argument("alpha_probability_density: state/spectrum size mismatch");
  cxd amp = 0.0;
  for (Index i = 0; i < spec.dim(); ++i)
    amp += std::polar(1.0, spec.energy(i) * t / spec.hbar) * state.amps(i);
  return std::norm(amp) / spec.period;
}

/// <alpha> and <alpha^2> via Riemann quadrature of the density.
inline std::pair<double, double> alpha_moments(const StateVector &state,
                                               const ClockSpectrum &spec, Index grid_n = 10000,
                                               double t0 = 0.0) {
  double m1 = 0.0, m2 = 0.0;
  double h = spec.period / static_cast<double>(grid_n);
  for (Index j = 0; j < grid_n; ++j) {
    double a = t0 + (static_cast<double>(j) + 0.5) * h;
    double p = alpha_probability_density(state, spec, a);
    m1 += a * p * h;
    m2 += a * a * p * h;
  }
  return {m1, m2};
}

} // namespace pawlab::clockwork
