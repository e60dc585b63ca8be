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

#include "pawlab/clockwork.hpp"
#include "test_helpers.hpp"

#include <catch2/catch.hpp>

#include <numbers>
#include <random>

using namespace pawlab;
using namespace pawlab::clockwork;
using Catch::Detail::Approx;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("build_spectrum: equally spaced, integer and fractional ratios") {
  // {0,1,...,d-1} with unit gap: T = 2*pi / deltaE.
  std::vector<Rational> eq;
  for (long long i = 1; i < 5; ++i) eq.push_back({i, 1});
  ClockSpectrum s1 = build_spectrum(0.0, eq);
  REQUIRE(s1.labels == std::vector<long long>{0, 1, 2, 3, 4});
  REQUIRE(s1.period == Approx(2.0 * pi));
  REQUIRE(s1.equally_spaced());

  ClockSpectrum s2 = build_spectrum(0.0, {{1, 1}, {3, 1}});
  REQUIRE(s2.labels == std::vector<long long>{0, 1, 3});

  ClockSpectrum s3 = build_spectrum(0.0, {{1, 2}, {3, 4}});
  REQUIRE(s3.labels == std::vector<long long>{0, 2, 3});

  REQUIRE_THROWS_AS(build_spectrum(0.0, {{1, 2}, {2, 4}}), std::invalid_argument);
  REQUIRE_THROWS_AS(build_spectrum(0.0, {{-1, 2}}), std::invalid_argument);
}

TEST_CASE("complement family states for d = 2") {
  ClockSpectrum spec = ClockSpectrum::equally_spaced_levels(2);
  ComplementFamily fam = complement_family(spec, 2);
  Eigen::VectorXcd plus(2), minus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  REQUIRE((fam.states[0].amps - plus).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE((fam.states[1].amps - minus).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("equally spaced family with D = d is orthonormal") {
  ClockSpectrum spec = ClockSpectrum::equally_spaced_levels(3);
  ComplementFamily fam = complement_family(spec, 3);
  for (Index m = 0; m < 3; ++m)
    for (Index n = 0; n < 3; ++n) {
      double expect = (m == n) ? 1.0 : 0.0;
      REQUIRE(std::abs(inner(fam.states[m], fam.states[n])) == Approx(expect).margin(1e-12));
    }
}

TEST_CASE("POVM family overlap for labels {0,1,3}") {
  ClockSpectrum spec = ClockSpectrum::from_labels({0, 1, 3});
  ComplementFamily fam = complement_family(spec, 4);
  // |<a_0|a_1>| = |1 + e^{-i pi/2} + e^{-i 3 pi/2}| / 3 = 1/3
  REQUIRE(std::abs(inner(fam.states[0], fam.states[1])) == Approx(1.0 / 3.0).margin(1e-12));
  REQUIRE_THROWS_AS(complement_family(spec, 3), std::invalid_argument);
}

TEST_CASE("identity resolution is exact for integer labels") {
  ClockSpectrum eq = ClockSpectrum::equally_spaced_levels(4);
  REQUIRE(identity_defect(complement_family(eq, 4)) < 1e-12);

  ClockSpectrum povm = ClockSpectrum::from_labels({0, 1, 3});
  REQUIRE(identity_defect(complement_family(povm, 4)) < 1e-12);

  // Random integer-label spectra, any D >= r_max + 1, any offsets.
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<long long> labels{0};
    long long r = 0;
    Index d = 2 + static_cast<Index>(rng() % 5);
    for (Index i = 1; i < d; ++i) {
      r += 1 + static_cast<long long>(rng() % 4);
      labels.push_back(r);
    }
    double t0 = static_cast<double>(rng() % 100) / 17.0;
    double E0 = static_cast<double>(rng() % 100) / 13.0 - 3.0;
    ClockSpectrum spec = ClockSpectrum::from_labels(labels, 2.0 * pi, E0);
    Index D = spec.max_label() + 1 + static_cast<Index>(rng() % 5);
    REQUIRE(identity_defect(complement_family(spec, D, t0)) < 1e-12);
  }
}

TEST_CASE("identity defect shrinks along rational approximants of sqrt(2)") {
  // Spectrum {0, 1, sqrt(2)} probed with families built from the approximants
  // 7/5, 17/12, 99/70 of the top gap.
  std::vector<double> energies{0.0, 1.0, std::sqrt(2.0)};
  std::vector<std::pair<long long, long long>> approx{{7, 5}, {17, 12}, {99, 70}};
  double prev = 1e9;
  for (auto [num, den] : approx) {
    // Approximant lattice: unit gap = den steps, so T = 2*pi*den and
    // D covers labels {0, den, num}.
    double T = 2.0 * pi * static_cast<double>(den);
    Index D = static_cast<Index>(num) + 1;
    ComplementFamily fam = family_from_energies(energies, T, D);
    double defect = identity_defect(fam);
    REQUIRE(defect < prev);
    prev = defect;
  }
  REQUIRE(prev < 0.03); // 99/70 already resolves the identity to a few percent
}

TEST_CASE("family shift covariance and cyclicity") {
  ClockSpectrum spec = ClockSpectrum::from_labels({0, 1, 3, 4});
  Index D = 6;
  ComplementFamily fam = complement_family(spec, D);
  Eigen::MatrixXcd h = Eigen::VectorXcd::Zero(spec.dim()).asDiagonal();
  for (Index i = 0; i < spec.dim(); ++i) h(i, i) = spec.energy(i);
  Operator hc(h, {spec.dim()});

  for (Index m = 0; m < D; ++m) {
    Operator u = unitary_from_hamiltonian(hc, fam.values[m] - fam.values[0], spec.hbar);
    REQUIRE((apply(u, fam.states[0]).amps - fam.states[m].amps).cwiseAbs().maxCoeff() < 1e-10);
  }
  // One more minimal step from the last state returns to the first.
  Operator step = unitary_from_hamiltonian(hc, spec.period / static_cast<double>(D), spec.hbar);
  REQUIRE((apply(step, fam.states[D - 1]).amps - fam.states[0].amps).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("tau operator: matrix form, shift invariance, eigensystem, conjugacy") {
  const double T = 2.0 * pi;
  ClockSpectrum spec = ClockSpectrum::equally_spaced_levels(2, T);
  Operator tau = tau_operator(spec);
  // tau = pi (1 - sigma_x) / 2 in the energy basis (2x2 outer products).
  Eigen::Matrix2cd expect;
  expect << pi / 2.0, -pi / 2.0, -pi / 2.0, pi / 2.0;
  REQUIRE((tau.mat - expect).cwiseAbs().maxCoeff() < 1e-12);

  // A global energy offset leaves tau unchanged.
  ClockSpectrum shifted = spec;
  shifted.E0 += 0.7331;
  REQUIRE((tau_operator(shifted).mat - tau.mat).cwiseAbs().maxCoeff() < 1e-12);

  // Eigenvectors are the |tau_m> themselves.
  ClockSpectrum spec5 = ClockSpectrum::equally_spaced_levels(5, 3.0);
  ComplementFamily fam = complement_family(spec5, 5);
  Operator tau5 = tau_operator(spec5);
  for (Index m = 0; m < 5; ++m) {
    StateVector mapped = apply(tau5, fam.states[m]);
    REQUIRE((mapped.amps - fam.values[m] * fam.states[m].amps).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Generator of energy shifts: exp(i tau (E_n - E_0) / hbar)|E_0> = |E_n>.
  for (Index n = 0; n < 5; ++n) {
    Operator u = unitary_from_hamiltonian(tau5, -(spec5.energy(n) - spec5.energy(0)), spec5.hbar);
    StateVector got = apply(u, basis_state(5, 0));
    REQUIRE((got.amps - basis_state(5, n).amps).cwiseAbs().maxCoeff() < 1e-10);
  }

  REQUIRE_THROWS_AS(tau_operator(ClockSpectrum::from_labels({0, 1, 3})), std::invalid_argument);
}

TEST_CASE("age operator: flat mean on eigenstates, commutator, stationarity") {
  ClockSpectrum spec = ClockSpectrum::from_labels({0, 2, 3, 7}, 5.0);
  const double alpha0 = 0.3;
  Operator age = age_operator(spec, alpha0);
  REQUIRE(is_hermitian(age.mat));

  // Energy eigenstate: flat P(alpha) = 1/T, so <A> = alpha0 + T/2.
  for (Index i = 0; i < spec.dim(); ++i) {
    StateVector e = basis_state(spec.dim(), i);
    REQUIRE(expectation(age, e) == Approx(alpha0 + spec.period / 2.0).margin(1e-12));
  }

  // [H, A] = i hbar (|alpha0~><alpha0~| - 1).
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(spec.dim(), spec.dim());
  for (Index i = 0; i < spec.dim(); ++i) h(i, i) = spec.energy(i);
  Eigen::MatrixXcd comm = h * age.mat - age.mat * h;
  StateVector a0 = continuous_ket(spec, alpha0);
  Eigen::MatrixXcd expect = cxd(0.0, spec.hbar) *
                            (a0.amps * a0.amps.adjoint() -
                             Eigen::MatrixXcd::Identity(spec.dim(), spec.dim()));
  REQUIRE((comm - expect).cwiseAbs().maxCoeff() < 1e-10);

  // d<A>/dt = (i/hbar) <[H, A]> vanishes on stationary states.
  for (Index i = 0; i < spec.dim(); ++i) {
    StateVector e = basis_state(spec.dim(), i);
    cxd rate = cxd(0.0, 1.0) / spec.hbar * e.amps.dot(comm * e.amps);
    REQUIRE(std::abs(rate) < 1e-12);
  }
}

TEST_CASE("age expectation equals the first moment of P(alpha)") {
  ClockSpectrum spec = ClockSpectrum::from_labels({0, 1, 4}, 2.0 * pi);
  Operator age = age_operator(spec, 0.0);
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 5; ++rep) {
    StateVector psi(testutil::random_state(3, rng), {3});
    auto [m1, m2] = alpha_moments(psi, spec, 20000);
    REQUIRE(expectation(age, psi) == Approx(m1).margin(1e-6));
  }
}

TEST_CASE("uncertainty product against the commutator bound") {
  ClockSpectrum spec = ClockSpectrum::from_labels({0, 1, 3}, 2.0 * pi);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(3, 3);
  for (Index i = 0; i < 3; ++i) h(i, i) = spec.energy(i);
  StateVector a0 = continuous_ket(spec, 0.0);

  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 8; ++rep) {
    StateVector psi(testutil::random_state(3, rng), {3});
    auto [m1, m2] = alpha_moments(psi, spec, 20000);
    double var_alpha = m2 - m1 * m1;
    double e1 = (psi.amps.dot(h * psi.amps)).real();
    double e2 = (psi.amps.dot(h * h * psi.amps)).real();
    double var_e = e2 - e1 * e1;
    double lhs = std::sqrt(std::max(0.0, var_e)) * std::sqrt(std::max(0.0, var_alpha));
    double rhs = 0.5 * std::abs(1.0 - std::norm(a0.amps.dot(psi.amps)));
    REQUIRE(lhs >= rhs - 1e-6);
  }
}

TEST_CASE("alpha probability density: flatness, peak and two-level law") {
  ClockSpectrum spec = ClockSpectrum::from_labels({0, 1, 3}, 2.0 * pi);
  const double T = spec.period;

  StateVector e1 = basis_state(3, 1);
  for (double t : {0.0, 0.4, 1.9, 5.5})
    REQUIRE(alpha_probability_density(e1, spec, t) == Approx(1.0 / T).margin(1e-12));

  // |alpha0~>/sqrt(d) peaks at alpha0 with value d/T.
  StateVector peaked = continuous_ket(spec, 1.3);
  peaked.amps /= std::sqrt(3.0);
  REQUIRE(alpha_probability_density(peaked, spec, 1.3) == Approx(3.0 / T).margin(1e-12));

  ClockSpectrum two = ClockSpectrum::equally_spaced_levels(2, T);
  Eigen::VectorXcd amps(2);
  amps << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  StateVector sup(amps, {2});
  for (double t : {0.0, 0.7, 2.9})
    REQUIRE(alpha_probability_density(sup, two, t) ==
            Approx((1.0 + std::cos(2.0 * pi * t / T)) / T).margin(1e-12));

  // Normalization over one period.
  std::mt19937_64 rng(25);
  StateVector psi(testutil::random_state(3, rng), {3});
  double total = 0.0;
  Index n = 10000;
  for (Index j = 0; j < n; ++j)
    total += alpha_probability_density(psi, spec, (j + 0.5) * T / n) * T / n;
  REQUIRE(total == Approx(1.0).margin(1e-8));
}

TEST_CASE("continuous-limit identity quadrature") {
  ClockSpectrum spec = ClockSpectrum::from_labels({0, 2, 5}, 4.0);
  REQUIRE(continuous_identity_defect(spec, 1024) < 1e-12);
  // Coarse grids below the bandwidth alias and must show a defect.
  REQUIRE(continuous_identity_defect(spec, 5) > 1e-3);
}
