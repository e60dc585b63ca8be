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

#include "pawlab/multitime.hpp"
#include "test_helpers.hpp"

#include <catch2/catch.hpp>

#include <numbers>
#include <random>

using namespace pawlab;
using namespace pawlab::multitime;
using paw::build_universe;
using paw::ClockBudget;
using paw::ConstrainedUniverse;
using Catch::Detail::Approx;

namespace {

constexpr double pi = std::numbers::pi;
const double T = 2.0 * pi;

Operator diag_system(const std::vector<double> &levels) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(levels.size(), levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) m(i, i) = levels[i];
  return Operator(std::move(m), {static_cast<Index>(levels.size())});
}

ConstrainedUniverse lattice_universe(const std::vector<double> &levels, Index dc,
                                     std::mt19937_64 &rng, bool rotate = true) {
  const Index ds = static_cast<Index>(levels.size());
  Eigen::MatrixXcd h = diag_system(levels).mat;
  if (rotate) {
    Eigen::MatrixXcd v = testutil::random_unitary(ds, rng);
    h = v * h * v.adjoint();
    h = 0.5 * (h + h.adjoint().eval());
  }
  return build_universe(Operator(h, {ds}), testutil::random_state(ds, rng),
                        ClockBudget{dc, T});
}

double propagator_oracle(const ConstrainedUniverse &u, const TwoTimeQuery &q) {
  Operator us = unitary_from_hamiltonian(u.system_h, q.t2 - q.t1, u.clock.hbar);
  cxd amp = q.basis.col(q.second_outcome).dot(us.mat * q.basis.col(q.first_outcome));
  return std::norm(amp);
}

} // namespace

TEST_CASE("gppt: repeated measurement at equal times returns certainty") {
  std::mt19937_64 rng(51);
  ConstrainedUniverse u = lattice_universe({0.0, 1.0, 2.0}, 12, rng);
  TwoTimeQuery q{0.5 * T, 0.5 * T, testutil::random_unitary(3, rng), 1, 1};
  REQUIRE(gppt_two_time(u, q) == Approx(1.0).margin(1e-12));
  q.second_outcome = 0;
  REQUIRE(gppt_two_time(u, q) == Approx(0.0).margin(1e-12));
}

TEST_CASE("gppt: qubit |+> to |+> over a quarter period gives one half") {
  std::mt19937_64 rng(52);
  Eigen::VectorXcd c = testutil::random_state(2, rng);
  ConstrainedUniverse u = build_universe(diag_system({0.0, 2.0 * pi / T}), c,
                                         ClockBudget{8, T});
  Eigen::MatrixXcd basis(2, 2);
  basis << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0),
           1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  TwoTimeQuery q{0.0, T / 4.0, basis, 0, 0};
  REQUIRE(gppt_two_time(u, q) == Approx(0.5).margin(1e-12));
}

TEST_CASE("gppt matches the direct propagator on random queries") {
  std::mt19937_64 rng(53);
  for (int rep = 0; rep < 4; ++rep) {
    ConstrainedUniverse u = lattice_universe({0.0, 1.0, 2.0}, 8 + 4 * rep, rng);
    const Index dc = u.clock_dim();
    for (int qi = 0; qi < 5; ++qi) {
      Index m1 = static_cast<Index>(rng() % dc);
      Index m2 = m1 + static_cast<Index>(rng() % (dc - m1));
      TwoTimeQuery q{static_cast<double>(m1) * T / dc, static_cast<double>(m2) * T / dc,
                     testutil::random_unitary(3, rng), static_cast<Index>(rng() % 3),
                     static_cast<Index>(rng() % 3)};
      REQUIRE(gppt_two_time(u, q) == Approx(propagator_oracle(u, q)).margin(1e-10));
    }
  }
}

TEST_CASE("gppt distribution sums to one, POVM clocks included") {
  std::mt19937_64 rng(54);
  // POVM clock: the level span exceeds the clock budget, so filler levels
  // cannot close the label gaps.
  ConstrainedUniverse u = lattice_universe({0.0, 1.0, 5.0}, 4, rng);
  REQUIRE_FALSE(u.clock.equally_spaced());
  Eigen::MatrixXcd basis = testutil::random_unitary(3, rng);
  const Index D = static_cast<Index>(u.clock.max_label()) + 1;
  double total = 0.0;
  for (Index b = 0; b < 3; ++b) {
    TwoTimeQuery q{0.0, 3.0 * T / D, basis, 1, b};
    double p = gppt_two_time(u, q);
    REQUIRE(p >= 0.0);
    REQUIRE(p <= 1.0 + 1e-12);
    total += p;
  }
  REQUIRE(total == Approx(1.0).margin(1e-10));

  TwoTimeQuery bad{0.3 * T, 0.1 * T, basis, 0, 0};
  REQUIRE_THROWS_AS(gppt_two_time(u, bad), std::invalid_argument);
  TwoTimeQuery off{0.0, 0.123456, basis, 0, 0};
  REQUIRE_THROWS_AS(gppt_two_time(u, off), std::invalid_argument);
}

TEST_CASE("glm: trivial propagator gives delta statistics") {
  std::mt19937_64 rng(55);
  ConstrainedUniverse u = lattice_universe({0.0}, 6, rng, false);
  // One-level system: U_Q = 1 up to a phase for any time gap.
  Eigen::MatrixXcd basis(1, 1);
  basis << 1.0;
  TwoTimeQuery q{T / 6.0, 3.0 * T / 6.0, basis, 0, 0};
  REQUIRE(glm_two_time(u, q, MemoryLayout::pair(1, 2)) == Approx(1.0).margin(1e-12));

  ConstrainedUniverse qb = build_universe(diag_system({0.0, 1.0}),
                                          testutil::random_state(2, rng), ClockBudget{8, T});
  Eigen::MatrixXcd b2 = testutil::random_unitary(2, rng);
  for (Index a = 0; a < 2; ++a)
    for (Index b = 0; b < 2; ++b) {
      TwoTimeQuery q2{0.0, 4.0 * T / 8.0, b2, a, b};
      double expect = propagator_oracle(qb, q2);
      REQUIRE(glm_two_time(qb, q2, MemoryLayout::pair(2, 3, 1)) ==
              Approx(expect).margin(1e-10));
    }
}

TEST_CASE("glm: qubit quarter-period |+> to |+> gives one half") {
  std::mt19937_64 rng(56);
  ConstrainedUniverse u = build_universe(diag_system({0.0, 2.0 * pi / T}),
                                         testutil::random_state(2, rng), ClockBudget{8, T});
  Eigen::MatrixXcd basis(2, 2);
  basis << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0),
           1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  TwoTimeQuery q{T / 8.0, T / 8.0 + T / 4.0, basis, 0, 0};
  REQUIRE(glm_two_time(u, q, MemoryLayout::pair(2, 2)) == Approx(0.5).margin(1e-10));

  // POVM clocks are rejected for GLM.
  ConstrainedUniverse povm = lattice_universe({0.0, 1.0, 5.0}, 4, rng);
  REQUIRE_FALSE(povm.clock.equally_spaced());
  Eigen::MatrixXcd b3 = testutil::random_unitary(3, rng);
  TwoTimeQuery q3{0.0, 4.0 * T / 6.0, b3, 0, 0};
  REQUIRE_THROWS_AS(glm_two_time(povm, q3, MemoryLayout::pair(3, 3)), std::invalid_argument);
}

TEST_CASE("glm single-measurement marginal: ready state before, frozen after") {
  std::mt19937_64 rng(57);
  ConstrainedUniverse u = build_universe(diag_system({0.0, 1.0, 2.0}),
                                         testutil::random_state(3, rng), ClockBudget{12, T});
  Eigen::MatrixXcd basis = testutil::random_unitary(3, rng);
  const Index dc = u.clock_dim();
  const double tau = T / static_cast<double>(dc);
  const Index m1 = 5;
  const Index ready = 1;
  StateVector phi_m1 = paw::relative_state(u, m1 * tau).state;

  for (Index m = 0; m < dc; ++m) {
    for (Index a = 0; a < 3; ++a) {
      double p = glm_memory_marginal(u, m * tau, m1 * tau, basis, a, 4, ready);
      if (m < m1) {
        REQUIRE(p == Approx(a == ready ? 1.0 : 0.0).margin(1e-12));
      } else {
        double expect = std::norm(basis.col(a).dot(phi_m1.amps));
        REQUIRE(p == Approx(expect).margin(1e-12));
      }
    }
    // A memory slot outside the outcome set keeps its pre-measurement weight
    // only before the interaction.
    double p_ready = glm_memory_marginal(u, m * tau, m1 * tau, basis, 3, 4, 3);
    REQUIRE(p_ready == Approx(m < m1 ? 1.0 : 0.0).margin(1e-12));
  }
}

TEST_CASE("glm memories stay frozen after correlation") {
  std::mt19937_64 rng(58);
  ConstrainedUniverse u = build_universe(diag_system({0.0, 1.0, 2.0}),
                                         testutil::random_state(3, rng), ClockBudget{10, T});
  Eigen::MatrixXcd basis = testutil::random_unitary(3, rng);
  TwoTimeQuery q{2.0 * T / 10.0, 5.0 * T / 10.0, basis, 0, 1};
  MemoryLayout layout = MemoryLayout::pair(3, 3);
  Eigen::MatrixXcd rho_ref = glm_memory_density(u, q, layout, 5);
  for (Index slice = 6; slice < 10; ++slice) {
    Eigen::MatrixXcd rho = glm_memory_density(u, q, layout, slice);
    REQUIRE((rho - rho_ref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gppt and glm agree with each other and the propagator") {
  std::mt19937_64 rng(59);
  int done = 0;
  while (done < 50) {
    Index ds = 2 + static_cast<Index>(rng() % 3); // dims <= 4
    std::vector<double> levels;
    for (Index k = 0; k < ds; ++k) levels.push_back(static_cast<double>(k));
    Index dc = ds + 4 + static_cast<Index>(rng() % 6);
    ConstrainedUniverse u = lattice_universe(levels, dc, rng);
    Index m1 = static_cast<Index>(rng() % (dc - 1));
    Index m2 = m1 + 1 + static_cast<Index>(rng() % (dc - m1 - 1));
    TwoTimeQuery q{static_cast<double>(m1) * T / dc, static_cast<double>(m2) * T / dc,
                   testutil::random_unitary(ds, rng), static_cast<Index>(rng() % ds),
                   static_cast<Index>(rng() % ds)};
    double want = propagator_oracle(u, q);
    double got_gppt = gppt_two_time(u, q);
    double got_glm = glm_two_time(u, q, MemoryLayout::pair(ds, ds));
    REQUIRE(got_gppt == Approx(want).margin(1e-10));
    REQUIRE(got_glm == Approx(want).margin(1e-10));
    ++done;
  }
}

TEST_CASE("spacetime two-time: short-gap peak and toy closed form") {
  const double L = 2.0 * pi;
  spacetime::MomentumGrid grid{-2.0 * pi / L, L, 3, 1.0};
  Eigen::Vector3cd c(0.5, 1.0 / std::sqrt(2.0), 0.5);
  spacetime::SpacetimeUniverse su = spacetime::build_spacetime_universe(
      {grid}, {grid}, c, spacetime::FreeParticleDispersion{2.0, 1.0});

  // Vanishing gap: sharply peaked at Delta_f = Delta_i.
  const double dt = su.clock.period / 64.0;
  double at_peak = spacetime_two_time(su, 0.0, {0.0}, {L / 3.0}, dt, {0.0}, {L / 3.0});
  double off_peak = spacetime_two_time(su, 0.0, {0.0}, {L / 3.0}, dt, {0.0}, {2.0 * L / 3.0});
  REQUIRE(at_peak == Approx(1.0 / 9.0).margin(1e-3));
  REQUIRE(off_peak < at_peak / 2.0);

  // Closed cosine form: |1 + 2 e^{-i eps dt} cos(u dd)|^2 / (d_R^2 d_S^2).
  const double eps = su.eps[0];
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 3; ++j) {
      double gap = static_cast<double>(i) * su.clock.period / 8.0;
      double dd = static_cast<double>(j) * L / 3.0; // Delta_f - Delta_i
      double expect =
          std::norm(cxd(1.0, 0.0) +
                    2.0 * std::polar(1.0, -eps * gap) * std::cos(2.0 * pi * dd / L)) /
          81.0;
      REQUIRE(spacetime_two_time(su, 0.0, {0.0}, {0.0}, gap, {0.0}, {dd}) ==
              Approx(expect).margin(1e-12));
    }
}

TEST_CASE("spacetime two-time matches the brute-force joint propagator") {
  const double L = 2.0 * pi;
  std::mt19937_64 rng(60);
  spacetime::MomentumGrid s_grid{-2.0 * pi / L, L, 3, 1.0};
  spacetime::MomentumGrid r_grid = s_grid;

  for (int rep = 0; rep < 10; ++rep) {
    // Random integer-lattice per-factor dispersions.
    std::vector<double> er(3), es(3);
    for (int k = 0; k < 3; ++k) {
      er[k] = static_cast<double>(rng() % 5);
      es[k] = static_cast<double>(rng() % 5);
    }
    auto eps_of = [&](const std::vector<double> &p) {
      Index k = static_cast<Index>(std::llround(p[0] + 1.0));
      Index q = 2 - k; // paired mode index on R
      return er[q] + es[k];
    };
    Eigen::VectorXcd c = testutil::random_state(3, rng);
    spacetime::SpacetimeUniverse su = spacetime::build_spacetime_universe(
        {r_grid}, {s_grid}, c, spacetime::CustomDispersion{eps_of},
        spacetime::SpacetimeClockBudget{2.0 * pi, 1.0});

    // Oracle: matrix element of exp(-i (H_R + H_S) dt) within the paired
    // support, between position product states.
    Eigen::MatrixXcd hr = Eigen::MatrixXcd::Zero(3, 3), hs = Eigen::MatrixXcd::Zero(3, 3);
    for (Index k = 0; k < 3; ++k) {
      hr(k, k) = er[k];
      hs(k, k) = es[k];
    }
    Operator joint(kron(hr, Eigen::MatrixXcd::Identity(3, 3)) +
                       kron(Eigen::MatrixXcd::Identity(3, 3), hs),
                   {3, 3});
    Eigen::MatrixXcd support = Eigen::MatrixXcd::Zero(9, 9);
    for (Index k = 0; k < 3; ++k) {
      Index q = su.r_pairing[0][k];
      support(q * 3 + k, q * 3 + k) = 1.0;
    }
    auto position_state = [&](double x, double y) {
      Eigen::VectorXcd v(9);
      for (Index q = 0; q < 3; ++q)
        for (Index k = 0; k < 3; ++k)
          v(q * 3 + k) = std::polar(1.0 / 3.0, -r_grid.value(q) * x - s_grid.value(k) * y);
      return v;
    };

    for (int qq = 0; qq < 4; ++qq) {
      double t1 = static_cast<double>(rng() % 8) * su.clock.period / 8.0;
      double dt = static_cast<double>(rng() % 8) * su.clock.period / 8.0;
      double x1 = static_cast<double>(rng() % 3) * L / 3.0;
      double y1 = static_cast<double>(rng() % 3) * L / 3.0;
      double x2 = static_cast<double>(rng() % 3) * L / 3.0;
      double y2 = static_cast<double>(rng() % 3) * L / 3.0;

      Operator prop = unitary_from_hamiltonian(joint, dt);
      cxd amp = position_state(x2, y2).dot(prop.mat * support * position_state(x1, y1));
      double expect = std::norm(amp);
      REQUIRE(spacetime_two_time(su, t1, {x1}, {y1}, t1 + dt, {x2}, {y2}) ==
              Approx(expect).margin(1e-10));
    }
  }
}

TEST_CASE("single-time marginal consistency with the joint probability") {
  const double L = 2.0 * pi;
  spacetime::MomentumGrid grid{-2.0 * pi / L, L, 3, 1.0};
  Eigen::Vector3cd c(0.6, std::sqrt(0.28), 0.6);
  spacetime::SpacetimeUniverse su = spacetime::build_spacetime_universe(
      {grid}, {grid}, c, spacetime::FreeParticleDispersion{2.0, 1.0});
  // P(y, x | t) = (1/d_R) P(y | x, t) on the discrete grids.
  for (Index j = 0; j < 3; ++j)
    for (Index l = 0; l < 3; ++l) {
      double x = static_cast<double>(j) * L / 3.0;
      double y = static_cast<double>(l) * L / 3.0;
      double joint_marginal =
          spacetime::joint_conditional_probability(su, 0.7, {x}, {y}, true) / 3.0;
      // Same quantity from first principles through the R+S relative state.
      Eigen::VectorXcd amps = spacetime::frame_system_amplitudes(su, 0.7);
      cxd amp = 0.0;
      for (Index k = 0; k < 3; ++k)
        amp += amps(k) * std::polar(1.0 / 3.0, su.r_grids[0].value(su.r_pairing[0][k]) * x +
                                                   su.s_grids[0].value(k) * y);
      REQUIRE(joint_marginal == Approx(std::norm(amp)).margin(1e-12));
    }
}
