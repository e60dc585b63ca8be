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

#include "pawlab/hilbert.hpp"
#include "test_helpers.hpp"

#include <catch2/catch.hpp>

#include <numbers>
#include <random>

using namespace pawlab;
using Catch::Detail::Approx;

namespace {

const Eigen::Matrix2cd sigma_x = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();

Operator diag_op(std::initializer_list<double> vals) {
  Eigen::VectorXcd d(static_cast<Index>(vals.size()));
  Index i = 0;
  for (double v : vals) d(i++) = v;
  return Operator(d.asDiagonal(), {static_cast<Index>(vals.size())});
}

} // namespace

TEST_CASE("tensor product of identities and basis states") {
  Operator i2 = identity_operator(2);
  Operator i4 = tensor_product(i2, i2);
  REQUIRE((i4.mat - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(i4.dims == std::vector<Index>{2, 2});

  StateVector v = tensor_product(basis_state(2, 0), basis_state(2, 1));
  REQUIRE(v.size() == 4);
  REQUIRE(v.amps(1) == cxd(1.0, 0.0));
  REQUIRE(v.amps.cwiseAbs().sum() == Approx(1.0));
}

TEST_CASE("tensor-sum Hamiltonian has additive eigenvalues") {
  Operator n = diag_op({0, 1});
  Operator h = Operator(tensor_product(n, identity_operator(2)).mat +
                            tensor_product(identity_operator(2), n).mat,
                        {2, 2});
  // Oracle: direct 4x4 eigensolve.
  Spectrum s = eigensystem(h);
  std::vector<double> expect{0, 1, 1, 2};
  for (Index k = 0; k < 4; ++k) REQUIRE(s.eigenvalues(k) == Approx(expect[k]).margin(1e-12));
}

TEST_CASE("tensor product is associative") {
  std::mt19937_64 rng(11);
  Operator a(testutil::random_hermitian(2, rng), {2});
  Operator b(testutil::random_hermitian(3, rng), {3});
  Operator c(testutil::random_hermitian(2, rng), {2});
  Operator left = tensor_product(tensor_product(a, b), c);
  Operator right = tensor_product(a, tensor_product(b, c));
  REQUIRE((left.mat - right.mat).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(left.dims == right.dims);
}

TEST_CASE("partial trace of a product state factorizes") {
  std::mt19937_64 rng(12);
  Operator rho_a = testutil::random_density(3, rng);
  Operator rho_b = testutil::random_density(2, rng);
  Operator joint = tensor_product(rho_a, rho_b);

  Operator back_a = partial_trace(joint, 0);
  REQUIRE((back_a.mat - rho_a.mat * rho_b.mat.trace()).cwiseAbs().maxCoeff() < 1e-12);
  Operator back_b = partial_trace(joint, 1);
  REQUIRE((back_b.mat - rho_b.mat * rho_a.mat.trace()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial trace of a Bell projector is maximally mixed") {
  Eigen::VectorXcd bell(4);
  bell << 1.0 / std::sqrt(2.0), 0, 0, 1.0 / std::sqrt(2.0);
  Operator rho(bell * bell.adjoint(), {2, 2});
  Operator reduced = partial_trace(rho, 1);
  REQUIRE((reduced.mat - 0.5 * Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial trace preserves the trace and validates the factor index") {
  std::mt19937_64 rng(13);
  Operator rho = testutil::random_density(6, rng);
  rho.dims = {2, 3};
  for (std::size_t keep = 0; keep < 2; ++keep) {
    Operator red = partial_trace(rho, keep);
    REQUIRE(std::abs(red.mat.trace() - rho.mat.trace()) < 1e-12);
  }
  REQUIRE_THROWS_AS(partial_trace(rho, 2), std::invalid_argument);
}

TEST_CASE("unitary from Hamiltonian: identity, cyclic return, sigma_x rotation") {
  const double T = 2.0 * std::numbers::pi;
  Operator h = diag_op({0.0, 2.0 * std::numbers::pi / T});

  Operator u0 = unitary_from_hamiltonian(h, 0.0);
  REQUIRE((u0.mat - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  Operator ut = unitary_from_hamiltonian(h, T);
  REQUIRE((ut.mat - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  // Oracle: exp(-i theta sigma_x) = cos(theta) 1 - i sin(theta) sigma_x,
  // so U(pi) = -1 and U(pi/2) = -i sigma_x.
  Operator sx(sigma_x, {2});
  Operator u_pi = unitary_from_hamiltonian(sx, std::numbers::pi);
  REQUIRE((u_pi.mat + Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  Operator u_half = unitary_from_hamiltonian(sx, std::numbers::pi / 2.0);
  Eigen::Matrix2cd expect = cxd(0.0, -1.0) * sigma_x;
  REQUIRE((u_half.mat - expect).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(unitarity_defect(u_half) < 1e-10);
}

TEST_CASE("unitary composition U(t1) U(t2) = U(t1 + t2)") {
  std::mt19937_64 rng(14);
  Operator h(testutil::random_hermitian(4, rng), {4});
  Operator u1 = unitary_from_hamiltonian(h, 0.7);
  Operator u2 = unitary_from_hamiltonian(h, 1.9);
  Operator u12 = unitary_from_hamiltonian(h, 2.6);
  REQUIRE((u1.mat * u2.mat - u12.mat).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("non-Hermitian input is rejected") {
  Eigen::MatrixXcd m(2, 2);
  m << 0, 1, 0, 0;
  REQUIRE_THROWS_AS(unitary_from_hamiltonian(Operator(m, {2}), 1.0), std::invalid_argument);
}

TEST_CASE("trace distance basics") {
  std::mt19937_64 rng(15);
  Operator rho = testutil::random_density(4, rng);
  REQUIRE(trace_distance(rho, rho) == Approx(0.0).margin(1e-14));

  Operator p0 = projector(basis_state(2, 0));
  Operator p1 = projector(basis_state(2, 1));
  REQUIRE(trace_distance(p0, p1) == Approx(1.0));

  Operator half(0.5 * Eigen::MatrixXcd::Identity(2, 2), {2});
  REQUIRE(trace_distance(half, diag_op({0.75, 0.25})) == Approx(0.25));
}

TEST_CASE("trace distance triangle inequality on random triples") {
  std::mt19937_64 rng(16);
  for (int rep = 0; rep < 20; ++rep) {
    Index d = 2 + static_cast<Index>(rng() % 7); // dims <= 8
    Operator a = testutil::random_density(d, rng);
    Operator b = testutil::random_density(d, rng);
    Operator c = testutil::random_density(d, rng);
    double ab = trace_distance(a, b);
    double bc = trace_distance(b, c);
    double ac = trace_distance(a, c);
    REQUIRE(ac <= ab + bc + 1e-12);
    REQUIRE(ab >= 0.0);
    REQUIRE(ab <= 1.0 + 1e-12);
  }
}

TEST_CASE("eigensystem orders eigenvalues and fixes phases") {
  std::mt19937_64 rng(17);
  Operator h(testutil::random_hermitian(5, rng), {5});
  Spectrum s = eigensystem(h);
  for (Index k = 1; k < 5; ++k) REQUIRE(s.eigenvalues(k) >= s.eigenvalues(k - 1));
  REQUIRE((s.eigenvectors.adjoint() * s.eigenvectors - Eigen::MatrixXcd::Identity(5, 5))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  for (Index c = 0; c < 5; ++c) {
    for (Index r = 0; r < 5; ++r) {
      cxd v = s.eigenvectors(r, c);
      if (std::abs(v) > 1e-12) {
        REQUIRE(v.imag() == Approx(0.0).margin(1e-12));
        REQUIRE(v.real() > 0.0);
        break;
      }
    }
  }
}
