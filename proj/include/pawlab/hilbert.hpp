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

#include <Eigen/Dense>

#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pawlab {

using cxd = std::complex<double>;
using Index = Eigen::Index;

inline constexpr double hermiticity_tol = 1e-10;

/// Dense state vector over an explicit product of factor dimensions.
/// `dims` lists the factor dimensions left to right; the amplitude layout is
/// row-major in the factor indices (leftmost factor is the slowest index),
/// matching the Kronecker-product convention.
struct StateVector {
  Eigen::VectorXcd amps;
  std::vector<Index> dims;

  StateVector() = default;
  StateVector(Eigen::VectorXcd a, std::vector<Index> d)
      : amps(std::move(a)), dims(std::move(d)) {
    Index prod = 1;
    for (Index dd : dims) prod *= dd;
    if (prod != amps.size())
      throw std::invalid_argument("StateVector: dims do not match amplitude count");
  }

  Index size() const { return amps.size(); }
  double norm() const { return amps.norm(); }
};

/// Dense square operator over the same factor-dimension bookkeeping.
struct Operator {
  Eigen::MatrixXcd mat;
  std::vector<Index> dims;

  Operator() = default;
  Operator(Eigen::MatrixXcd m, std::vector<Index> d)
      : mat(std::move(m)), dims(std::move(d)) {
    if (mat.rows() != mat.cols())
      throw std::invalid_argument("Operator: matrix must be square");
    Index prod = 1;
    for (Index dd : dims) prod *= dd;
    if (prod != mat.rows())
      throw std::invalid_argument("Operator: dims do not match matrix side");
  }

  Index size() const { return mat.rows(); }
};

/// Eigenvalues ascending, eigenvectors as matching columns.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
};

inline Operator identity_operator(Index d) {
  return Operator(Eigen::MatrixXcd::Identity(d, d), {d});
}

inline StateVector basis_state(Index d, Index k) {
  if (k < 0 || k >= d) throw std::invalid_argument("basis_state: index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
  v(k) = 1.0;
  return StateVector(std::move(v), {d});
}

inline double hermiticity_defect(const Eigen::MatrixXcd &m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Eigen::MatrixXcd &m, double tol = hermiticity_tol) {
  return hermiticity_defect(m) <= tol;
}

inline cxd inner(const StateVector &a, const StateVector &b) {
  if (a.size() != b.size())
    throw std::invalid_argument("inner: dimension mismatch");
  return a.amps.dot(b.amps); // Eigen's dot conjugates the left argument
}

inline Operator outer(const StateVector &a, const StateVector &b) {
  return Operator(a.amps * b.amps.adjoint(), a.dims);
}

/// Rank-1 projector |a><a| / <a|a>.
inline Operator projector(const StateVector &a) {
  double n2 = a.amps.squaredNorm();
  if (n2 <= 0.0) throw std::invalid_argument("projector: null vector");
  return Operator(a.amps * a.amps.adjoint() / n2, a.dims);
}

inline StateVector apply(const Operator &op, const StateVector &v) {
  if (op.size() != v.size())
    throw std::invalid_argument("apply: dimension mismatch");
  return StateVector(op.mat * v.amps, v.dims);
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline StateVector tensor_product(const StateVector &a, const StateVector &b) {
  Eigen::VectorXcd out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a.amps(i) * b.amps;
  std::vector<Index> dims = a.dims;
  dims.insert(dims.end(), b.dims.begin(), b.dims.end());
  return StateVector(std::move(out), std::move(dims));
}

inline Operator tensor_product(const Operator &a, const Operator &b) {
  std::vector<Index> dims = a.dims;
  dims.insert(dims.end(), b.dims.begin(), b.dims.end());
  return Operator(kron(a.mat, b.mat), std::move(dims));
}

/// Traces out every factor except `keep`.
inline Operator partial_trace(const Operator &rho, std::size_t keep) {
  if (rho.dims.size() < 2)
    throw std::invalid_argument("partial_trace: at least two factors required");
  if (keep >= rho.dims.size())
    throw std::invalid_argument("partial_trace: invalid factor index");

  Index left = 1, mid = rho.dims[keep], right = 1;
  for (std::size_t f = 0; f < keep; ++f) left *= rho.dims[f];
  for (std::size_t f = keep + 1; f < rho.dims.size(); ++f) right *= rho.dims[f];

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(mid, mid);
  for (Index i = 0; i < mid; ++i)
    for (Index j = 0; j < mid; ++j) {
      cxd acc = 0.0;
      for (Index l = 0; l < left; ++l)
        for (Index r = 0; r < right; ++r) {
          Index row = (l * mid + i) * right + r;
          Index col = (l * mid + j) * right + r;
          acc += rho.mat(row, col);
        }
      out(i, j) = acc;
    }
  return Operator(std::move(out), {mid});
}

/// Hermitian eigensystem, eigenvalues ascending, eigenvector phases fixed so
/// the first component above threshold is real positive. Reproducible across
/// runs; degenerate subspaces are only determined up to rotation.
inline Spectrum eigensystem(const Operator &h, double tol = hermiticity_tol) {
  if (!is_hermitian(h.mat, tol))
    throw std::invalid_argument("eigensystem: operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.mat);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigensystem: eigensolver failed");
  Spectrum s{solver.eigenvalues(), solver.eigenvectors()};
  for (Index c = 0; c < s.eigenvectors.cols(); ++c) {
    for (Index r = 0; r < s.eigenvectors.rows(); ++r) {
      cxd v = s.eigenvectors(r, c);
      if (std::abs(v) > 1e-12) {
        s.eigenvectors.col(c) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
  return s;
}

/// exp(-i H t / hbar) through the spectral decomposition of a Hermitian H.
inline Operator unitary_from_hamiltonian(const Operator &h, double t, double hbar = 1.0) {
  Spectrum s = eigensystem(h);
  Eigen::VectorXcd phases(s.eigenvalues.size());
  for (Index k = 0; k < s.eigenvalues.size(); ++k)
    phases(k) = std::polar(1.0, -s.eigenvalues(k) * t / hbar);
  Eigen::MatrixXcd u = s.eigenvectors * phases.asDiagonal() * s.eigenvectors.adjoint();
  return Operator(std::move(u), h.dims);
}

inline double unitarity_defect(const Operator &u) {
  return (u.mat * u.mat.adjoint() - Eigen::MatrixXcd::Identity(u.size(), u.size()))
      .cwiseAbs()
      .maxCoeff();
}

/// (1/2) sum of singular values of rho - sigma; both inputs Hermitian.
inline double trace_distance(const Operator &rho, const Operator &sigma) {
  if (rho.size() != sigma.size())
    throw std::invalid_argument("trace_distance: shape mismatch");
  if (!is_hermitian(rho.mat) || !is_hermitian(sigma.mat))
    throw std::invalid_argument("trace_distance: inputs must be Hermitian");
  Eigen::MatrixXcd diff = rho.mat - sigma.mat;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(diff);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

inline double expectation(const Operator &a, const StateVector &v) {
  cxd val = v.amps.dot(a.mat * v.amps);
  return val.real();
}

} // namespace pawlab
