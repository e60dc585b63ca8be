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

#include <functional>
#include <optional>
#include <set>
#include <variant>

namespace pawlab::spacetime {

using clockwork::ClockSpectrum;
using clockwork::ComplementFamily;
using clockwork::two_pi;

/// Equally spaced momentum lattice p_k = p0 + 2*pi*hbar*k/L, k = 0..d-1.
struct MomentumGrid {
  double p0 = 0.0;
  double length = two_pi; // L
  Index dim = 0;
  double hbar = 1.0;

  double step() const { return two_pi * hbar / length; }
  double value(Index k) const { return p0 + static_cast<double>(k) * step(); }

  ClockSpectrum as_spectrum() const {
    return ClockSpectrum::equally_spaced_levels(dim, length, p0, hbar);
  }
};

/// Rod states conjugate to the momentum lattice; same machinery as the clock
/// family with momentum in the role of energy and L in the role of T.
inline ComplementFamily position_family(const MomentumGrid &grid, Index D, double x0 = 0.0) {
  return clockwork::complement_family(grid.as_spectrum(), D, x0);
}

inline Operator momentum_operator(const MomentumGrid &grid) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(grid.dim, grid.dim);
  for (Index k = 0; k < grid.dim; ++k) m(k, k) = grid.value(k);
  return Operator(std::move(m), {grid.dim});
}

/// Total-momentum-constrained pair: sum_k c_k |p = -p_k>_R (x) |p_k>_S.
struct MomentumUniverse {
  MomentumGrid r_grid, s_grid;
  Eigen::VectorXcd coeffs;     // over S modes
  std::vector<Index> pairing;  // S mode -> R mode with p_R = -p_S
  StateVector global_state;    // dims {d_R, d_S}
  Index family_r = 0, family_s = 0; // D_R, D_S for discrete position queries
  double x0 = 0.0, y0 = 0.0;        // grid origins of the discrete queries
};

inline double momentum_residual(const MomentumUniverse &u) {
  Operator p = Operator(
      kron(momentum_operator(u.r_grid).mat, Eigen::MatrixXcd::Identity(u.s_grid.dim, u.s_grid.dim)) +
          kron(Eigen::MatrixXcd::Identity(u.r_grid.dim, u.r_grid.dim), momentum_operator(u.s_grid).mat),
      {u.r_grid.dim, u.s_grid.dim});
  return (p.mat * u.global_state.amps).norm();
}

inline MomentumUniverse momentum_constrained_universe(const MomentumGrid &r_grid,
                                                      const MomentumGrid &s_grid,
                                                      const Eigen::VectorXcd &coeffs) {
  if (coeffs.size() != s_grid.dim)
    throw std::invalid_argument("momentum_constrained_universe: coefficient count mismatch");
  if (std::abs(coeffs.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("momentum_constrained_universe: coefficients must be normalized");
  if (r_grid.dim < s_grid.dim)
    throw std::invalid_argument("momentum_constrained_universe: frame must be at least as large as the system");

  MomentumUniverse u;
  u.r_grid = r_grid;
  u.s_grid = s_grid;
  u.coeffs = coeffs;
  u.family_r = r_grid.dim;
  u.family_s = s_grid.dim;
  u.pairing.resize(s_grid.dim);
  for (Index k = 0; k < s_grid.dim; ++k) {
    double target = -s_grid.value(k);
    double raw = (target - r_grid.p0) / r_grid.step();
    double rounded = std::round(raw);
    if (std::abs(raw - rounded) > 1e-9 || rounded < 0 ||
        rounded >= static_cast<double>(r_grid.dim))
      throw std::invalid_argument("momentum_constrained_universe: unpairable momentum " +
                                  std::to_string(s_grid.value(k)));
    u.pairing[k] = static_cast<Index>(rounded);
  }
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(r_grid.dim * s_grid.dim);
  for (Index k = 0; k < s_grid.dim; ++k)
    amps(u.pairing[k] * s_grid.dim + k) = coeffs(k);
  u.global_state = StateVector(std::move(amps), {r_grid.dim, s_grid.dim});

  if (momentum_residual(u) > 1e-12)
    throw std::runtime_error("momentum_constrained_universe: constraint residual too large");
  return u;
}

/// |phi(x)> = sum_k c_k exp(-i p_k x / hbar) |p_k>_S.
inline StateVector relative_position_state(const MomentumUniverse &u, double x) {
  Eigen::VectorXcd amps(u.s_grid.dim);
  for (Index k = 0; k < u.s_grid.dim; ++k)
    amps(k) = u.coeffs(k) * std::polar(1.0, -u.s_grid.value(k) * x / u.s_grid.hbar);
  return StateVector(std::move(amps), {u.s_grid.dim});
}

namespace detail {

inline void require_on_grid(double v, double origin, double spacing, const char *what) {
  double raw = (v - origin) / spacing;
  if (std::abs(raw - std::round(raw)) > 1e-9)
    throw std::invalid_argument(std::string("off-grid ") + what + " in discrete mode");
}

} // namespace detail

/// P(y on S | x on R): (1/D_S) |sum_k c_k e^{i p_k (y-x)}|^2 on the discrete
/// grids, or the (1/L_S)-normalized density for continuous queries.
inline double relative_position_probability(const MomentumUniverse &u, double x, double y,
                                            bool discrete) {
  if (discrete) {
    detail::require_on_grid(x, u.x0, u.r_grid.length / static_cast<double>(u.family_r), "x");
    detail::require_on_grid(y, u.y0, u.s_grid.length / static_cast<double>(u.family_s), "y");
  }
  cxd amp = 0.0;
  for (Index k = 0; k < u.s_grid.dim; ++k)
    amp += u.coeffs(k) * std::polar(1.0, u.s_grid.value(k) * (y - x) / u.s_grid.hbar);
  double w = discrete ? static_cast<double>(u.family_s) : u.s_grid.length;
  return std::norm(amp) / w;
}

struct FreeParticleDispersion {
  double frame_mass = 1.0;  // M
  double system_mass = 1.0; // m
};

/// eps = sign * sqrt(|p|^2 + m^2 c^4) in c = 1 units; the frame kinetic term
/// is neglected.
struct RelativisticDispersion {
  double mass = 0.0;
  int sign = 1;
};

struct CustomDispersion {
  std::function<double(const std::vector<double> &)> eps; // of the S momenta
};

using Dispersion = std::variant<FreeParticleDispersion, RelativisticDispersion, CustomDispersion>;

struct SpacetimeClockBudget {
  std::optional<double> period; // T; chosen automatically when absent
  double hbar = 1.0;
};

/// Doubly constrained universe over C (x) R-axes (x) S-axes:
/// sum_k c_k |E=-eps_k>_C (x) |p=-p_k>_R (x) |p_k>_S, per axis.
struct SpacetimeUniverse {
  ClockSpectrum clock;
  std::vector<MomentumGrid> r_grids, s_grids; // one per spatial axis
  Eigen::VectorXcd coeffs;                    // over flattened S mode tuples
  std::vector<double> eps;                    // snapped energies per mode tuple
  std::vector<Index> clock_index;             // mode tuple -> clock level
  std::vector<std::vector<Index>> r_pairing;  // per axis: S mode -> R mode
  double snap_error = 0.0;                    // max |eps_true - eps_snapped|
  std::optional<RelativisticDispersion> relativistic;
  std::optional<FreeParticleDispersion> free_particle;
  StateVector global_state;

  Index axes() const { return static_cast<Index>(s_grids.size()); }
  Index modes() const { return coeffs.size(); }

  std::vector<Index> unflatten(Index mode) const {
    std::vector<Index> idx(s_grids.size());
    for (Index ax = axes() - 1; ax >= 0; --ax) {
      idx[ax] = mode % s_grids[ax].dim;
      mode /= s_grids[ax].dim;
    }
    return idx;
  }

  std::vector<double> momenta(Index mode) const {
    std::vector<Index> idx = unflatten(mode);
    std::vector<double> p(s_grids.size());
    for (std::size_t ax = 0; ax < s_grids.size(); ++ax) p[ax] = s_grids[ax].value(idx[ax]);
    return p;
  }
};

namespace detail {

/// Smallest lattice step that carries all pairwise gaps of `values` within
/// rel_tol; throws when no step with a reasonable subdivision count exists.
inline double fit_lattice_step(const std::vector<double> &values, double rel_tol) {
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) return 1.0;
  double dmin = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = 0; j < values.size(); ++j) {
      double d = std::abs(values[i] - values[j]);
      if (d > rel_tol * vmax && (dmin == 0.0 || d < dmin)) dmin = d;
    }
  if (dmin == 0.0) return vmax; // all values coincide
  for (long long n = 1; n <= 1000000; ++n) {
    double g = dmin / static_cast<double>(n);
    bool ok = true;
    for (double v : values) {
      double raw = (v - values.front()) / g;
      if (std::abs(raw - std::round(raw)) * g > rel_tol * vmax) { ok = false; break; }
    }
    if (ok) return g;
  }
  throw std::invalid_argument("dispersion values not representable on a clock lattice");
}

} // namespace detail

inline SpacetimeUniverse build_spacetime_universe(const std::vector<MomentumGrid> &r_grids,
                                                  const std::vector<MomentumGrid> &s_grids,
                                                  const Eigen::VectorXcd &coeffs,
                                                  const Dispersion &dispersion,
                                                  const SpacetimeClockBudget &budget = {}) {
  if (r_grids.size() != s_grids.size() || s_grids.empty() ||
      (s_grids.size() != 1 && s_grids.size() != 3))
    throw std::invalid_argument("build_spacetime_universe: expect 1 or 3 matching axes");

  SpacetimeUniverse u;
  u.r_grids = r_grids;
  u.s_grids = s_grids;
  u.coeffs = coeffs;

  Index modes = 1;
  for (const MomentumGrid &g : s_grids) modes *= g.dim;
  if (coeffs.size() != modes)
    throw std::invalid_argument("build_spacetime_universe: coefficient count mismatch");
  if (std::abs(coeffs.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("build_spacetime_universe: coefficients must be normalized");

  // Momentum pairing per axis.
  u.r_pairing.resize(s_grids.size());
  for (std::size_t ax = 0; ax < s_grids.size(); ++ax) {
    if (r_grids[ax].dim < s_grids[ax].dim)
      throw std::invalid_argument("build_spacetime_universe: frame axis smaller than system axis");
    u.r_pairing[ax].resize(s_grids[ax].dim);
    for (Index k = 0; k < s_grids[ax].dim; ++k) {
      double raw = (-s_grids[ax].value(k) - r_grids[ax].p0) / r_grids[ax].step();
      double rounded = std::round(raw);
      if (std::abs(raw - rounded) > 1e-9 || rounded < 0 ||
          rounded >= static_cast<double>(r_grids[ax].dim))
        throw std::invalid_argument("build_spacetime_universe: unpairable momentum on axis " +
                                    std::to_string(ax));
      u.r_pairing[ax][k] = static_cast<Index>(rounded);
    }
  }

  // True dispersion per flattened S mode tuple.
  std::vector<double> eps_true(modes);
  for (Index mode = 0; mode < modes; ++mode) {
    std::vector<double> p = u.momenta(mode);
    if (const auto *fp = std::get_if<FreeParticleDispersion>(&dispersion)) {
      double e = 0.0;
      for (double pk : p) e += pk * pk / (2.0 * fp->frame_mass) + pk * pk / (2.0 * fp->system_mass);
      eps_true[mode] = e;
      u.free_particle = *fp;
    } else if (const auto *rel = std::get_if<RelativisticDispersion>(&dispersion)) {
      double p2 = 0.0;
      for (double pk : p) p2 += pk * pk;
      eps_true[mode] = rel->sign * std::sqrt(p2 + rel->mass * rel->mass);
      u.relativistic = *rel;
    } else {
      eps_true[mode] = std::get<CustomDispersion>(dispersion).eps(p);
    }
  }

  // Snap the energies onto the clock lattice. Only gaps matter: the clock
  // offset E0 = -max(eps) absorbs the rest.
  const double hbar = budget.hbar;
  double step;
  if (budget.period) {
    step = two_pi * hbar / *budget.period;
  } else {
    step = detail::fit_lattice_step(eps_true, 1e-9);
  }
  const double e_top = *std::max_element(eps_true.begin(), eps_true.end());
  std::set<long long> used;
  std::vector<long long> mode_labels(modes);
  u.snap_error = 0.0;
  u.eps.resize(modes);
  for (Index mode = 0; mode < modes; ++mode) {
    long long lab = std::llround((e_top - eps_true[mode]) / step);
    mode_labels[mode] = lab;
    used.insert(lab);
    u.eps[mode] = e_top - static_cast<double>(lab) * step;
    u.snap_error = std::max(u.snap_error, std::abs(eps_true[mode] - u.eps[mode]));
  }
  double vmax = 0.0;
  for (double v : eps_true) vmax = std::max(vmax, std::abs(v));
  if (u.snap_error > 1e-9 * std::max(1.0, vmax))
    throw std::invalid_argument("build_spacetime_universe: dispersion values not representable "
                                "on the clock lattice (snap error too large)");
  std::vector<long long> labels(used.begin(), used.end());
  u.clock = ClockSpectrum::from_labels(std::move(labels), two_pi * hbar / step, -e_top, hbar);
  u.clock_index.resize(modes);
  for (Index mode = 0; mode < modes; ++mode) {
    auto it = std::lower_bound(u.clock.labels.begin(), u.clock.labels.end(), mode_labels[mode]);
    u.clock_index[mode] = static_cast<Index>(it - u.clock.labels.begin());
  }

  // Global state over {d_C, d_R..., d_S...}.
  std::vector<Index> dims{u.clock.dim()};
  Index r_total = 1, s_total = modes;
  for (const MomentumGrid &g : r_grids) { dims.push_back(g.dim); r_total *= g.dim; }
  for (const MomentumGrid &g : s_grids) dims.push_back(g.dim);
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(u.clock.dim() * r_total * s_total);
  for (Index mode = 0; mode < modes; ++mode) {
    std::vector<Index> idx = u.unflatten(mode);
    Index r_flat = 0;
    for (std::size_t ax = 0; ax < r_grids.size(); ++ax)
      r_flat = r_flat * r_grids[ax].dim + u.r_pairing[ax][idx[ax]];
    amps((u.clock_index[mode] * r_total + r_flat) * s_total + mode) = coeffs(mode);
  }
  u.global_state = StateVector(std::move(amps), std::move(dims));
  return u;
}

inline double energy_constraint_residual(const SpacetimeUniverse &u) {
  double acc = 0.0;
  for (Index mode = 0; mode < u.modes(); ++mode) {
    double total = u.clock.energy(u.clock_index[mode]) + u.eps[mode];
    acc += std::norm(u.coeffs(mode)) * total * total;
  }
  return std::sqrt(acc);
}

inline double momentum_constraint_residual(const SpacetimeUniverse &u) {
  double acc = 0.0;
  for (Index mode = 0; mode < u.modes(); ++mode) {
    std::vector<Index> idx = u.unflatten(mode);
    for (std::size_t ax = 0; ax < u.s_grids.size(); ++ax) {
      double total = u.r_grids[ax].value(u.r_pairing[ax][idx[ax]]) + u.s_grids[ax].value(idx[ax]);
      acc += std::norm(u.coeffs(mode)) * total * total;
    }
  }
  return std::sqrt(acc);
}

/// Relative state of R+S at clock time t, on the paired support, as amplitudes
/// per S mode tuple (the R tuple is fixed by the pairing).
inline Eigen::VectorXcd frame_system_amplitudes(const SpacetimeUniverse &u, double t) {
  Eigen::VectorXcd amps(u.modes());
  for (Index mode = 0; mode < u.modes(); ++mode)
    amps(mode) = u.coeffs(mode) * std::polar(1.0, -u.eps[mode] * t / u.clock.hbar);
  return amps;
}

/// Relative state of R+S at clock time t embedded in the full R (x) S tensor
/// space (zero amplitude off the paired support).
inline StateVector frame_system_state(const SpacetimeUniverse &u, double t) {
  Index r_total = 1, s_total = u.modes();
  for (const MomentumGrid &g : u.r_grids) r_total *= g.dim;
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(r_total * s_total);
  for (Index mode = 0; mode < s_total; ++mode) {
    std::vector<Index> idx = u.unflatten(mode);
    Index r_flat = 0;
    for (std::size_t ax = 0; ax < u.r_grids.size(); ++ax)
      r_flat = r_flat * u.r_grids[ax].dim + u.r_pairing[ax][idx[ax]];
    amps(r_flat * s_total + mode) =
        u.coeffs(mode) * std::polar(1.0, -u.eps[mode] * t / u.clock.hbar);
  }
  std::vector<Index> dims;
  for (const MomentumGrid &g : u.r_grids) dims.push_back(g.dim);
  for (const MomentumGrid &g : u.s_grids) dims.push_back(g.dim);
  return StateVector(std::move(amps), std::move(dims));
}

/// Relative state of C+S conditioned on the frame position x, embedded in the
/// full C (x) S tensor space.
inline StateVector frame_conditioned_state(const SpacetimeUniverse &u,
                                           const std::vector<double> &x) {
  if (x.size() != u.s_grids.size())
    throw std::invalid_argument("frame_conditioned_state: axis count mismatch");
  Index s_total = u.modes();
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(u.clock.dim() * s_total);
  for (Index mode = 0; mode < s_total; ++mode) {
    std::vector<double> p = u.momenta(mode);
    double phase = 0.0;
    for (std::size_t ax = 0; ax < x.size(); ++ax) phase -= p[ax] * x[ax] / u.clock.hbar;
    amps(u.clock_index[mode] * s_total + mode) = u.coeffs(mode) * std::polar(1.0, phase);
  }
  std::vector<Index> dims{u.clock.dim()};
  for (const MomentumGrid &g : u.s_grids) dims.push_back(g.dim);
  return StateVector(std::move(amps), std::move(dims));
}

/// Relative state of S conditioned on clock time t and frame position x.
inline StateVector joint_relative_state(const SpacetimeUniverse &u, double t,
                                        const std::vector<double> &x) {
  if (x.size() != u.s_grids.size())
    throw std::invalid_argument("joint_relative_state: axis count mismatch");
  Eigen::VectorXcd amps(u.modes());
  for (Index mode = 0; mode < u.modes(); ++mode) {
    std::vector<double> p = u.momenta(mode);
    double phase = -u.eps[mode] * t / u.clock.hbar;
    for (std::size_t ax = 0; ax < x.size(); ++ax) phase -= p[ax] * x[ax] / u.clock.hbar;
    amps(mode) = u.coeffs(mode) * std::polar(1.0, phase);
  }
  std::vector<Index> dims;
  for (const MomentumGrid &g : u.s_grids) dims.push_back(g.dim);
  return StateVector(std::move(amps), std::move(dims));
}

/// P(y on S | x on R, t on C): (1 / prod L_S) |sum c_k e^{-i eps_k t}
/// e^{i p_k . (y - x)}|^2, or the (1 / prod D_S) discrete form.
inline double joint_conditional_probability(const SpacetimeUniverse &u, double t,
                                            const std::vector<double> &x,
                                            const std::vector<double> &y,
                                            bool discrete = false,
                                            const std::vector<Index> *family_s = nullptr) {
  if (x.size() != u.s_grids.size() || y.size() != u.s_grids.size())
    throw std::invalid_argument("joint_conditional_probability: axis count mismatch");
  cxd amp = 0.0;
  for (Index mode = 0; mode < u.modes(); ++mode) {
    std::vector<double> p = u.momenta(mode);
    double phase = -u.eps[mode] * t / u.clock.hbar;
    for (std::size_t ax = 0; ax < x.size(); ++ax)
      phase += p[ax] * (y[ax] - x[ax]) / u.clock.hbar;
    amp += u.coeffs(mode) * std::polar(1.0, phase);
  }
  double w = 1.0;
  for (std::size_t ax = 0; ax < u.s_grids.size(); ++ax) {
    if (discrete) {
      Index D = family_s ? (*family_s)[ax] : u.s_grids[ax].dim;
      detail::require_on_grid(y[ax], 0.0, u.s_grids[ax].length / static_cast<double>(D), "y");
      w *= static_cast<double>(D);
    } else {
      w *= u.s_grids[ax].length;
    }
  }
  return std::norm(amp) / w;
}

/// Klein-Gordon residual eps_k^2 - |p_k|^2 - m^2 of one plane-wave mode.
inline double dispersion_residual(const SpacetimeUniverse &u, Index mode) {
  if (!u.relativistic)
    throw std::invalid_argument("dispersion_residual: universe was not built with a "
                                "relativistic dispersion");
  if (mode < 0 || mode >= u.modes())
    throw std::invalid_argument("dispersion_residual: mode out of range");
  double p2 = 0.0;
  for (double pk : u.momenta(mode)) p2 += pk * pk;
  double m = u.relativistic->mass;
  return u.eps[mode] * u.eps[mode] - p2 - m * m;
}

} // namespace pawlab::spacetime
