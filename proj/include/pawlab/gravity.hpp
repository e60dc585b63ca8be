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

#include <limits>
#include <numbers>

namespace pawlab::gravity {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class PotentialModel { newtonian, relativistic };

/// Two identical d-level clocks read against a far-away reference: B at radius
/// x from the central mass, A at radius x + h (h may be infinite).
struct ClockPairConfig {
  Index levels = 2;                                      // d
  double period = two_pi;                                // free period T (s)
  double gm = 0.0;                                       // GM (m^3 s^-2)
  double radius = 1.0;                                   // x (m)
  double separation = std::numeric_limits<double>::infinity(); // h (m)
  double light_speed = 1.0;                              // c (m/s)
  PotentialModel model = PotentialModel::newtonian;
  bool include_static_mass = false; // adds only a global phase; self-tested
  double static_mass = 0.0;
};

/// Frequency scaling of a clock at radius x: 1 - GM/(x c^2) for the Newtonian
/// potential, sqrt(1 - 2GM/(x c^2)) for the relativistic one. x = infinity
/// gives 1 in both models.
inline double dilation_factor(PotentialModel model, double gm, double x, double c) {
  if (std::isinf(x)) return 1.0;
  if (!(x > 0.0)) throw std::invalid_argument("dilation_factor: radius must be positive");
  double depth = gm / (x * c * c);
  if (model == PotentialModel::newtonian) return 1.0 - depth;
  if (2.0 * depth >= 1.0)
    throw std::invalid_argument("dilation_factor: inside the horizon (2GM/xc^2 >= 1)");
  return std::sqrt(1.0 - 2.0 * depth);
}

/// Dilated period carried as (base, factor): T' = base / factor. Keeping the
/// factor symbolic avoids catastrophic cancellation at tiny depths.
struct DilatedPeriod {
  double base = two_pi;
  double factor = 1.0;
  double period() const { return base / factor; }
};

inline double factor_a(const ClockPairConfig &cfg) {
  return dilation_factor(cfg.model, cfg.gm, cfg.radius + cfg.separation, cfg.light_speed);
}

inline double factor_b(const ClockPairConfig &cfg) {
  return dilation_factor(cfg.model, cfg.gm, cfg.radius, cfg.light_speed);
}

struct ClockPairState {
  StateVector state_a, state_b;
};

/// Both clocks start in their zeroth time state; each advances with its own
/// dilated frequency, phase(k) = 2 pi k t factor / T.
inline ClockPairState evolve_clock_pair(const ClockPairConfig &cfg, double t) {
  if (cfg.levels < 2) throw std::invalid_argument("evolve_clock_pair: at least two levels");
  const Index d = cfg.levels;
  const double fa = factor_a(cfg), fb = factor_b(cfg);
  double global_a = 0.0, global_b = 0.0;
  if (cfg.include_static_mass) {
    // m_static c^2 (1 + phi/c^2) t: identical on every level, hence invisible
    // in any probability.
    double c2 = cfg.light_speed * cfg.light_speed;
    global_a = -cfg.static_mass * c2 * fa * t;
    global_b = -cfg.static_mass * c2 * fb * t;
  }
  Eigen::VectorXcd a(d), b(d);
  const double inv = 1.0 / std::sqrt(static_cast<double>(d));
  for (Index k = 0; k < d; ++k) {
    double kk = static_cast<double>(k);
    a(k) = std::polar(inv, -two_pi * kk * t * fa / cfg.period + global_a);
    b(k) = std::polar(inv, -two_pi * kk * t * fb / cfg.period + global_b);
  }
  return ClockPairState{StateVector(std::move(a), {d}), StateVector(std::move(b), {d})};
}

/// Fractional tick index alpha of a clock state (1/sqrt(d)) sum_k
/// e^{-2 pi i k alpha / d} |k>, recovered from the nearest-neighbour phase.
inline double tick_index(const StateVector &state) {
  if (state.size() < 2) throw std::invalid_argument("tick_index: clock too small");
  double step = -std::arg(state.amps(1) * std::conj(state.amps(0)));
  return step * static_cast<double>(state.size()) / two_pi;
}

struct DilationReport {
  double factor_a = 1.0;
  double factor_b = 1.0;
  double tick_ratio = 1.0;          // m' / m'' = factor_b / factor_a, exact
  double first_order_ratio = 1.0;   // 1 - GM h / (x (x+h) c^2)
  double uniform_field_ratio = 1.0; // 1 - a h / c^2 with a = GM / x^2
  PotentialModel regime = PotentialModel::newtonian;
};

inline DilationReport tick_ratio(const ClockPairConfig &cfg) {
  DilationReport rep;
  rep.factor_a = factor_a(cfg);
  rep.factor_b = factor_b(cfg);
  rep.tick_ratio = rep.factor_b / rep.factor_a;
  rep.regime = cfg.model;
  const double c2 = cfg.light_speed * cfg.light_speed;
  const double x = cfg.radius, h = cfg.separation;
  if (std::isinf(h)) {
    rep.first_order_ratio = 1.0 - cfg.gm / (x * c2);
    rep.uniform_field_ratio = rep.first_order_ratio;
  } else {
    rep.first_order_ratio = 1.0 - cfg.gm * h / (x * (x + h) * c2);
    rep.uniform_field_ratio = 1.0 - (cfg.gm / (x * x)) * h / c2;
  }
  return rep;
}

struct RedshiftReport {
  double exact = 0.0;       // (1/T' - 1/T'') / (1/T) = factor_b - factor_a
  double first_order = 0.0; // -a h / c^2
};

/// Fractional frequency shift seen by A for a signal emitted at B, with the
/// free-clock level spacing as the reference frequency.
inline RedshiftReport redshift(const ClockPairConfig &cfg) {
  if (std::isinf(cfg.separation))
    throw std::invalid_argument("redshift: finite separation required");
  RedshiftReport rep;
  rep.exact = factor_b(cfg) - factor_a(cfg);
  rep.first_order = -(cfg.gm / (cfg.radius * cfg.radius)) * cfg.separation /
                    (cfg.light_speed * cfg.light_speed);
  return rep;
}

struct DiscreteQuery {
  Index outcome = 0; // l on clock B
  Index given = 0;   // m on clock A
};

struct ContinuousQuery {
  double outcome = 0.0; // g in [0, 1), theta = g T'
  double given = 0.0;   // f in [0, 1), tau = f T''
};

struct ClockStats {
  double prob = 0.0;       // P(theta_l | tau_m), or the density P(theta_g | tau_f)
  double mean_theta = 0.0; // <theta>(tau)
};

namespace detail {

/// |sum_{n=0}^{d-1} e^{-2 pi i n z / d}|^2 / d^2.
inline double dirichlet_weight(Index d, double z) {
  cxd acc = 0.0;
  for (Index n = 0; n < d; ++n)
    acc += std::polar(1.0, -two_pi * static_cast<double>(n) * z / static_cast<double>(d));
  return std::norm(acc) / static_cast<double>(d * d);
}

} // namespace detail

/// Conditional statistics of clock B given a reading of clock A, both defined
/// on the far-away reference. Discrete queries give probabilities over the d
/// outcomes; continuous queries give the density over theta in [0, T') and the
/// closed-form mean value.
inline ClockStats clock_conditional_stats(const ClockPairConfig &cfg, const DiscreteQuery &q) {
  const Index d = cfg.levels;
  if (q.outcome < 0 || q.outcome >= d || q.given < 0 || q.given >= d)
    throw std::invalid_argument("clock_conditional_stats: index out of range");
  const double ratio = factor_b(cfg) / factor_a(cfg);
  const double t_prime = cfg.period / factor_b(cfg);
  ClockStats out;
  out.prob = detail::dirichlet_weight(d, static_cast<double>(q.outcome) -
                                             static_cast<double>(q.given) * ratio);
  out.mean_theta = 0.0;
  for (Index l = 0; l < d; ++l)
    out.mean_theta += static_cast<double>(l) * t_prime / static_cast<double>(d) *
                      detail::dirichlet_weight(d, static_cast<double>(l) -
                                                      static_cast<double>(q.given) * ratio);
  return out;
}

inline ClockStats clock_conditional_stats(const ClockPairConfig &cfg, const ContinuousQuery &q) {
  const Index d = cfg.levels;
  const double ratio = factor_b(cfg) / factor_a(cfg);
  const double t_prime = cfg.period / factor_b(cfg);
  ClockStats out;
  // Density over theta: (1/(T' d)) |sum_n e^{-2 pi i n (g - f ratio)}|^2.
  cxd acc = 0.0;
  for (Index n = 0; n < d; ++n)
    acc += std::polar(1.0, -two_pi * static_cast<double>(n) * (q.outcome - q.given * ratio));
  out.prob = std::norm(acc) / (t_prime * static_cast<double>(d));
  // <theta>(tau) = T'/2 - (T'/(pi d)) sum_{nu=1}^{d-1} (d - nu) sin(2 pi f ratio nu) / nu.
  double mean = 0.5;
  for (Index nu = 1; nu < d; ++nu)
    mean -= static_cast<double>(d - nu) *
            std::sin(two_pi * q.given * ratio * static_cast<double>(nu)) /
            (std::numbers::pi * static_cast<double>(d) * static_cast<double>(nu));
  out.mean_theta = mean * t_prime;
  return out;
}

/// Quadrature cross-check of the continuous mean value.
inline double mean_theta_quadrature(const ClockPairConfig &cfg, double f, Index grid_n = 20000) {
  const double t_prime = cfg.period / factor_b(cfg);
  double acc = 0.0;
  for (Index j = 0; j < grid_n; ++j) {
    double g = (static_cast<double>(j) + 0.5) / static_cast<double>(grid_n);
    ClockStats st = clock_conditional_stats(cfg, ContinuousQuery{g, f});
    acc += g * t_prime * st.prob * (t_prime / static_cast<double>(grid_n));
  }
  return acc;
}

} // namespace pawlab::gravity
