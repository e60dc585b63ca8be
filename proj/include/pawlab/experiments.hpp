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
#include "pawlab/gravity.hpp"
#include "pawlab/multitime.hpp"
#include "pawlab/paw.hpp"
#include "pawlab/spacetime.hpp"
#include "pawlab/typicality.hpp"
#include "pawlab/version.hpp"
#include "pawlab/wootters.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace pawlab::cli {

enum class ExitCode : int {
  ok = 0,
  config_error = 2,
  unknown_experiment = 3,
  contract_violation = 4,
  io_error = 5,
};

/// A numeric invariant an experiment promised did not hold at run time.
struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Format { csv, json };

struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 1;
  std::string output_path; // empty writes to stdout
  Format format = Format::csv;
};

struct Column {
  std::string name;
  std::string description;
  std::string unit;
};

/// All cells are pre-formatted strings so CSV and JSON mirror each other
/// byte for byte run after run.
struct Table {
  std::vector<Column> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
      throw std::logic_error("Table: cell count mismatch");
    rows.push_back(std::move(cells));
  }
};

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt(Index v) { return std::to_string(v); }

namespace detail {

inline double to_double(const std::string &key, const std::string &value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception &) {
    throw ConfigError("parameter '" + key + "': expected a number, got '" + value + "'");
  }
}

inline Index to_index(const std::string &key, const std::string &value) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return static_cast<Index>(v);
  } catch (const std::exception &) {
    throw ConfigError("parameter '" + key + "': expected an integer, got '" + value + "'");
  }
}

inline std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string &s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

/// Typed access with unknown-key rejection: every experiment declares its
/// full key set up front.
class Params {
 public:
  Params(const std::map<std::string, std::string> &kv, std::vector<std::string> known)
      : kv_(kv), known_(std::move(known)) {
    for (const auto &[key, value] : kv_) {
      (void)value;
      if (std::find(known_.begin(), known_.end(), key) == known_.end())
        throw ConfigError("unknown parameter '" + key + "'");
    }
  }

  bool has(const std::string &key) const { return kv_.count(key) > 0; }

  std::string str(const std::string &key, const std::string &def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
  }

  double num(const std::string &key, double def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : to_double(key, it->second);
  }

  Index idx(const std::string &key, Index def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : to_index(key, it->second);
  }

 private:
  const std::map<std::string, std::string> &kv_;
  std::vector<std::string> known_;
};

inline std::vector<clockwork::Rational> parse_ratios(const std::string &key,
                                                     const std::string &text_raw) {
  std::string text = trim(text_raw);
  if (text.size() >= 2 && text.front() == '[' && text.back() == ']')
    text = text.substr(1, text.size() - 2);
  std::vector<clockwork::Rational> out;
  for (const std::string &piece_raw : split(text, ',')) {
    std::string piece = trim(piece_raw);
    if (piece.empty()) continue;
    auto frac = split(piece, '/');
    try {
      if (frac.size() == 1) {
        out.push_back({std::stoll(frac[0]), 1});
      } else if (frac.size() == 2) {
        out.push_back({std::stoll(frac[0]), std::stoll(frac[1])});
      } else {
        throw std::invalid_argument(piece);
      }
    } catch (const std::exception &) {
      throw ConfigError("parameter '" + key + "': bad fraction '" + piece + "'");
    }
  }
  if (out.empty()) throw ConfigError("parameter '" + key + "': no entries");
  return out;
}

inline std::vector<double> parse_numbers(const std::string &key, const std::string &text) {
  std::vector<double> out;
  for (const std::string &piece : split(text, ','))
    if (!trim(piece).empty()) out.push_back(to_double(key, trim(piece)));
  if (out.empty()) throw ConfigError("parameter '" + key + "': no entries");
  return out;
}

inline Index thread_budget() {
  if (const char *env = std::getenv("PAWLAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<Index>(v);
  }
  return 1;
}

/// Deterministic parallel map: results land in input order regardless of the
/// thread count.
template <typename Fn>
inline std::vector<double> parallel_map(Index n, Fn fn) {
  std::vector<double> out(n);
  Index threads = std::min<Index>(thread_budget(), n);
  if (threads <= 1) {
    for (Index i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  for (Index w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (Index i = w; i < n; i += threads) out[i] = fn(i);
    });
  for (std::thread &th : pool) th.join();
  return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Experiment implementations
// ---------------------------------------------------------------------------

namespace experiments {

/// Resolution-of-identity defect sweep for a rational-ratio spectrum.
inline Table clock_identity(const ExperimentConfig &cfg) {
  detail::Params p(cfg.params, {"ratios", "d", "D", "Dmax", "t0", "E0", "grid"});
  auto ratios = detail::parse_ratios("ratios", p.str("ratios", "1/1,2/1"));
  clockwork::ClockSpectrum spec = clockwork::build_spectrum(p.num("E0", 0.0), ratios);
  if (p.has("d") && p.idx("d", 0) != spec.dim())
    throw ConfigError("clock-identity: d disagrees with the ratio count");
  Index d_min = p.idx("D", spec.max_label() + 1);
  Index d_max = p.idx("Dmax", d_min);
  double t0 = p.num("t0", 0.0);
  Index grid = p.idx("grid", 1024);

  Table t;
  t.columns = {
      {"d", "number of spectrum levels", "count"},
      {"r_max", "largest integer label of the spectrum", "count"},
      {"D", "number of POVM time states over one period", "count"},
      {"defect", "max-abs entry of (d/D) sum_m |a_m><a_m| - 1", "dimensionless"},
      {"continuous_defect", "same defect for the continuous kets on the quadrature grid",
       "dimensionless"},
  };
  for (Index D = d_min; D <= d_max; ++D) {
    double defect = clockwork::identity_defect(clockwork::complement_family(spec, D, t0));
    double cont = clockwork::continuous_identity_defect(spec, grid, t0);
    t.add_row({fmt(spec.dim()), fmt(static_cast<Index>(spec.max_label())), fmt(D), fmt(defect),
               fmt(cont)});
  }
  return t;
}

/// Schrodinger residual trace of a random constrained universe.
inline Table paw_evolve(const ExperimentConfig &cfg) {
  detail::Params p(cfg.params, {"ds", "dc", "povm", "n_times", "T"});
  const Index ds = p.idx("ds", 3);
  const Index dc = p.idx("dc", 16);
  const bool povm = p.idx("povm", 0) != 0;
  const Index n_times = p.idx("n_times", 100);
  const double T = p.num("T", clockwork::two_pi);
  if (ds < 1 || dc <= ds) throw ConfigError("paw-evolve: require ds >= 1 and dc > ds");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> levels;
  long long nu = 0;
  for (Index k = 0; k < ds; ++k) {
    levels.push_back(static_cast<double>(nu) * clockwork::two_pi / T);
    nu += 1 + (povm ? static_cast<long long>(rng() % 3) : 0);
    if (povm && k + 2 == ds) nu += dc; // keep label gaps open
  }
  Eigen::MatrixXcd basis(ds, ds);
  {
    Eigen::MatrixXcd a(ds, ds);
    for (Index i = 0; i < ds; ++i)
      for (Index j = 0; j < ds; ++j) a(i, j) = cxd(nd(rng), nd(rng));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint().eval()));
    basis = es.eigenvectors();
  }
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(ds, ds);
  for (Index k = 0; k < ds; ++k) h += levels[k] * basis.col(k) * basis.col(k).adjoint();
  h = 0.5 * (h + h.adjoint().eval());
  Eigen::VectorXcd c(ds);
  for (Index k = 0; k < ds; ++k) c(k) = cxd(nd(rng), nd(rng));
  c.normalize();

  paw::ConstrainedUniverse u =
      paw::build_universe(Operator(h, {ds}), c, paw::ClockBudget{dc, T});
  double resid = paw::constraint_residual(u);
  if (resid > 1e-10)
    throw ContractViolation("paw-evolve: constraint residual " + fmt(resid));

  Table t;
  t.columns = {
      {"t", "clock reading", "s"},
      {"schrodinger_residual", "|phi(t) - U_S(t) phi(0)|", "dimensionless"},
      {"norm_error", "| |phi(t)| - 1 |", "dimensionless"},
      {"constraint_residual", "|(H_C + H_S) Psi|", "energy"},
  };
  for (Index j = 0; j < n_times; ++j) {
    double time = static_cast<double>(j) * T / static_cast<double>(n_times);
    double r = paw::verify_schrodinger(u, 0.0, time);
    if (r > 1e-10) throw ContractViolation("paw-evolve: Schrodinger residual " + fmt(r));
    double norm_err = std::abs(paw::relative_state(u, time).state.norm() - 1.0);
    t.add_row({fmt(time), fmt(r), fmt(norm_err), fmt(resid)});
  }
  return t;
}

/// Transverse-spin agreement of the two-spin universe versus spin size.
inline Table wootters_spins(const ExperimentConfig &cfg) {
  detail::Params p(cfg.params, {"s_max"});
  const Index two_s_max = static_cast<Index>(std::llround(2.0 * p.num("s_max", 20.0)));
  if (two_s_max < 1) throw ConfigError("wootters-spins: s_max must be at least 1/2");

  Table t;
  t.columns = {
      {"two_s", "twice the spin quantum number", "count"},
      {"dim", "levels per particle, 2s + 1", "count"},
      {"agreement", "P(top transverse outcome on 2 | top on 1)", "probability"},
      {"gap_to_bound", "agreement minus the asymptotic bound sqrt(3)/2", "probability"},
  };
  double prev = 2.0;
  for (Index two_s = 1; two_s <= two_s_max; ++two_s) {
    double s = 0.5 * static_cast<double>(two_s);
    double a = wootters::agreement(s);
    if (a > prev + 1e-12)
      throw ContractViolation("wootters-spins: agreement is not monotone at 2s = " + fmt(two_s));
    prev = a;
    t.add_row({fmt(two_s), fmt(two_s + 1), fmt(a), fmt(a - wootters::agreement_bound)});
  }
  return t;
}

/// GPPT and GLM two-time statistics against the direct propagator.
inline Table two_time(const ExperimentConfig &cfg) {
  detail::Params p(cfg.params, {"ds", "dc", "n"});
  const Index ds = p.idx("ds", 3);
  const Index dc = p.idx("dc", 12);
  const Index n = p.idx("n", 50);
  if (ds < 2 || ds > 4 || dc <= ds) throw ConfigError("two-time: require 2 <= ds <= 4 < dc");

  const double T = clockwork::two_pi;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto random_unitary = [&](Index d) {
    Eigen::MatrixXcd a(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) a(i, j) = cxd(nd(rng), nd(rng));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint().eval()));
    return Eigen::MatrixXcd(es.eigenvectors());
  };

  Eigen::MatrixXcd v = random_unitary(ds);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(ds, ds);
  for (Index k = 0; k < ds; ++k)
    h += static_cast<double>(k) * v.col(k) * v.col(k).adjoint();
  h = 0.5 * (h + h.adjoint().eval());
  Eigen::VectorXcd c(ds);
  for (Index k = 0; k < ds; ++k) c(k) = cxd(nd(rng), nd(rng));
  c.normalize();
  paw::ConstrainedUniverse u =
      paw::build_universe(Operator(h, {ds}), c, paw::ClockBudget{dc, T});

  Table t;
  t.columns = {
      {"t1", "first measurement time", "s"},
      {"t2", "second measurement time", "s"},
      {"a", "first outcome index", "count"},
      {"b", "second outcome index", "count"},
      {"gppt", "external-time-averaged conditional probability", "probability"},
      {"glm", "memory-model conditional probability", "probability"},
      {"propagator", "|<b| U_S(t2 - t1) |a>|^2", "probability"},
      {"gppt_dev", "|gppt - propagator|", "probability"},
      {"glm_dev", "|glm - propagator|", "probability"},
  };
  for (Index rep = 0; rep < n; ++rep) {
    Index m1 = static_cast<Index>(rng() % (dc - 1));
    Index m2 = m1 + 1 + static_cast<Index>(rng() % (dc - m1 - 1));
    multitime::TwoTimeQuery q{static_cast<double>(m1) * T / dc,
                              static_cast<double>(m2) * T / dc, random_unitary(ds),
                              static_cast<Index>(rng() % ds), static_cast<Index>(rng() % ds)};
    double gppt = multitime::gppt_two_time(u, q);
    double glm = multitime::glm_two_time(u, q, multitime::MemoryLayout::pair(ds, ds));
    Operator us = unitary_from_hamiltonian(u.system_h, q.t2 - q.t1);
    double prop = std::norm(q.basis.col(q.second_outcome).dot(us.mat * q.basis.col(q.first_outcome)));
    if (std::abs(gppt - prop) > 1e-10 || std::abs(glm - prop) > 1e-10)
      throw ContractViolation("two-time: propagator deviation above 1e-10");
    t.add_row({fmt(q.t1), fmt(q.t2), fmt(q.first_outcome), fmt(q.second_outcome), fmt(gppt),
               fmt(glm), fmt(prop), fmt(std::abs(gppt - prop)), fmt(std::abs(glm - prop))});
  }
  return t;
}

/// Canonical-typicality trace distances, or the oscillator <X>(t) trace.
inline Table typicality_experiment(const ExperimentConfig &cfg) {
  detail::Params p(cfg.params,
                   {"table", "beta", "levels", "totals", "seeds", "delta", "mass", "omega",
                    "n0", "n1", "t_max", "n_t"});
  const std::string which = p.str("table", "tracedist");
  const double delta = p.num("delta", 0.25);

  if (which == "tracedist") {
    const double beta = p.num("beta", 1.0);
    auto levels = detail::parse_numbers("levels", p.str("levels", "0,1,2"));
    auto totals = detail::parse_numbers("totals", p.str("totals", "512,1024"));
    const Index seeds = p.idx("seeds", 50);

    Operator h = Operator(Eigen::VectorXcd::Zero(levels.size()).asDiagonal(),
                          {static_cast<Index>(levels.size())});
    for (std::size_t j = 0; j < levels.size(); ++j) h.mat(j, j) = levels[j];
    Spectrum eig = eigensystem(h);

    Table t;
    t.columns = {
        {"total_levels", "sum of environment levels over the shell windows", "count"},
        {"median_trace_dist", "median over seeds of (1/2)||rho_S - exp(-beta H_S)/Z||_1",
         "dimensionless"},
        {"mean_trace_dist", "mean over seeds of the same distance", "dimensionless"},
        {"median_beta_fit", "median fitted inverse temperature", "1/energy"},
    };
    for (double total : totals) {
      double wsum = 0.0;
      for (double e : levels) wsum += std::exp(-beta * e);
      std::vector<Index> sizes;
      for (double e : levels)
        sizes.push_back(std::max<Index>(
            1, static_cast<Index>(std::llround(total * std::exp(-beta * e) / wsum))));
      typicality::DesignedShell ds = typicality::design_shell(eig, sizes, delta);

      std::vector<double> dists(seeds), fits(seeds);
      std::vector<double> packed = detail::parallel_map(seeds, [&](Index i) {
        typicality::ShellSample s = typicality::sample_shell_state(
            h, ds.environment, ds.shell, cfg.seed + 7919 * static_cast<std::uint64_t>(i));
        fits[i] = typicality::beta_fit(s);
        return typicality::reduced_vs_canonical(s, beta).trace_dist;
      });
      dists = packed;
      std::sort(dists.begin(), dists.end());
      std::sort(fits.begin(), fits.end());
      double mean = 0.0;
      for (double v : dists) mean += v / static_cast<double>(seeds);
      double median = (seeds % 2 == 1) ? dists[seeds / 2]
                                       : 0.5 * (dists[seeds / 2 - 1] + dists[seeds / 2]);
      double fit_med = (seeds % 2 == 1) ? fits[seeds / 2]
                                        : 0.5 * (fits[seeds / 2 - 1] + fits[seeds / 2]);
      t.add_row({fmt(total), fmt(median), fmt(mean), fmt(fit_med)});
    }
    return t;
  }

  if (which == "xtrace") {
    const double mass = p.num("mass", 1.0);
    const double omega = p.num("omega", 1.0);
    const Index n0 = p.idx("n0", 40);
    const Index n1 = p.idx("n1", 25);
    const Index n_t = p.idx("n_t", 64);
    const double t_max = p.num("t_max", 0.01 / delta);

    Operator h(Eigen::Vector2cd(0.5 * omega, 1.5 * omega).asDiagonal(), {2});
    Spectrum eig = eigensystem(h);
    typicality::DesignedShell ds = typicality::design_shell(eig, {n0, n1}, delta);
    typicality::ShellSample s =
        typicality::sample_shell_state(h, ds.environment, ds.shell, cfg.seed);

    Eigen::MatrixXcd x(2, 2);
    x << 0.0, 1.0, 1.0, 0.0;
    x *= std::sqrt(1.0 / (2.0 * mass * omega));

    Table t;
    t.columns = {
        {"t", "clock reading", "s"},
        {"x_closed_form", "<X>(t) from the shell double sum", "length"},
        {"x_matrix_element", "<phi(t)| X |phi(t)> on the relative state", "length"},
        {"x_first_order", "short-time first-order form of <X>(t)", "length"},
        {"first_order_err", "|closed form - first order|", "length"},
    };
    for (Index j = 0; j < n_t; ++j) {
      double time = static_cast<double>(j) * t_max / static_cast<double>(std::max<Index>(1, n_t - 1));
      double closed = typicality::oscillator_x_expectation(s, mass, omega, time);
      typicality::RelativeDynamics d = typicality::relative_dynamics(s, time);
      double matel = (d.state.amps.dot(x * d.state.amps)).real();
      if (std::abs(closed - matel) > 1e-10)
        throw ContractViolation("typicality: <X> closed form disagrees with the matrix element");
      double first = typicality::oscillator_x_first_order(s, mass, omega, time);
      t.add_row({fmt(time), fmt(closed), fmt(matel), fmt(first), fmt(std::abs(closed - first))});
    }
    return t;
  }
  throw ConfigError("typicality: table must be 'tracedist' or 'xtrace'");
}

/// Probability surface of the three-mode free-particle spacetime universe.
inline Table spacetime_toy(const ExperimentConfig &cfg) {
  detail::Params p(cfg.params, {"c0", "c1", "c2", "L", "M", "m", "grid"});
  const double L = p.num("L", clockwork::two_pi);
  const double big_m = p.num("M", 2.0);
  const double small_m = p.num("m", 1.0);
  const Index grid = p.idx("grid", 64);
  double c0 = p.num("c0", 0.5);
  double c2 = p.num("c2", 0.5);
  double c1 = p.num("c1", std::sqrt(std::max(0.0, 1.0 - c0 * c0 - c2 * c2)));
  if (std::abs(c0 * c0 + c1 * c1 + c2 * c2 - 1.0) > 1e-9)
    throw ConfigError("spacetime-toy: coefficients must be normalized");

  spacetime::MomentumGrid g{-clockwork::two_pi / L, L, 3, 1.0};
  Eigen::Vector3cd c(c0, c1, c2);
  spacetime::SpacetimeUniverse su = spacetime::build_spacetime_universe(
      {g}, {g}, c, spacetime::FreeParticleDispersion{big_m, small_m});
  const double eps = su.eps[0];
  const double u_mom = clockwork::two_pi / L;

  Table t;
  t.columns = {
      {"t", "clock reading", "s"},
      {"dyx", "relative distance y - x", "m"},
      {"probability", "P(y | x, t) = |sum_k c_k e^{-i eps_k t} e^{i p_k (y-x)}|^2 / L", "1/m"},
      {"closed_form",
       "1/L + (2/L)(c0 c1 cos(eps t + u dyx) + c1 c2 cos(eps t - u dyx) + "
       "c0 c2 (1 - 2 sin^2(u dyx)))",
       "1/m"},
      {"abs_err", "|probability - closed_form|", "1/m"},
      {"norm_dev", "|integral over y of P(y | x, t) - 1| at this t", "dimensionless"},
  };
  const Index n_quad = 512;
  for (Index i = 0; i < grid; ++i) {
    double time = static_cast<double>(i) * su.clock.period / static_cast<double>(grid);
    double total = 0.0;
    for (Index j = 0; j < n_quad; ++j)
      total += spacetime::joint_conditional_probability(
                   su, time, {0.0}, {static_cast<double>(j) * L / n_quad}) *
               L / n_quad;
    double norm_dev = std::abs(total - 1.0);
    if (norm_dev > 1e-10)
      throw ContractViolation("spacetime-toy: normalization defect " + fmt(norm_dev));
    for (Index j = 0; j < grid; ++j) {
      double dyx = static_cast<double>(j) * L / static_cast<double>(grid);
      double prob = spacetime::joint_conditional_probability(su, time, {0.0}, {dyx});
      double closed = 1.0 / L +
                      2.0 / L * (c0 * c1 * std::cos(eps * time + u_mom * dyx) +
                                 c1 * c2 * std::cos(eps * time - u_mom * dyx) +
                                 c0 * c2 * (1.0 - 2.0 * std::pow(std::sin(u_mom * dyx), 2)));
      t.add_row({fmt(time), fmt(dyx), fmt(prob), fmt(closed), fmt(std::abs(prob - closed)),
                 fmt(norm_dev)});
    }
  }
  return t;
}

/// Tick ratios and redshift, or the conditional clock statistics.
inline Table gravity_experiment(const ExperimentConfig &cfg) {
  detail::Params p(cfg.params, {"table", "depth", "hfrac", "mode", "d", "model", "T"});
  gravity::ClockPairConfig gc;
  gc.levels = p.idx("d", 2);
  gc.period = p.num("T", clockwork::two_pi);
  gc.gm = p.num("depth", 1e-6); // with x = c = 1, depth = GM / (x c^2)
  gc.radius = 1.0;
  gc.light_speed = 1.0;
  std::string model = p.str("model", "newtonian");
  if (model == "newtonian") {
    gc.model = gravity::PotentialModel::newtonian;
  } else if (model == "relativistic") {
    gc.model = gravity::PotentialModel::relativistic;
  } else {
    throw ConfigError("gravity: model must be 'newtonian' or 'relativistic'");
  }
  std::string mode = p.str("mode", p.has("hfrac") ? "finite" : "far");
  if (mode == "far") {
    gc.separation = std::numeric_limits<double>::infinity();
  } else if (mode == "finite") {
    gc.separation = p.num("hfrac", 1e-3) * gc.radius;
  } else {
    throw ConfigError("gravity: mode must be 'far' or 'finite'");
  }

  const std::string which = p.str("table", "dilation");
  if (which == "dilation") {
    gravity::DilationReport rep = gravity::tick_ratio(gc);
    Table t;
    t.columns = {
        {"model", "0 newtonian, 1 relativistic", "enum"},
        {"depth", "GM / (x c^2)", "dimensionless"},
        {"h_over_x", "clock separation over radius (inf for a far clock A)", "dimensionless"},
        {"factor_a", "frequency factor of clock A", "dimensionless"},
        {"factor_b", "frequency factor of clock B", "dimensionless"},
        {"tick_ratio", "m'/m'' = factor_b / factor_a, exact", "dimensionless"},
        {"first_order_ratio", "1 - GM h / (x (x+h) c^2)", "dimensionless"},
        {"uniform_field_ratio", "1 - a h / c^2 with a = GM / x^2", "dimensionless"},
        {"redshift_exact", "(1/T' - 1/T'') / (1/T) = factor_b - factor_a", "dimensionless"},
        {"redshift_first_order", "-a h / c^2", "dimensionless"},
    };
    double rs_exact = 0.0, rs_first = 0.0;
    if (!std::isinf(gc.separation)) {
      gravity::RedshiftReport rr = gravity::redshift(gc);
      rs_exact = rr.exact;
      rs_first = rr.first_order;
    }
    t.add_row({fmt(static_cast<Index>(gc.model == gravity::PotentialModel::relativistic)),
               fmt(gc.gm), fmt(gc.separation / gc.radius), fmt(rep.factor_a), fmt(rep.factor_b),
               fmt(rep.tick_ratio), fmt(rep.first_order_ratio), fmt(rep.uniform_field_ratio),
               fmt(rs_exact), fmt(rs_first)});
    return t;
  }
  if (which == "stats") {
    Table t;
    t.columns = {
        {"kind", "0 discrete, 1 continuous", "enum"},
        {"given", "conditioning reading: m (discrete) or f (continuous)", "index-or-fraction"},
        {"outcome", "queried reading: l (discrete) or g (continuous)", "index-or-fraction"},
        {"prob", "P(theta | tau), probability or density in theta", "mixed"},
        {"mean_theta", "<theta>(tau)", "s"},
    };
    double total_check = 0.0;
    for (Index m = 0; m < gc.levels; ++m)
      for (Index l = 0; l < gc.levels; ++l) {
        gravity::ClockStats st = gravity::clock_conditional_stats(gc, gravity::DiscreteQuery{l, m});
        if (m == 0) total_check += st.prob;
        t.add_row({fmt(Index{0}), fmt(m), fmt(l), fmt(st.prob), fmt(st.mean_theta)});
      }
    if (std::abs(total_check - 1.0) > 1e-10)
      throw ContractViolation("gravity: discrete statistics do not normalize");
    for (double f : {0.0, 0.25, 0.5, 0.75}) {
      gravity::ClockStats st = gravity::clock_conditional_stats(gc, gravity::ContinuousQuery{f, f});
      t.add_row({fmt(Index{1}), fmt(f), fmt(f), fmt(st.prob), fmt(st.mean_theta)});
    }
    return t;
  }
  throw ConfigError("gravity: table must be 'dilation' or 'stats'");
}

} // namespace experiments

// ---------------------------------------------------------------------------
// Registry, serialization, entry point
// ---------------------------------------------------------------------------

struct ExperimentEntry {
  std::string description;
  std::function<Table(const ExperimentConfig &)> run;
};

inline const std::map<std::string, ExperimentEntry> &registry() {
  static const std::map<std::string, ExperimentEntry> reg = {
      {"clock-identity",
       {"identity-resolution defect sweep of a POVM time family", experiments::clock_identity}},
      {"paw-evolve",
       {"Schrodinger residual trace of a constrained universe", experiments::paw_evolve}},
      {"wootters-spins",
       {"two-spin transverse agreement versus spin size", experiments::wootters_spins}},
      {"two-time",
       {"GPPT and GLM two-time statistics versus the propagator", experiments::two_time}},
      {"typicality",
       {"canonical trace distances and the oscillator position trace",
        experiments::typicality_experiment}},
      {"spacetime-toy",
       {"probability surface of the three-mode spacetime universe",
        experiments::spacetime_toy}},
      {"gravity",
       {"gravitational tick ratios, redshift and clock statistics",
        experiments::gravity_experiment}},
  };
  return reg;
}

inline std::string render_csv(const ExperimentConfig &cfg, const Table &t) {
  std::ostringstream out;
  out << "# pawlab " << version << "\n";
  out << "# experiment = " << cfg.experiment << "\n";
  out << "# seed = " << cfg.seed << "\n";
  for (const auto &[k, v] : cfg.params) out << "# param " << k << " = " << v << "\n";
  for (const Column &c : t.columns)
    out << "# column " << c.name << ": " << c.description << " [" << c.unit << "]\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    out << t.columns[i].name << (i + 1 < t.columns.size() ? "," : "\n");
  for (const auto &row : t.rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
  return out.str();
}

inline std::string render_json(const ExperimentConfig &cfg, const Table &t) {
  nlohmann::ordered_json j;
  j["library"] = "pawlab";
  j["version"] = version;
  j["experiment"] = cfg.experiment;
  j["seed"] = cfg.seed;
  j["params"] = nlohmann::ordered_json::object();
  for (const auto &[k, v] : cfg.params) j["params"][k] = v;
  j["columns"] = nlohmann::ordered_json::array();
  for (const Column &c : t.columns)
    j["columns"].push_back({{"name", c.name}, {"description", c.description}, {"unit", c.unit}});
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto &row : t.rows) j["rows"].push_back(row);
  return j.dump(2) + "\n";
}

inline std::string render(const ExperimentConfig &cfg, const Table &t) {
  return cfg.format == Format::csv ? render_csv(cfg, t) : render_json(cfg, t);
}

/// Runs one experiment and renders its output; throws on config/contract
/// problems, which `run` and `main` translate into exit codes.
inline std::string run_to_string(const ExperimentConfig &cfg) {
  auto it = registry().find(cfg.experiment);
  if (it == registry().end())
    throw std::out_of_range("unknown experiment '" + cfg.experiment + "'");
  Table t = it->second.run(cfg);
  return render(cfg, t);
}

inline ExitCode run(const ExperimentConfig &cfg, std::ostream &err = std::cerr) {
  std::string rendered;
  try {
    rendered = run_to_string(cfg);
  } catch (const std::out_of_range &e) {
    err << "pawlab: " << e.what() << "\n";
    return ExitCode::unknown_experiment;
  } catch (const ContractViolation &e) {
    err << "pawlab: contract violation: " << e.what() << "\n";
    return ExitCode::contract_violation;
  } catch (const ConfigError &e) {
    err << "pawlab: " << e.what() << "\n";
    return ExitCode::config_error;
  } catch (const std::exception &e) {
    err << "pawlab: " << e.what() << "\n";
    return ExitCode::config_error;
  }
  if (cfg.output_path.empty()) {
    std::cout << rendered;
    return ExitCode::ok;
  }
  std::ofstream out(cfg.output_path, std::ios::binary);
  if (!out) {
    err << "pawlab: cannot open '" << cfg.output_path << "'\n";
    return ExitCode::io_error;
  }
  out << rendered;
  if (!out) {
    err << "pawlab: write failed for '" << cfg.output_path << "'\n";
    return ExitCode::io_error;
  }
  return ExitCode::ok;
}

/// Keyed-text config file: top-level `key = value` lines for experiment,
/// seed, out and format, plus one [params] section for experiment parameters.
inline void load_config_file(const std::string &path, ExperimentConfig &cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::string line, section;
  while (std::getline(in, line)) {
    std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') {
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section != "params") throw ConfigError("unknown config section '" + section + "'");
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("bad config line '" + s + "'");
    std::string key = detail::trim(s.substr(0, eq));
    std::string value = detail::trim(s.substr(eq + 1));
    if (section == "params") {
      cfg.params[key] = value;
    } else if (key == "experiment") {
      cfg.experiment = value;
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(detail::to_index("seed", value));
    } else if (key == "out") {
      cfg.output_path = value;
    } else if (key == "format") {
      if (value == "csv") cfg.format = Format::csv;
      else if (value == "json") cfg.format = Format::json;
      else throw ConfigError("format must be 'csv' or 'json'");
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

inline int usage(std::ostream &out) {
  out << "usage: pawlab run <experiment> [--config FILE] [--seed N] [--out PATH]\n"
         "              [--format csv|json] [key=value ...]\n\nexperiments:\n";
  for (const auto &[name, entry] : registry())
    out << "  " << name << "  -  " << entry.description << "\n";
  return static_cast<int>(ExitCode::config_error);
}

inline int main(const std::vector<std::string> &args, std::ostream &err = std::cerr) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h") return usage(err);
  if (args[0] != "run") {
    err << "pawlab: unknown command '" << args[0] << "'\n";
    return usage(err);
  }
  if (args.size() < 2) return usage(err);

  ExperimentConfig cfg;
  cfg.experiment = args[1];
  try {
    // File first, then flags and key=value pairs override.
    for (std::size_t i = 2; i < args.size(); ++i)
      if (args[i] == "--config" && i + 1 < args.size()) load_config_file(args[i + 1], cfg);
    for (std::size_t i = 2; i < args.size(); ++i) {
      const std::string &a = args[i];
      if (a == "--config") {
        ++i;
      } else if (a == "--seed" && i + 1 < args.size()) {
        cfg.seed = static_cast<std::uint64_t>(detail::to_index("seed", args[++i]));
      } else if (a == "--out" && i + 1 < args.size()) {
        cfg.output_path = args[++i];
      } else if (a == "--format" && i + 1 < args.size()) {
        std::string f = args[++i];
        if (f == "csv") cfg.format = Format::csv;
        else if (f == "json") cfg.format = Format::json;
        else throw ConfigError("format must be 'csv' or 'json'");
      } else if (a.find('=') != std::string::npos) {
        auto eq = a.find('=');
        cfg.params[detail::trim(a.substr(0, eq))] = detail::trim(a.substr(eq + 1));
      } else {
        throw ConfigError("unexpected argument '" + a + "'");
      }
    }
  } catch (const ConfigError &e) {
    err << "pawlab: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config_error);
  }
  return static_cast<int>(run(cfg, err));
}

} // namespace pawlab::cli
