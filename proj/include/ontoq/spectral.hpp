#pragma once

// Quantum spectra of limit cycles.
//
// A P-cycle of the recurrent permutation U (U|s> = |F(s)>) carries the
// eigenphases 2*pi*k/P, k = 0..P-1, and the energy E = h/(P*dt). Beables are
// operators diagonal in the state basis; in the Heisenberg picture
// A(t) = U^-t A U^t stays diagonal with entries a(F^t(s)).

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ontoq/csv.hpp"
#include "ontoq/permutation.hpp"

namespace ontoq {

enum class Sector { ket, bra };

inline const char* to_string(Sector s) { return s == Sector::ket ? "ket" : "bra"; }

inline Sector parse_sector(const std::string& s) {
  if (s == "ket" || s == "+") return Sector::ket;
  if (s == "bra" || s == "-") return Sector::bra;
  throw std::invalid_argument("unknown sector '" + s + "'");
}

// half_offset: H = (n + 1/2) E. integer: H = n E.
enum class LevelConvention { half_offset, integer };

inline double cycle_energy(std::uint64_t period, double h = 1.0, double dt = 1.0) {
  if (period == 0) throw std::invalid_argument("cycle_energy: period must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("cycle_energy: h must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("cycle_energy: dt must be positive");
  return h / (static_cast<double>(period) * dt);
}

struct EnergyLevel {
  double energy;  // E, the level spacing
  std::uint64_t n;
  double value;   // H eigenvalue, negated in the bra sector
  Sector sector;
};

inline std::vector<EnergyLevel> hamiltonian_levels(double energy, std::uint64_t n_max, Sector sector,
                                                   LevelConvention convention = LevelConvention::half_offset) {
  if (!(energy > 0.0)) throw std::invalid_argument("hamiltonian_levels: E must be positive");
  const double offset = convention == LevelConvention::half_offset ? 0.5 : 0.0;
  const double sign = sector == Sector::ket ? 1.0 : -1.0;
  std::vector<EnergyLevel> out;
  out.reserve(n_max + 1);
  for (std::uint64_t n = 0; n <= n_max; ++n) {
    out.push_back({energy, n, sign * (static_cast<double>(n) + offset) * energy, sector});
  }
  return out;
}

struct CyclePhases {
  std::size_t cycle_id;
  std::uint64_t period;
  std::vector<double> phases;  // radians per time step
};

struct EigenphaseSpectrum {
  std::vector<CyclePhases> cycles;

  std::size_t total() const noexcept {
    std::size_t n = 0;
    for (const auto& c : cycles) n += c.phases.size();
    return n;
  }
};

inline EigenphaseSpectrum evolution_eigenphases(const Permutation& perm) {
  EigenphaseSpectrum out;
  const auto& cycles = perm.cycles();
  out.cycles.reserve(cycles.size());
  for (std::size_t id = 0; id < cycles.size(); ++id) {
    const std::uint64_t p = cycles[id].size();
    CyclePhases c{id, p, {}};
    c.phases.reserve(p);
    for (std::uint64_t k = 0; k < p; ++k) c.phases.push_back(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(p));
    out.cycles.push_back(std::move(c));
  }
  return out;
}

// Eigenvector convention on a P-cycle with members |0>..|P-1> (U|j> = |j+1>):
//   |k> = P^-1/2 sum_j exp(-2 pi i j k / P) |j>,  U|k> = exp(2 pi i k / P) |k>.
// The ontological state |m> has coefficients c_k = P^-1/2 exp(2 pi i m k / P).
inline std::vector<std::complex<double>> cycle_position_coefficients(std::uint64_t period, std::uint64_t position) {
  if (period == 0) throw std::invalid_argument("cycle period must be positive");
  std::vector<std::complex<double>> c(period);
  const double norm = 1.0 / std::sqrt(static_cast<double>(period));
  for (std::uint64_t k = 0; k < period; ++k) {
    const double arg = 2.0 * std::numbers::pi * static_cast<double>((position % period) * k % period) / static_cast<double>(period);
    c[k] = std::polar(norm, arg);
  }
  return c;
}

// Where on a single cycle a combination of its eigenstates sits: the position
// whose ontological state has the largest overlap with it.
inline std::uint64_t locate_on_cycle(std::span<const std::complex<double>> coeffs) {
  const std::uint64_t p = coeffs.size();
  if (p == 0) throw std::invalid_argument("locate_on_cycle: empty coefficient vector");
  std::uint64_t best = 0;
  double best_overlap = -1.0;
  for (std::uint64_t m = 0; m < p; ++m) {
    std::complex<double> overlap{};
    for (std::uint64_t k = 0; k < p; ++k) {
      const double arg = -2.0 * std::numbers::pi * static_cast<double>(m * k % p) / static_cast<double>(p);
      overlap += std::polar(1.0, arg) * coeffs[k];
    }
    if (std::abs(overlap) > best_overlap) {
      best_overlap = std::abs(overlap);
      best = m;
    }
  }
  return best;
}

template <class T>
struct BeableOperator {
  std::vector<T> diagonal;

  std::size_t size() const noexcept { return diagonal.size(); }
};

// A(t) = U^-t A U^t for U the permutation operator.
template <class T>
BeableOperator<T> evolve_beable(const BeableOperator<T>& a, const Permutation& perm, std::int64_t t) {
  if (a.size() != perm.size()) throw std::invalid_argument("beable and permutation dimensions differ");
  BeableOperator<T> out{std::vector<T>(a.size())};
  for (std::size_t s = 0; s < a.size(); ++s) out.diagonal[s] = a.diagonal[perm.apply(s, t)];
  return out;
}

// Max-norm of [A(t1), B(t2)]. Both evolved operators are diagonal, so the
// commutator's (i, i) entry is a_i b_i - b_i a_i and off-diagonal entries vanish.
template <class T>
T beable_commutator_norm(const BeableOperator<T>& a, const BeableOperator<T>& b, const Permutation& perm,
                         std::int64_t t1, std::int64_t t2) {
  if (a.size() != b.size() || a.size() != perm.size()) {
    throw std::invalid_argument("beable_commutator_norm: dimension mismatch");
  }
  const auto at = evolve_beable(a, perm, t1);
  const auto bt = evolve_beable(b, perm, t2);
  T norm{};
  for (std::size_t i = 0; i < at.size(); ++i) {
    T c = at.diagonal[i] * bt.diagonal[i] - bt.diagonal[i] * at.diagonal[i];
    if (c < T{}) c = -c;
    if (norm < c) norm = c;
  }
  return norm;
}

// One row per (cycle, k): the eigenstate k of a P-cycle has phase 2 pi k / P per step
// and H = (k + offset) E, E = h / (P dt). Bra rows mirror the kets with negated H.
struct SpectrumRow {
  std::size_t cycle_id;
  std::uint64_t period;
  std::uint64_t k;
  double phase;
  double energy;
  std::uint64_t n;
  double value;
  Sector sector;
};

inline std::vector<SpectrumRow> spectrum_rows(const EigenphaseSpectrum& spec, double h, double dt,
                                              LevelConvention convention, bool include_bras) {
  std::vector<SpectrumRow> rows;
  for (const auto& c : spec.cycles) {
    const double e = cycle_energy(c.period, h, dt);
    const auto kets = hamiltonian_levels(e, c.period - 1, Sector::ket, convention);
    for (std::uint64_t k = 0; k < c.period; ++k) rows.push_back({c.cycle_id, c.period, k, c.phases[k], e, k, kets[k].value, Sector::ket});
    if (include_bras) {
      const auto bras = hamiltonian_levels(e, c.period - 1, Sector::bra, convention);
      for (std::uint64_t k = 0; k < c.period; ++k) rows.push_back({c.cycle_id, c.period, k, c.phases[k], e, k, bras[k].value, Sector::bra});
    }
  }
  return rows;
}

inline void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows) {
  os << "cycle_id,P,k,phase,E,n,H_value,sector\n";
  for (const auto& r : rows) {
    os << r.cycle_id << ',' << r.period << ',' << r.k << ',' << csv::fmt(r.phase) << ',' << csv::fmt(r.energy) << ','
       << r.n << ',' << csv::fmt(r.value) << ',' << to_string(r.sector) << '\n';
  }
}

inline std::vector<SpectrumRow> read_spectrum_csv(std::istream& is) {
  const auto t = csv::read(is);
  const auto c_id = t.column("cycle_id"), c_p = t.column("P"), c_k = t.column("k"), c_phase = t.column("phase"),
             c_e = t.column("E"), c_n = t.column("n"), c_h = t.column("H_value"), c_s = t.column("sector");
  std::vector<SpectrumRow> rows;
  rows.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    rows.push_back({csv::to_int<std::size_t>(r[c_id]), csv::to_int<std::uint64_t>(r[c_p]), csv::to_int<std::uint64_t>(r[c_k]),
                    csv::to_double(r[c_phase]), csv::to_double(r[c_e]), csv::to_int<std::uint64_t>(r[c_n]),
                    csv::to_double(r[c_h]), parse_sector(r[c_s])});
  }
  return rows;
}

}  // namespace ontoq
