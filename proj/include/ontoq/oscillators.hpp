#pragma once

// Composition of periodic systems: single-oscillator ladders, the odd-coprime
// series of two-oscillator ket states, equivalence-class phases, time-shift
// constraints, interaction spectra, the period composition law and the
// vacuum cycle period.
//
// Every ket state |n1, n2> belongs to exactly one series: with
// g = gcd(2 n1 + 1, 2 n2 + 1), p = (2 n1 + 1)/g and q = (2 n2 + 1)/g are odd
// coprime, n = (g - 1)/2, and
//   (n1 + 1/2) w1 + (n2 + 1/2) w2 = (n + 1/2)(p w1 + q w2).

#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ontoq/csv.hpp"
#include "ontoq/error.hpp"
#include "ontoq/rational.hpp"
#include "ontoq/spectral.hpp"

namespace ontoq {

struct PairState {
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;
  Sector sector = Sector::ket;

  friend bool operator==(const PairState&, const PairState&) = default;
};

class SeriesLabel {
 public:
  SeriesLabel(std::uint64_t p, std::uint64_t q, std::uint64_t n) : p_(p), q_(q), n_(n) {
    if (p == 0 || q == 0 || p % 2 == 0 || q % 2 == 0) {
      throw std::invalid_argument("series label needs positive odd p, q; got (" + std::to_string(p) + ", " +
                                  std::to_string(q) + ")");
    }
    if (std::gcd(p, q) != 1) {
      throw std::invalid_argument("series label needs coprime p, q; got (" + std::to_string(p) + ", " +
                                  std::to_string(q) + ")");
    }
  }

  std::uint64_t p() const noexcept { return p_; }
  std::uint64_t q() const noexcept { return q_; }
  std::uint64_t n() const noexcept { return n_; }

  friend bool operator==(const SeriesLabel&, const SeriesLabel&) = default;
  friend auto operator<=>(const SeriesLabel&, const SeriesLabel&) = default;

 private:
  std::uint64_t p_, q_, n_;
};

enum class LevelSign { ket, bra };

inline void require_positive(const Rational& w, const char* what) {
  if (w <= 0) throw std::invalid_argument(std::string(what) + " must be positive, got " + to_string(w));
}

// w n or w (n + 1/2) for n = 0..n_max, negated for bras.
inline std::vector<Rational> single_levels(const Rational& omega, std::uint64_t n_max,
                                           LevelConvention convention = LevelConvention::half_offset,
                                           Sector sector = Sector::ket) {
  require_positive(omega, "frequency");
  const Rational offset = convention == LevelConvention::half_offset ? Rational(1, 2) : Rational(0);
  std::vector<Rational> out;
  out.reserve(n_max + 1);
  for (std::uint64_t n = 0; n <= n_max; ++n) {
    Rational e = omega * (Rational(n) + offset);
    out.push_back(sector == Sector::ket ? e : -e);
  }
  return out;
}

inline SeriesLabel classify(const PairState& s) {
  if (s.n1 > (std::numeric_limits<std::uint64_t>::max() - 1) / 2 ||
      s.n2 > (std::numeric_limits<std::uint64_t>::max() - 1) / 2) {
    throw std::overflow_error("classify: quantum numbers too large");
  }
  const std::uint64_t a = 2 * s.n1 + 1;
  const std::uint64_t b = 2 * s.n2 + 1;
  const std::uint64_t g = std::gcd(a, b);
  return SeriesLabel(a / g, b / g, (g - 1) / 2);
}

inline PairState unclassify(const SeriesLabel& label, Sector sector = Sector::ket) {
  std::uint64_t odd = 0, a = 0, b = 0;
  if (__builtin_mul_overflow(label.n(), std::uint64_t{2}, &odd) || __builtin_add_overflow(odd, std::uint64_t{1}, &odd) ||
      __builtin_mul_overflow(label.p(), odd, &a) || __builtin_mul_overflow(label.q(), odd, &b)) {
    throw std::overflow_error("unclassify: quantum numbers too large");
  }
  return {(a - 1) / 2, (b - 1) / 2, sector};
}

inline Rational series_frequency(const SeriesLabel& label, const Rational& w1, const Rational& w2) {
  require_positive(w1, "w1");
  require_positive(w2, "w2");
  return Rational(label.p()) * w1 + Rational(label.q()) * w2;
}

inline Rational series_frequency(std::uint64_t p, std::uint64_t q, const Rational& w1, const Rational& w2) {
  return series_frequency(SeriesLabel(p, q, 0), w1, w2);
}

struct PairLevel {
  PairState state;
  SeriesLabel label;
  Rational energy;
};

// Ket quadrant 0 <= n1 <= n1_max, 0 <= n2 <= n2_max, ordered by (n1, n2).
// Each energy is evaluated from both sides of the series identity.
inline std::vector<PairLevel> pair_spectrum(const Rational& w1, const Rational& w2, std::uint64_t n1_max,
                                            std::uint64_t n2_max) {
  require_positive(w1, "w1");
  require_positive(w2, "w2");
  const Rational half(1, 2);
  std::vector<PairLevel> out;
  out.reserve((n1_max + 1) * (n2_max + 1));
  for (std::uint64_t n1 = 0; n1 <= n1_max; ++n1) {
    for (std::uint64_t n2 = 0; n2 <= n2_max; ++n2) {
      const PairState s{n1, n2, Sector::ket};
      const SeriesLabel label = classify(s);
      Rational direct = (Rational(n1) + half) * w1 + (Rational(n2) + half) * w2;
      const Rational series = (Rational(label.n()) + half) * series_frequency(label, w1, w2);
      if (direct != series) throw std::logic_error("series identity failed at (" + std::to_string(n1) + ", " + std::to_string(n2) + ")");
      out.push_back({s, label, std::move(direct)});
    }
  }
  return out;
}

// The bra quadrant: the same states with negated energies.
inline std::vector<PairLevel> bra_mirror(std::vector<PairLevel> kets) {
  for (auto& l : kets) {
    l.state.sector = Sector::bra;
    l.energy = -l.energy;
  }
  return kets;
}

inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r -= two_pi;
  return r;
}

// Distance on the circle between two angles.
inline double angle_distance(double a, double b) {
  const double d = wrap_angle(a - b);
  return std::min(d, 2.0 * std::numbers::pi - d);
}

// (p q1 + q q2) mod 2 pi: points with equal values form one (p, q) class.
inline double equivalence_phase(std::uint64_t p, std::uint64_t q, double q1, double q2) {
  return wrap_angle(static_cast<double>(p) * q1 + static_cast<double>(q) * q2);
}

// exp(i (n + 1/2)(p q1 + q q2 - w_pq t)), times exp(-i (q1 + q2)/2) when the vacuum term is kept.
inline std::complex<double> pair_wavefunction(const SeriesLabel& label, double q1, double q2, double t,
                                              const Rational& w1, const Rational& w2, bool include_vacuum_term = false) {
  const double w_pq = to_double(series_frequency(label, w1, w2));
  const double level = static_cast<double>(label.n()) + 0.5;
  double phase = level * (static_cast<double>(label.p()) * q1 + static_cast<double>(label.q()) * q2 - w_pq * t);
  if (include_vacuum_term) phase -= 0.5 * (q1 + q2);
  return std::polar(1.0, phase);
}

// sum_a E_a dt_a; zero iff the shifts stay inside one equivalence class.
template <class T>
T timeshift_residual(std::span<const T> energies, std::span<const T> shifts) {
  if (energies.size() != shifts.size()) throw std::invalid_argument("timeshift_residual: length mismatch");
  T acc{};
  for (std::size_t a = 0; a < energies.size(); ++a) acc += energies[a] * shifts[a];
  return acc;
}

// sum_a E_a t_a - (sum_a E_a) t.
template <class T>
T total_class_residual(std::span<const T> energies, std::span<const T> times, const T& t) {
  if (energies.size() != times.size()) throw std::invalid_argument("total_class_residual: length mismatch");
  T weighted{}, total{};
  for (std::size_t a = 0; a < energies.size(); ++a) {
    weighted += energies[a] * times[a];
    total += energies[a];
  }
  return weighted - total * t;
}

struct InteractionTable {
  std::vector<double> e1;
  std::vector<std::vector<double>> de;  // de[i][j]
  std::vector<double> e2;

  InteractionTable(std::vector<double> e1_, std::vector<double> e2_, std::vector<std::vector<double>> de_)
      : e1(std::move(e1_)), de(std::move(de_)), e2(std::move(e2_)) {
    for (double e : e1)
      if (!(e > 0.0)) throw std::invalid_argument("interaction table: E1 values must be positive");
    for (double e : e2)
      if (!(e > 0.0)) throw std::invalid_argument("interaction table: E2 values must be positive");
    if (de.size() != e1.size()) throw std::invalid_argument("interaction table: dE needs one row per E1 value");
    for (const auto& row : de) {
      if (row.size() != e2.size()) throw std::invalid_argument("interaction table: dE needs one column per E2 value");
      for (double v : row)
        if (!std::isfinite(v)) throw std::invalid_argument("interaction table: dE must be finite");
    }
  }

  // Zero corrections.
  InteractionTable(std::vector<double> e1_, std::vector<double> e2_)
      : InteractionTable(e1_, e2_, std::vector<std::vector<double>>(e1_.size(), std::vector<double>(e2_.size(), 0.0))) {}
};

struct InteractionLevel {
  std::size_t i, j;
  std::uint64_t n;
  double energy;
};

// (n + 1/2)(E1^i + E2^j + dE^ij) for every (i, j) and n = 0..n_max, ordered by (i, j, n).
inline std::vector<InteractionLevel> interacting_spectrum(const InteractionTable& table, std::uint64_t n_max) {
  std::vector<InteractionLevel> out;
  for (std::size_t i = 0; i < table.e1.size(); ++i) {
    for (std::size_t j = 0; j < table.e2.size(); ++j) {
      const double spacing = table.e1[i] + table.e2[j] + table.de[i][j];
      if (!(spacing > 0.0)) {
        throw spectral_positivity_error("corrected energy E1[" + std::to_string(i) + "] + E2[" + std::to_string(j) +
                                            "] + dE = " + csv::fmt(spacing) + " is not positive",
                                        i, j);
      }
      for (std::uint64_t n = 0; n <= n_max; ++n) out.push_back({i, j, n, (static_cast<double>(n) + 0.5) * spacing});
    }
  }
  return out;
}

// P1 P2 / (P1 + P2): frequencies of the parts add.
inline Rational compose_periods(const Rational& p1, const Rational& p2) {
  require_positive(p1, "period P1");
  require_positive(p2, "period P2");
  return p1 * p2 / (p1 + p2);
}

struct PhysicalConstants {
  double h = 6.62607015e-34;  // J s
  double G = 6.67430e-11;     // m^3 kg^-1 s^-2
  double c = 299792458.0;     // m / s
};

struct VacuumPeriod {
  double seconds;
  bool infinite;
};

// 8 pi h G / (Lambda V c^4). Lambda = 0 is the infinite-period limit.
inline VacuumPeriod vacuum_cycle_period(double lambda, double volume, const PhysicalConstants& k = {}) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("vacuum_cycle_period: Lambda must be non-negative");
  if (!(volume > 0.0) || !std::isfinite(volume)) throw std::invalid_argument("vacuum_cycle_period: volume must be positive");
  if (!(k.h > 0.0 && k.G > 0.0 && k.c > 0.0)) throw std::invalid_argument("vacuum_cycle_period: constants must be positive");
  if (lambda == 0.0) return {std::numeric_limits<double>::infinity(), true};
  const double c2 = k.c * k.c;
  const double p = 8.0 * std::numbers::pi * k.h * k.G / (lambda * volume * c2 * c2);
  return {p, !std::isfinite(p)};
}

// ---- CSV -------------------------------------------------------------------

inline void write_pair_spectrum_csv(std::ostream& os, std::span<const PairLevel> levels) {
  os << "n1,n2,p,q,n,energy_num,energy_den\n";
  for (const auto& l : levels) {
    os << l.state.n1 << ',' << l.state.n2 << ',' << l.label.p() << ',' << l.label.q() << ',' << l.label.n() << ','
       << numerator_of(l.energy).str() << ',' << denominator_of(l.energy).str() << '\n';
  }
}

inline std::vector<PairLevel> read_pair_spectrum_csv(std::istream& is) {
  const auto t = csv::read(is);
  const std::size_t c[7] = {t.column("n1"), t.column("n2"), t.column("p"), t.column("q"),
                            t.column("n"), t.column("energy_num"), t.column("energy_den")};
  std::vector<PairLevel> out;
  for (const auto& r : t.rows) {
    const PairState s{csv::to_int<std::uint64_t>(r[c[0]]), csv::to_int<std::uint64_t>(r[c[1]]), Sector::ket};
    const SeriesLabel label(csv::to_int<std::uint64_t>(r[c[2]]), csv::to_int<std::uint64_t>(r[c[3]]),
                            csv::to_int<std::uint64_t>(r[c[4]]));
    out.push_back({s, label, parse_rational(r[c[5]] + "/" + r[c[6]])});
  }
  return out;
}

}  // namespace ontoq
