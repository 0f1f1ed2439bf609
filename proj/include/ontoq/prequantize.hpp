#pragma once

// Positive-energy wave functions on the circle.
//
// Given a strictly positive density W(q) sampled on q_k = 2 pi k / M, build
//   psi(q) = exp(i beta0) z^k exp(alpha(q) + i beta(q)),  z = exp(i q),
// with alpha = log(W)/2 and beta the harmonic conjugate of alpha. Then
// alpha + i beta is the boundary value of a function analytic in the unit
// disk, so psi has no negative Fourier modes and |psi|^2 = W.
//
// beta is available two ways: by flipping the signs of the Fourier modes of
// alpha, and by principal-value quadrature of
//   beta(q) = -PV (1/2pi) oint dq' (1 + cos(q' - q)) / sin(q' - q) * alpha(q').
// The quadrature evaluates beta half a grid step off the alpha grid so the
// kernel singularity is never sampled; with that offset the trapezoid sum is
// exact for band-limited alpha.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ontoq/csv.hpp"
#include "ontoq/error.hpp"
#include "ontoq/fft.hpp"

namespace ontoq {

class CircleGrid {
 public:
  explicit CircleGrid(std::size_t m) : m_(m) {
    if (m < 4 || m % 2 != 0) throw std::invalid_argument("circle grid size must be even and at least 4, got " + std::to_string(m));
  }
  std::size_t size() const noexcept { return m_; }
  double spacing() const noexcept { return 2.0 * std::numbers::pi / static_cast<double>(m_); }
  double point(std::size_t k) const noexcept { return spacing() * static_cast<double>(k); }

  friend bool operator==(const CircleGrid&, const CircleGrid&) = default;

 private:
  std::size_t m_;
};

inline constexpr double normalization_tolerance = 1e-12;

struct CircleDensity {
  CircleGrid grid;
  std::vector<double> w;
  bool normalized;

  // Throws domain_violation naming the first non-positive sample.
  static CircleDensity from_samples(std::vector<double> w, bool require_normalized = false) {
    CircleGrid grid(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (!(w[k] > 0.0) || !std::isfinite(w[k])) {
        throw domain_violation("density must be strictly positive: W[" + std::to_string(k) + "] = " + csv::fmt(w[k]) +
                               " at q = " + csv::fmt(grid.point(k)));
      }
    }
    double total = 0.0;
    for (double v : w) total += v;
    const double mass = total * grid.spacing();
    const bool normalized = std::abs(mass - 1.0) <= normalization_tolerance;
    if (require_normalized && !normalized) {
      throw domain_violation("density is not normalized: integral = " + csv::fmt(mass));
    }
    return {grid, std::move(w), normalized};
  }

  // Samples of f at the grid points.
  template <class F>
  static CircleDensity sample(std::size_t m, F&& f, bool require_normalized = false) {
    CircleGrid grid(m);
    std::vector<double> w(m);
    for (std::size_t k = 0; k < m; ++k) w[k] = f(grid.point(k));
    return from_samples(std::move(w), require_normalized);
  }
};

inline std::vector<double> log_amplitude(std::span<const double> w) {
  std::vector<double> alpha(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!(w[k] > 0.0)) {
      throw domain_violation("log_amplitude: W[" + std::to_string(k) + "] = " + csv::fmt(w[k]) + " is not positive");
    }
    alpha[k] = 0.5 * std::log(w[k]);
  }
  return alpha;
}

inline std::vector<double> log_amplitude(const CircleDensity& density) { return log_amplitude(density.w); }

// Harmonic conjugate from the modes of alpha: beta_n = -i sgn(n) alpha_n, with
// the constant and Nyquist modes dropped. Evaluated at q_k + shift.
inline std::vector<double> conjugate_phase_fourier(std::span<const double> alpha, double shift = 0.0) {
  const std::size_t m = CircleGrid(alpha.size()).size();
  auto c = fft::forward(alpha);
  const std::complex<double> i{0.0, 1.0};
  for (std::size_t j = 0; j < m; ++j) {
    const long n = fft::mode_of_slot(j, m);
    if (n == 0 || n == -static_cast<long>(m / 2)) {
      c[j] = 0.0;
      continue;
    }
    const double sgn = n > 0 ? 1.0 : -1.0;
    c[j] *= -i * sgn * std::polar(1.0, static_cast<double>(n) * shift);
  }
  const auto b = fft::inverse(c);
  std::vector<double> beta(m);
  for (std::size_t k = 0; k < m; ++k) beta[k] = b[k].real();
  return beta;
}

// Offset of the grid on which conjugate_phase_pv returns beta.
inline double pv_offset(std::size_t m) { return std::numbers::pi / static_cast<double>(m); }

// Principal-value quadrature; returns beta at q_k + pi/M with its mean removed.
inline std::vector<double> conjugate_phase_pv(std::span<const double> alpha) {
  const std::size_t m = CircleGrid(alpha.size()).size();
  const double h = 2.0 * std::numbers::pi / static_cast<double>(m);
  // (1 + cos u) / sin u = cot(u/2), u = q_{j+d} - (q_j + h/2).
  std::vector<double> kernel(m);
  for (std::size_t d = 0; d < m; ++d) {
    const double u = h * static_cast<double>(d) - 0.5 * h;
    kernel[d] = 1.0 / std::tan(0.5 * u);
  }
  std::vector<double> beta(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double acc = 0.0;
    for (std::size_t d = 0; d < m; ++d) acc += kernel[d] * alpha[(j + d) % m];
    beta[j] = -acc / static_cast<double>(m);
  }
  double mean = 0.0;
  for (double b : beta) mean += b;
  mean /= static_cast<double>(m);
  for (double& b : beta) b -= mean;
  return beta;
}

struct CircleWaveFunction {
  CircleGrid grid;
  std::vector<std::complex<double>> psi;
  std::vector<std::complex<double>> coeffs;  // c_n for n = -M/2 .. M/2-1, in that order
  double beta0 = 0.0;

  static CircleWaveFunction from_samples(std::vector<std::complex<double>> psi, double beta0 = 0.0) {
    CircleGrid grid(psi.size());
    const std::size_t m = psi.size();
    const auto raw = fft::forward(std::span<const std::complex<double>>(psi));
    std::vector<std::complex<double>> coeffs(m);
    for (std::size_t j = 0; j < m; ++j) coeffs[static_cast<std::size_t>(fft::mode_of_slot(j, m) + static_cast<long>(m / 2))] = raw[j];
    return {grid, std::move(psi), std::move(coeffs), beta0};
  }

  long min_mode() const noexcept { return -static_cast<long>(grid.size() / 2); }

  std::complex<double> coeff(long n) const {
    const long idx = n - min_mode();
    if (idx < 0 || idx >= static_cast<long>(coeffs.size())) throw std::out_of_range("mode outside grid band");
    return coeffs[static_cast<std::size_t>(idx)];
  }

  std::vector<std::complex<double>> reconstruct() const {
    const std::size_t m = grid.size();
    std::vector<std::complex<double>> slots(m);
    for (std::size_t i = 0; i < m; ++i) slots[fft::slot_of_mode(static_cast<long>(i) + min_mode(), m)] = coeffs[i];
    return fft::inverse(slots);
  }
};

// Largest supported zero order at the origin for a grid of M points.
inline std::size_t max_zero_order(const CircleGrid& grid) { return grid.size() / 4 - 1; }

// The zero-free solution times z^k_zeros, rotated by beta0. Uses the Fourier conjugate.
inline CircleWaveFunction synthesize(const CircleDensity& density, std::size_t k_zeros = 0, double beta0 = 0.0) {
  const std::size_t m = density.grid.size();
  if (k_zeros >= m / 4) {
    throw std::invalid_argument("synthesize: zero order " + std::to_string(k_zeros) + " needs k < M/4 = " +
                                std::to_string(m / 4));
  }
  const auto alpha = log_amplitude(density);
  const auto beta = conjugate_phase_fourier(alpha);
  std::vector<std::complex<double>> psi(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double q = density.grid.point(k);
    psi[k] = std::exp(std::complex<double>(alpha[k], beta[k] + beta0 + static_cast<double>(k_zeros) * q));
  }
  return CircleWaveFunction::from_samples(std::move(psi), beta0);
}

struct SpectrumReport {
  double max_negative_mode_magnitude;
  double max_mode_magnitude;
  double reconstruction_sup_error;
  long occupied_min_n;   // lowest mode above tolerance * max |c_n|
  bool negative_modes;   // some negative mode above tolerance * max |c_n|
};

inline constexpr double default_mode_tolerance = 1e-9;

inline SpectrumReport spectrum_report(const CircleWaveFunction& wf, double tolerance = default_mode_tolerance) {
  SpectrumReport r{0.0, 0.0, 0.0, 0, false};
  for (const auto& c : wf.coeffs) r.max_mode_magnitude = std::max(r.max_mode_magnitude, std::abs(c));
  for (long n = wf.min_mode(); n < 0; ++n) r.max_negative_mode_magnitude = std::max(r.max_negative_mode_magnitude, std::abs(wf.coeff(n)));
  const double threshold = tolerance * r.max_mode_magnitude;
  r.negative_modes = r.max_negative_mode_magnitude > threshold;
  r.occupied_min_n = wf.min_mode();
  for (long n = wf.min_mode(); n < -wf.min_mode(); ++n) {
    if (std::abs(wf.coeff(n)) > threshold) {
      r.occupied_min_n = n;
      break;
    }
  }
  const auto back = wf.reconstruct();
  for (std::size_t k = 0; k < back.size(); ++k) r.reconstruction_sup_error = std::max(r.reconstruction_sup_error, std::abs(back[k] - wf.psi[k]));
  return r;
}

inline nlohmann::json to_json(const SpectrumReport& r) {
  return {{"max_negative_mode_magnitude", r.max_negative_mode_magnitude},
          {"max_mode_magnitude", r.max_mode_magnitude},
          {"reconstruction_sup_error", r.reconstruction_sup_error},
          {"occupied_min_n", r.occupied_min_n},
          {"negative_modes", r.negative_modes}};
}

inline SpectrumReport spectrum_report_from_json(const nlohmann::json& j) {
  try {
    return {j.at("max_negative_mode_magnitude").get<double>(), j.at("max_mode_magnitude").get<double>(),
            j.at("reconstruction_sup_error").get<double>(), j.at("occupied_min_n").get<long>(),
            j.at("negative_modes").get<bool>()};
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("spectrum report JSON: ") + e.what());
  }
}

// ---- CSV -------------------------------------------------------------------

// Columns (q, W); q must be the uniform grid 2 pi k / M.
inline CircleDensity read_density_csv(std::istream& is, bool require_normalized = false) {
  const auto t = csv::read(is);
  const auto cq = t.column("q"), cw = t.column("W");
  std::vector<double> w;
  w.reserve(t.rows.size());
  for (const auto& r : t.rows) w.push_back(csv::to_double(r[cw]));
  CircleGrid grid(w.size());
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    if (std::abs(csv::to_double(t.rows[k][cq]) - grid.point(k)) > 1e-9) {
      throw format_error("density CSV: row " + std::to_string(k) + " is not on the uniform grid 2 pi k / M");
    }
  }
  return CircleDensity::from_samples(std::move(w), require_normalized);
}

inline void write_density_csv(std::ostream& os, const CircleDensity& d) {
  os << "q,W\n";
  for (std::size_t k = 0; k < d.w.size(); ++k) os << csv::fmt(d.grid.point(k)) << ',' << csv::fmt(d.w[k]) << '\n';
}

struct WaveFunctionSample {
  double q, w, alpha, beta, re_psi, im_psi;
};

// beta is the harmonic conjugate of alpha; psi additionally carries exp(i beta0) z^k.
inline std::vector<WaveFunctionSample> wavefunction_samples(const CircleDensity& d, const CircleWaveFunction& wf) {
  const auto alpha = log_amplitude(d);
  const auto beta = conjugate_phase_fourier(alpha);
  std::vector<WaveFunctionSample> out;
  out.reserve(d.w.size());
  for (std::size_t k = 0; k < d.w.size(); ++k) {
    out.push_back({d.grid.point(k), d.w[k], alpha[k], beta[k], wf.psi[k].real(), wf.psi[k].imag()});
  }
  return out;
}

inline void write_wavefunction_csv(std::ostream& os, std::span<const WaveFunctionSample> rows) {
  os << "q,W,alpha,beta,re_psi,im_psi\n";
  for (const auto& r : rows) {
    os << csv::fmt(r.q) << ',' << csv::fmt(r.w) << ',' << csv::fmt(r.alpha) << ',' << csv::fmt(r.beta) << ','
       << csv::fmt(r.re_psi) << ',' << csv::fmt(r.im_psi) << '\n';
  }
}

inline std::vector<WaveFunctionSample> read_wavefunction_csv(std::istream& is) {
  const auto t = csv::read(is);
  const std::size_t c[6] = {t.column("q"), t.column("W"), t.column("alpha"), t.column("beta"), t.column("re_psi"), t.column("im_psi")};
  std::vector<WaveFunctionSample> out;
  for (const auto& r : t.rows) {
    out.push_back({csv::to_double(r[c[0]]), csv::to_double(r[c[1]]), csv::to_double(r[c[2]]), csv::to_double(r[c[3]]),
                   csv::to_double(r[c[4]]), csv::to_double(r[c[5]])});
  }
  return out;
}

}  // namespace ontoq
