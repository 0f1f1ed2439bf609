#pragma once

// Complex DFT on FFTW.
//   forward: c_n = (1/M) sum_k x_k exp(-2 pi i n k / M)
//   inverse: x_k = sum_n c_n exp(+2 pi i n k / M)
// Coefficients are in FFTW order: slot j holds mode n = j for j < M/2 and n = j - M otherwise.

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace ontoq::fft {

namespace detail {

// The FFTW planner is not thread-safe; execution of a plan is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};

inline std::vector<std::complex<double>> transform(std::span<const std::complex<double>> in, int sign) {
  const std::size_t m = in.size();
  if (m == 0) throw std::invalid_argument("fft: empty input");
  std::unique_ptr<fftw_complex[], FftwFree> buf(fftw_alloc_complex(m));
  if (!buf) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(m), buf.get(), buf.get(), sign, FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k < m; ++k) {
    buf[k][0] = in[k].real();
    buf[k][1] = in[k].imag();
  }
  fftw_execute(plan);
  std::vector<std::complex<double>> out(m);
  for (std::size_t k = 0; k < m; ++k) out[k] = {buf[k][0], buf[k][1]};
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace detail

inline std::vector<std::complex<double>> forward(std::span<const std::complex<double>> x) {
  auto c = detail::transform(x, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : c) v *= scale;
  return c;
}

inline std::vector<std::complex<double>> forward(std::span<const double> x) {
  std::vector<std::complex<double>> z(x.begin(), x.end());
  return forward(std::span<const std::complex<double>>(z));
}

inline std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> c) {
  return detail::transform(c, FFTW_BACKWARD);
}

// Signed mode of FFTW slot j.
constexpr long mode_of_slot(std::size_t j, std::size_t m) {
  return j < m / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(m);
}

constexpr std::size_t slot_of_mode(long n, std::size_t m) {
  const long mm = static_cast<long>(m);
  return static_cast<std::size_t>(((n % mm) + mm) % mm);
}

}  // namespace ontoq::fft
