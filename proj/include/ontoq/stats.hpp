#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace ontoq::stats {

struct MeanError {
  double mean = 0.0;
  double stderr_ = 0.0;  // standard error of the mean
};

inline MeanError mean_stderr(std::span<const double> xs) {
  MeanError out;
  const std::size_t n = xs.size();
  if (n == 0) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(n);
  if (n < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.stderr_ = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  return out;
}

// Upper tail of the chi-square distribution.
inline double chi2_sf(double chi2, std::size_t dof) {
  if (dof == 0) throw std::invalid_argument("chi2_sf: zero degrees of freedom");
  if (!std::isfinite(chi2)) return 0.0;
  if (chi2 <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * static_cast<double>(dof), 0.5 * chi2);
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of empty sample");
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  if (xs.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(xs.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace ontoq::stats
