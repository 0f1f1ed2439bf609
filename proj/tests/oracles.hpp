#pragma once

// Slow, direct reference implementations used only by the tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <unordered_map>
#include <vector>

#include "ontoq/automaton.hpp"
#include "ontoq/rational.hpp"

namespace oracle {

struct NaiveCycle {
  std::uint64_t tail;
  std::uint64_t period;
  std::uint64_t entry;
};

// Record the time of every visited state; the first revisit closes the cycle.
inline NaiveCycle naive_cycle(std::span<const std::uint64_t> next, std::uint64_t start) {
  std::unordered_map<std::uint64_t, std::uint64_t> first_seen;
  std::uint64_t x = start;
  for (std::uint64_t t = 0;; ++t) {
    const auto [it, fresh] = first_seen.emplace(x, t);
    if (!fresh) return {it->second, t - it->second, x};
    x = next[x];
  }
}

// Cell-by-cell update on an explicit 2D grid.
inline std::uint64_t naive_ca_step(std::uint64_t packed, unsigned w, unsigned h, const ontoq::TotalisticRule& rule) {
  std::vector<std::vector<int>> grid(h, std::vector<int>(w));
  for (unsigned y = 0; y < h; ++y)
    for (unsigned x = 0; x < w; ++x) grid[y][x] = static_cast<int>((packed >> (y * w + x)) & 1U);
  const int offsets[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}};
  std::uint64_t out = 0;
  for (unsigned y = 0; y < h; ++y) {
    for (unsigned x = 0; x < w; ++x) {
      int n = 0;
      for (const auto& o : offsets) {
        const int xx = ((static_cast<int>(x) + o[0]) % static_cast<int>(w) + static_cast<int>(w)) % static_cast<int>(w);
        const int yy = ((static_cast<int>(y) + o[1]) % static_cast<int>(h) + static_cast<int>(h)) % static_cast<int>(h);
        n += grid[static_cast<unsigned>(yy)][static_cast<unsigned>(xx)];
      }
      const bool alive = grid[y][x] != 0;
      const bool next = alive ? rule.survive[static_cast<std::size_t>(n)] : rule.birth[static_cast<std::size_t>(n)];
      if (next) out |= std::uint64_t{1} << (y * w + x);
    }
  }
  return out;
}

// Visit every map on n states (n^n of them).
inline void for_each_map(std::uint64_t n, const std::function<void(const std::vector<std::uint64_t>&)>& fn) {
  std::vector<std::uint64_t> next(n, 0);
  while (true) {
    fn(next);
    std::size_t i = 0;
    while (i < n && ++next[i] == n) next[i++] = 0;
    if (i == n) return;
  }
}

// Cycle count by period, found by marking states that return to themselves.
inline std::vector<ontoq::Rational> naive_cycles_by_period(const std::vector<std::uint64_t>& next) {
  const std::uint64_t n = next.size();
  std::vector<ontoq::Rational> by_period(n + 1, 0);
  for (std::uint64_t s = 0; s < n; ++s) {
    std::uint64_t x = next[s];
    for (std::uint64_t p = 1; p <= n; ++p, x = next[x]) {
      if (x == s) {
        // Each P-cycle is found once from each of its P members.
        by_period[p] += ontoq::Rational(1, p);
        break;
      }
    }
  }
  return by_period;
}

// Direct O(M^2) DFT with the library's normalisation: c_n = (1/M) sum_k x_k e^{-2 pi i n k / M}.
inline std::vector<std::complex<double>> naive_dft(std::span<const std::complex<double>> x) {
  const std::size_t m = x.size();
  std::vector<std::complex<double>> c(m);
  for (std::size_t n = 0; n < m; ++n) {
    std::complex<double> acc{};
    for (std::size_t k = 0; k < m; ++k) {
      acc += x[k] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((n * k) % m) / static_cast<double>(m));
    }
    c[n] = acc / static_cast<double>(m);
  }
  return c;
}

// Dense integer matrices for operator identities.
using IntMatrix = std::vector<std::vector<long long>>;

inline IntMatrix zeros(std::size_t n) { return IntMatrix(n, std::vector<long long>(n, 0)); }

inline IntMatrix multiply(const IntMatrix& a, const IntMatrix& b) {
  const std::size_t n = a.size();
  auto c = zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (a[i][k] != 0)
        for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// U with U|s> = |perm(s)>: U[perm(s)][s] = 1.
inline IntMatrix permutation_matrix(std::span<const std::size_t> image) {
  auto u = zeros(image.size());
  for (std::size_t s = 0; s < image.size(); ++s) u[image[s]][s] = 1;
  return u;
}

inline IntMatrix transpose(const IntMatrix& a) {
  auto t = zeros(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline IntMatrix power(const IntMatrix& a, std::uint64_t t) {
  auto r = zeros(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i][i] = 1;
  for (std::uint64_t i = 0; i < t; ++i) r = multiply(r, a);
  return r;
}

inline IntMatrix diagonal(std::span<const long long> d) {
  auto m = zeros(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m[i][i] = d[i];
  return m;
}

}  // namespace oracle
