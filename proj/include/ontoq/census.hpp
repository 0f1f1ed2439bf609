#pragma once

// Limit-cycle census over uniformly random maps.
//
// Full mode decomposes every map and counts cycles by period. Sampled mode
// follows k uniform starts per map; the periods it records are weighted by
// basin size. Starts that are themselves on their cycle (zero tail) hit a
// P-cycle with probability P * E(P) / N, so dividing those hits by P recovers
// per-cycle counts; energy_histogram and gof_compare use that for sampled data.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "ontoq/automaton.hpp"
#include "ontoq/rational.hpp"
#include "ontoq/rng.hpp"
#include "ontoq/spectral.hpp"
#include "ontoq/stats.hpp"

namespace ontoq {

enum class CensusMode { full, sampled };

inline const char* to_string(CensusMode m) { return m == CensusMode::full ? "full" : "sampled"; }

inline CensusMode parse_census_mode(const std::string& s) {
  if (s == "full" || s == "full-decomposition") return CensusMode::full;
  if (s == "sampled" || s == "sampled-starts") return CensusMode::sampled;
  throw std::invalid_argument("unknown census mode '" + s + "'");
}

struct CensusParams {
  std::uint64_t n_states = 0;
  std::uint64_t num_maps = 0;
  CensusMode mode = CensusMode::full;
  std::uint64_t starts_per_map = 0;  // sampled mode only
  std::uint64_t master_seed = 0;
};

using PeriodHistogram = std::map<std::uint64_t, std::uint64_t>;

struct MapRecord {
  PeriodHistogram periods;               // full: cycles per period; sampled: trajectories per period
  PeriodHistogram cyclic_start_periods;  // sampled: periods of starts with zero tail
  PeriodHistogram rho_lengths;           // sampled: tail + period per trajectory
  std::uint64_t recurrent = 0;           // full: number of recurrent states
  std::uint64_t max_period = 0;
  std::uint64_t min_period = 0;
};

struct CycleCensus {
  CensusParams params;
  std::vector<MapRecord> maps;

  PeriodHistogram histogram() const {
    PeriodHistogram h;
    for (const auto& m : maps)
      for (const auto& [p, c] : m.periods) h[p] += c;
    return h;
  }

  PeriodHistogram cyclic_start_histogram() const {
    PeriodHistogram h;
    for (const auto& m : maps)
      for (const auto& [p, c] : m.cyclic_start_periods) h[p] += c;
    return h;
  }
};

inline MapRecord record_full(const MapTable& map) {
  const auto dec = decompose(map);
  MapRecord r;
  for (const auto& c : dec.cycles) ++r.periods[c.period()];
  r.recurrent = dec.recurrent_count();
  r.min_period = r.periods.begin()->first;
  r.max_period = r.periods.rbegin()->first;
  return r;
}

inline MapRecord record_sampled(const MapTable& map, rng::engine& g, std::uint64_t starts) {
  if (starts == 0) throw std::invalid_argument("sampled census needs at least one start per map");
  MapRecord r;
  for (std::uint64_t i = 0; i < starts; ++i) {
    const auto info = find_cycle(map, rng::uniform_below(g, map.n_states()));
    ++r.periods[info.period];
    ++r.rho_lengths[info.tail_length + info.period];
    if (info.tail_length == 0) ++r.cyclic_start_periods[info.period];
  }
  r.min_period = r.periods.begin()->first;
  r.max_period = r.periods.rbegin()->first;
  return r;
}

// ONTOQ_WORKERS, else 1. Affects speed only.
inline unsigned default_workers() {
  if (const char* env = std::getenv("ONTOQ_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

namespace detail {

template <class Fn>
void parallel_for(std::uint64_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::uint64_t>(count, 256))));
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::uint64_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

// Map i is drawn from stream (master_seed, i); in sampled mode its starts
// continue the same stream after the table.
inline CycleCensus run_census(const CensusParams& params, unsigned workers = 0) {
  if (params.n_states < 2) throw std::invalid_argument("run_census: n_states must be at least 2");
  if (params.num_maps == 0) throw std::invalid_argument("run_census: num_maps must be positive");
  if (params.mode == CensusMode::sampled && params.starts_per_map == 0) {
    throw std::invalid_argument("run_census: sampled mode needs starts_per_map > 0");
  }
  CycleCensus census{params, std::vector<MapRecord>(params.num_maps)};
  detail::parallel_for(params.num_maps, workers == 0 ? default_workers() : workers, [&](std::uint64_t i) {
    auto g = rng::make_stream(params.master_seed, i);
    const auto map = random_map(params.n_states, g);
    census.maps[i] = params.mode == CensusMode::full ? record_full(map) : record_sampled(map, g, params.starts_per_map);
  });
  return census;
}

// Census over a given collection of maps, all of the same size.
inline CycleCensus census_from_maps(std::span<const MapTable> maps, CensusMode mode, std::uint64_t starts_per_map = 0,
                                    std::uint64_t seed = 0) {
  if (maps.empty()) throw std::invalid_argument("census_from_maps: no maps");
  CycleCensus census{{maps.front().n_states(), maps.size(), mode, starts_per_map, seed}, {}};
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].n_states() != census.params.n_states) throw std::invalid_argument("census_from_maps: mixed map sizes");
    if (mode == CensusMode::full) {
      census.maps.push_back(record_full(maps[i]));
    } else {
      auto g = rng::make_stream(seed, i);
      census.maps.push_back(record_sampled(maps[i], g, starts_per_map));
    }
  }
  return census;
}

// ---- period models ---------------------------------------------------------

// Expected number of P-cycles in a uniform random map on N states:
// (1/P) prod_{i<P} (1 - i/N), zero for P > N.
inline Rational exact_expected_cycles_rational(std::uint64_t period, std::uint64_t n_states) {
  if (period == 0 || n_states == 0) throw std::invalid_argument("exact_expected_cycles: P and N must be positive");
  if (period > n_states) return Rational(0);
  Rational r(1, period);
  for (std::uint64_t i = 1; i < period; ++i) r *= Rational(n_states - i, n_states);
  return r;
}

inline double exact_expected_cycles(std::uint64_t period, std::uint64_t n_states) {
  if (period == 0 || n_states == 0) throw std::invalid_argument("exact_expected_cycles: P and N must be positive");
  if (period > n_states) return 0.0;
  double log_survival = 0.0;
  const double n = static_cast<double>(n_states);
  for (std::uint64_t i = 1; i < period; ++i) log_survival += std::log1p(-static_cast<double>(i) / n);
  return std::exp(log_survival) / static_cast<double>(period);
}

// Q(x) = exp(-x^2 / 2N): probability that a trajectory has not closed before step x.
inline double survival_Q(double x, double n_states) {
  if (x < 0.0) throw std::invalid_argument("survival_Q: x must be non-negative");
  return std::exp(-x * x / (2.0 * n_states));
}

inline double approx_expected_cycles(double period, double n_states) {
  if (!(period >= 1.0) || !(n_states >= 1.0)) throw std::invalid_argument("approx_expected_cycles: P, N >= 1");
  return survival_Q(period, n_states) / period;
}

// rho(P) dP = (dP/P) exp(-P^2/2N); numerically the same function as the approximate count.
inline double period_density(double period, double n_states) {
  if (!(period > 0.0)) throw std::invalid_argument("period_density: P must be positive");
  return std::exp(-period * period / (2.0 * n_states)) / period;
}

enum class ModelKind { gaussian_approx, exact_oracle };

struct PeriodModel {
  std::uint64_t n_states;
  ModelKind kind;

  // Expected cycles per map for P = 1..max_period (index 0 unused).
  std::vector<double> expected_table(std::uint64_t max_period) const {
    std::vector<double> e(max_period + 1, 0.0);
    const double n = static_cast<double>(n_states);
    double log_survival = 0.0;
    for (std::uint64_t p = 1; p <= max_period; ++p) {
      if (kind == ModelKind::gaussian_approx) {
        e[p] = approx_expected_cycles(static_cast<double>(p), n);
      } else {
        if (p > n_states) break;
        if (p > 1) log_survival += std::log1p(-static_cast<double>(p - 1) / n);
        e[p] = std::exp(log_survival) / static_cast<double>(p);
      }
    }
    return e;
  }
};

// Fraction of a census's trajectories with tail + period >= x, mean and standard
// error over maps (sampled mode).
inline stats::MeanError survival_fraction(const CycleCensus& census, std::uint64_t x) {
  if (census.params.mode != CensusMode::sampled) throw std::invalid_argument("survival_fraction needs a sampled census");
  std::vector<double> f;
  f.reserve(census.maps.size());
  for (const auto& m : census.maps) {
    std::uint64_t hit = 0, total = 0;
    for (const auto& [len, c] : m.rho_lengths) {
      total += c;
      if (len >= x) hit += c;
    }
    f.push_back(static_cast<double>(hit) / static_cast<double>(total));
  }
  return stats::mean_stderr(f);
}

inline stats::MeanError recurrent_per_map(const CycleCensus& census) {
  if (census.params.mode != CensusMode::full) throw std::invalid_argument("recurrent counts need a full census");
  std::vector<double> r;
  for (const auto& m : census.maps) r.push_back(static_cast<double>(m.recurrent));
  return stats::mean_stderr(r);
}

// Mean and standard error over maps of the number of P-cycles (full mode).
inline stats::MeanError cycles_per_map(const CycleCensus& census, std::uint64_t period) {
  if (census.params.mode != CensusMode::full) throw std::invalid_argument("cycle counts need a full census");
  std::vector<double> c;
  for (const auto& m : census.maps) {
    const auto it = m.periods.find(period);
    c.push_back(it == m.periods.end() ? 0.0 : static_cast<double>(it->second));
  }
  return stats::mean_stderr(c);
}

// ---- energy histogram ------------------------------------------------------

struct EnergyBinning {
  double ratio = 2.0;         // bin edges at ratio^j in period (log-spaced in E)
  double flat_margin = 4.0;   // flatness window: P <= median(largest period per map) / flat_margin
};

struct EnergyBin {
  std::uint64_t p_lo, p_hi;  // inclusive period range
  double e_lo, e_hi;
  std::uint64_t count;       // raw observations: cycles (full) or trajectories (sampled)
  double level_mean;         // estimated energy levels per map in the bin
  double level_stderr;
  double flat_weight;        // sum of 1/P over the bin: the dE/E law on integer periods
  bool in_window;
};

struct FlatnessTest {
  double chi2;
  std::size_t dof;
  double p_value;
  double scale;  // fitted levels per map per unit of flat_weight
};

struct EnergyHistogram {
  std::vector<EnergyBin> bins;
  double e_min;           // pooled: h / (largest period seen * dt)
  double e_max;           // pooled: h / (smallest period seen * dt)
  double e_min_mean;      // mean over maps of h / (largest period of the map * dt)
  double e_min_stderr;
  double e_min_reference; // h / (sqrt(2N) dt)
  std::uint64_t window_max_period;
  std::optional<FlatnessTest> flatness;
  bool e_min_consistent;  // e_min_mean within a factor 10 of the reference
  bool e_max_consistent;  // e_max <= h / dt
};

inline EnergyHistogram energy_histogram(const CycleCensus& census, double h = 1.0, double dt = 1.0,
                                        const EnergyBinning& binning = {}) {
  if (census.maps.empty()) throw std::invalid_argument("energy_histogram: empty census");
  if (!(h > 0.0) || !(dt > 0.0)) throw std::invalid_argument("energy_histogram: h and dt must be positive");
  if (!(binning.ratio > 1.0)) throw std::invalid_argument("energy_histogram: bin ratio must exceed 1");
  const bool sampled = census.params.mode == CensusMode::sampled;
  const double n = static_cast<double>(census.params.n_states);

  EnergyHistogram out{};
  std::uint64_t p_max = 0, p_min = std::numeric_limits<std::uint64_t>::max();
  std::vector<double> e_min_per_map, largest;
  for (const auto& m : census.maps) {
    p_max = std::max(p_max, m.max_period);
    p_min = std::min(p_min, m.min_period);
    e_min_per_map.push_back(cycle_energy(m.max_period, h, dt));
    largest.push_back(static_cast<double>(m.max_period));
  }
  out.e_min = cycle_energy(p_max, h, dt);
  out.e_max = cycle_energy(p_min, h, dt);
  const auto em = stats::mean_stderr(e_min_per_map);
  out.e_min_mean = em.mean;
  out.e_min_stderr = em.stderr_;
  out.e_min_reference = h / (std::sqrt(2.0 * n) * dt);
  out.e_min_consistent = out.e_min_mean <= 10.0 * out.e_min_reference && out.e_min_mean >= 0.1 * out.e_min_reference;
  out.e_max_consistent = out.e_max <= h / dt * (1.0 + 1e-12);
  out.window_max_period = static_cast<std::uint64_t>(std::floor(stats::median(largest) / binning.flat_margin));

  // Log-spaced period ranges; the one straddling the window edge is split there.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  for (double edge = 1.0;;) {
    const auto lo = static_cast<std::uint64_t>(std::ceil(edge - 1e-9));
    const double next_edge = edge * binning.ratio;
    const auto hi = static_cast<std::uint64_t>(std::ceil(next_edge - 1e-9)) - 1;
    edge = next_edge;
    if (hi < lo) continue;
    if (lo > p_max) break;
    const auto w = out.window_max_period;
    if (lo <= w && w < hi) {
      ranges.emplace_back(lo, w);
      ranges.emplace_back(w + 1, hi);
    } else {
      ranges.emplace_back(lo, hi);
    }
  }

  for (const auto& [lo, hi] : ranges) {
    EnergyBin bin{lo, hi, cycle_energy(hi, h, dt), cycle_energy(lo, h, dt), 0, 0.0, 0.0, 0.0,
                  hi <= out.window_max_period};
    for (std::uint64_t p = lo; p <= hi; ++p) bin.flat_weight += 1.0 / static_cast<double>(p);
    std::vector<double> per_map;
    per_map.reserve(census.maps.size());
    for (const auto& m : census.maps) {
      for (auto it = m.periods.lower_bound(lo); it != m.periods.end() && it->first <= hi; ++it) bin.count += it->second;
      double levels = 0.0;
      if (sampled) {
        const auto& cs = m.cyclic_start_periods;
        for (auto it = cs.lower_bound(lo); it != cs.end() && it->first <= hi; ++it) {
          levels += static_cast<double>(it->second) / static_cast<double>(it->first);
        }
        levels *= n / static_cast<double>(census.params.starts_per_map);
      } else {
        for (auto it = m.periods.lower_bound(lo); it != m.periods.end() && it->first <= hi; ++it) {
          levels += static_cast<double>(it->second);
        }
      }
      per_map.push_back(levels);
    }
    const auto me = stats::mean_stderr(per_map);
    bin.level_mean = me.mean;
    bin.level_stderr = me.stderr_;
    out.bins.push_back(bin);
  }

  // Flatness in log E: per-map level counts proportional to flat_weight, scale fitted
  // by weighted least squares with the across-map variances.
  std::vector<const EnergyBin*> window;
  for (const auto& b : out.bins)
    if (b.in_window) window.push_back(&b);
  if (window.size() >= 2) {
    const double maps = static_cast<double>(census.maps.size());
    auto variance = [&](const EnergyBin& b) {
      const double v = b.level_stderr * b.level_stderr;
      return v > 0.0 ? v : std::max(b.level_mean, 1.0 / maps) / maps;
    };
    double num = 0.0, den = 0.0;
    for (const auto* b : window) {
      num += b->level_mean * b->flat_weight / variance(*b);
      den += b->flat_weight * b->flat_weight / variance(*b);
    }
    const double scale = num / den;
    double chi2 = 0.0;
    for (const auto* b : window) {
      const double d = b->level_mean - scale * b->flat_weight;
      chi2 += d * d / variance(*b);
    }
    const std::size_t dof = window.size() - 1;
    out.flatness = FlatnessTest{chi2, dof, stats::chi2_sf(chi2, dof), scale};
  }
  return out;
}

// ---- goodness of fit -------------------------------------------------------

struct GofBin {
  std::uint64_t p_lo, p_hi;
  double observed;
  double expected;
  double variance;
};

struct GofResult {
  double chi2;
  std::size_t dof;
  double p_value;
  std::vector<GofBin> bins;
};

inline constexpr std::uint64_t gof_integer_bins = 64;
inline constexpr double gof_min_expected = 5.0;

// Chi-square of the census against a period model. Full censuses compare cycle
// counts with num_maps * E(P) (Pearson, Poisson variance). Sampled censuses
// compare zero-tail starts with mu = num_maps * k * P * E(P) / N; repeated hits
// on the same cycle inflate the variance to mu * (1 + (k - 1) P / N).
// Integer bins up to P = 64, doubling bins above, merged upward until each
// expects at least 5. The model has no fitted parameters and the total is not
// constrained, so dof = number of bins.
inline GofResult gof_compare(const CycleCensus& census, const PeriodModel& model) {
  const std::uint64_t n = census.params.n_states;
  const bool sampled = census.params.mode == CensusMode::sampled;
  const auto observed = sampled ? census.cyclic_start_histogram() : census.histogram();
  const auto expected_cycles = model.expected_table(n);
  const double maps = static_cast<double>(census.params.num_maps);
  const double k = static_cast<double>(census.params.starts_per_map);

  auto expected = [&](std::uint64_t p) {
    const double e = expected_cycles[p] * maps;
    return sampled ? e * k * static_cast<double>(p) / static_cast<double>(n) : e;
  };
  auto dispersion = [&](std::uint64_t p) {
    return sampled ? 1.0 + (k - 1.0) * static_cast<double>(p) / static_cast<double>(n) : 1.0;
  };

  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  for (std::uint64_t p = 1; p <= std::min(n, gof_integer_bins); ++p) raw.emplace_back(p, p);
  for (std::uint64_t lo = gof_integer_bins + 1; lo <= n; lo *= 2) raw.emplace_back(lo, std::min(n, 2 * lo - 1));

  GofResult out{};
  GofBin acc{0, 0, 0.0, 0.0, 0.0};
  bool open = false;
  for (const auto& [lo, hi] : raw) {
    if (!open) acc = {lo, hi, 0.0, 0.0, 0.0};
    open = true;
    acc.p_hi = hi;
    for (std::uint64_t p = lo; p <= hi; ++p) {
      acc.expected += expected(p);
      acc.variance += expected(p) * dispersion(p);
    }
    for (auto it = observed.lower_bound(lo); it != observed.end() && it->first <= hi; ++it) {
      acc.observed += static_cast<double>(it->second);
    }
    if (acc.expected >= gof_min_expected) {
      out.bins.push_back(acc);
      open = false;
    }
  }
  if (open) {
    if (out.bins.empty()) {
      out.bins.push_back(acc);
    } else {
      out.bins.back().p_hi = acc.p_hi;
      out.bins.back().observed += acc.observed;
      out.bins.back().expected += acc.expected;
      out.bins.back().variance += acc.variance;
    }
  }
  if (out.bins.size() < 2) throw std::invalid_argument("gof_compare: fewer than 2 usable bins");

  for (const auto& b : out.bins) {
    if (b.expected <= 0.0) {
      out.chi2 = b.observed > 0.0 ? std::numeric_limits<double>::infinity() : out.chi2;
      continue;
    }
    const double d = b.observed - b.expected;
    out.chi2 += d * d / b.variance;
  }
  out.dof = out.bins.size();
  out.p_value = stats::chi2_sf(out.chi2, out.dof);
  return out;
}

// ---- JSON ------------------------------------------------------------------

struct CensusSummary {
  CensusParams params;
  double h = 1.0, dt = 1.0;
  PeriodHistogram histogram;
  std::optional<double> recurrent_mean;
  double e_min = 0.0, e_max = 0.0;
  std::optional<GofResult> gof;  // bins are not serialised
};

inline CensusSummary summarize(const CycleCensus& census, double h = 1.0, double dt = 1.0) {
  CensusSummary s;
  s.params = census.params;
  s.h = h;
  s.dt = dt;
  s.histogram = census.histogram();
  if (census.params.mode == CensusMode::full) s.recurrent_mean = recurrent_per_map(census).mean;
  std::uint64_t p_max = 0, p_min = std::numeric_limits<std::uint64_t>::max();
  for (const auto& m : census.maps) {
    p_max = std::max(p_max, m.max_period);
    p_min = std::min(p_min, m.min_period);
  }
  s.e_min = cycle_energy(p_max, h, dt);
  s.e_max = cycle_energy(p_min, h, dt);
  try {
    s.gof = gof_compare(census, PeriodModel{census.params.n_states, ModelKind::exact_oracle});
  } catch (const std::invalid_argument&) {
    s.gof.reset();
  }
  return s;
}

inline nlohmann::json to_json(const CensusSummary& s) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["params"] = {{"n_states", s.params.n_states}, {"num_maps", s.params.num_maps},
                 {"mode", to_string(s.params.mode)}, {"starts_per_map", s.params.starts_per_map},
                 {"master_seed", s.params.master_seed}, {"h", s.h}, {"dt", s.dt}};
  j["histogram"] = nlohmann::json::array();
  for (const auto& [p, c] : s.histogram) j["histogram"].push_back({{"P", p}, {"count", c}});
  j["derived"] = {{"recurrent_mean", s.recurrent_mean ? nlohmann::json(*s.recurrent_mean) : nlohmann::json(nullptr)},
                  {"E_min", s.e_min}, {"E_max", s.e_max}};
  if (s.gof) {
    const auto chi2 = std::isfinite(s.gof->chi2) ? nlohmann::json(s.gof->chi2) : nlohmann::json(nullptr);
    j["gof"] = {{"chi2", chi2}, {"dof", s.gof->dof}, {"p", s.gof->p_value}, {"model", "exact-oracle"}};
  } else {
    j["gof"] = nullptr;
  }
  return j;
}

inline CensusSummary census_from_json(const nlohmann::json& j) {
  try {
    CensusSummary s;
    const auto& p = j.at("params");
    s.params = {p.at("n_states").get<std::uint64_t>(), p.at("num_maps").get<std::uint64_t>(),
                parse_census_mode(p.at("mode").get<std::string>()), p.at("starts_per_map").get<std::uint64_t>(),
                p.at("master_seed").get<std::uint64_t>()};
    s.h = p.at("h").get<double>();
    s.dt = p.at("dt").get<double>();
    for (const auto& e : j.at("histogram")) s.histogram[e.at("P").get<std::uint64_t>()] = e.at("count").get<std::uint64_t>();
    const auto& d = j.at("derived");
    if (!d.at("recurrent_mean").is_null()) s.recurrent_mean = d.at("recurrent_mean").get<double>();
    s.e_min = d.at("E_min").get<double>();
    s.e_max = d.at("E_max").get<double>();
    if (!j.at("gof").is_null()) {
      const auto& g = j.at("gof");
      const double chi2 = g.at("chi2").is_null() ? std::numeric_limits<double>::infinity() : g.at("chi2").get<double>();
      s.gof = GofResult{chi2, g.at("dof").get<std::size_t>(), g.at("p").get<double>(), {}};
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("census JSON: ") + e.what());
  }
}

}  // namespace ontoq
