#pragma once

// Finite deterministic systems as maps F on {0, ..., N-1}: construction,
// evolution, limit-cycle detection, functional-graph decomposition and the
// quotient onto recurrent states.

#include <algorithm>
#include <bitset>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ontoq/error.hpp"
#include "ontoq/permutation.hpp"
#include "ontoq/rng.hpp"

namespace ontoq {

using state_t = std::uint64_t;

// Outer-totalistic Moore-neighbourhood rule in "B3/S23" notation.
struct TotalisticRule {
  std::bitset<9> birth;
  std::bitset<9> survive;

  static TotalisticRule parse(std::string_view text) {
    TotalisticRule rule;
    std::bitset<9>* target = nullptr;
    bool saw_b = false, saw_s = false;
    for (char c : text) {
      const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (u == 'B') {
        target = &rule.birth;
        saw_b = true;
      } else if (u == 'S') {
        target = &rule.survive;
        saw_s = true;
      } else if (u == '/') {
        target = nullptr;
      } else if (u >= '0' && u <= '8' && target != nullptr) {
        target->set(static_cast<std::size_t>(u - '0'));
      } else {
        throw std::invalid_argument("bad totalistic rule '" + std::string(text) + "'");
      }
    }
    if (!saw_b || !saw_s) throw std::invalid_argument("rule needs B and S parts: '" + std::string(text) + "'");
    return rule;
  }

  std::string to_string() const {
    std::string out = "B";
    for (std::size_t k = 0; k < 9; ++k)
      if (birth[k]) out += static_cast<char>('0' + k);
    out += "/S";
    for (std::size_t k = 0; k < 9; ++k)
      if (survive[k]) out += static_cast<char>('0' + k);
    return out;
  }

  bool next_cell(bool alive, unsigned neighbours) const {
    return alive ? survive[neighbours] : birth[neighbours];
  }
};

struct ExplicitSource {};
struct SeededRandomSource {
  std::uint64_t seed;
};
struct CellularAutomatonSource {
  unsigned width;
  unsigned height;
  TotalisticRule rule;
};
using Provenance = std::variant<ExplicitSource, SeededRandomSource, CellularAutomatonSource>;

// Immutable evolution law F: states -> states.
class MapTable {
 public:
  explicit MapTable(std::vector<state_t> next, Provenance provenance = ExplicitSource{})
      : next_(std::move(next)), provenance_(std::move(provenance)) {
    if (next_.empty()) throw std::invalid_argument("a map needs at least one state");
    const auto n = next_.size();
    for (std::size_t s = 0; s < n; ++s) {
      if (next_[s] >= n) {
        throw std::invalid_argument("next[" + std::to_string(s) + "] = " + std::to_string(next_[s]) +
                                    " outside [0, " + std::to_string(n) + ")");
      }
    }
  }

  std::size_t n_states() const noexcept { return next_.size(); }
  std::span<const state_t> table() const noexcept { return next_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  // Unchecked lookup for hot loops.
  state_t operator[](state_t s) const noexcept { return next_[s]; }

  void check_state(state_t s) const {
    if (s >= next_.size()) {
      throw std::out_of_range("state " + std::to_string(s) + " outside [0, " + std::to_string(next_.size()) + ")");
    }
  }

  friend bool operator==(const MapTable& a, const MapTable& b) { return a.next_ == b.next_; }

 private:
  std::vector<state_t> next_;
  Provenance provenance_;
};

// Each entry uniform on [0, n) drawn in index order from `g`.
inline MapTable random_map(std::uint64_t n_states, rng::engine& g, Provenance provenance = ExplicitSource{}) {
  if (n_states == 0) throw std::invalid_argument("random_map: n_states must be positive");
  std::vector<state_t> next(n_states);
  for (auto& e : next) e = rng::uniform_below(g, n_states);
  return MapTable(std::move(next), std::move(provenance));
}

// The table drawn from a fresh engine seeded with `seed`.
inline MapTable random_map(std::uint64_t n_states, std::uint64_t seed) {
  if (n_states == 0) throw std::invalid_argument("random_map: n_states must be positive");
  rng::engine g(seed);
  return random_map(n_states, g, SeededRandomSource{seed});
}

// Synchronous update of a packed width x height torus; bit (y*width + x) is cell (x, y).
// Neighbour offsets wrap, so on tiny tori one cell may be counted more than once.
inline state_t ca_update(state_t grid, unsigned width, unsigned height, const TotalisticRule& rule) {
  state_t out = 0;
  for (unsigned y = 0; y < height; ++y) {
    for (unsigned x = 0; x < width; ++x) {
      unsigned count = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const unsigned nx = static_cast<unsigned>(static_cast<int>(x + width) + dx) % width;
          const unsigned ny = static_cast<unsigned>(static_cast<int>(y + height) + dy) % height;
          count += static_cast<unsigned>((grid >> (ny * width + nx)) & 1U);
        }
      }
      const bool alive = ((grid >> (y * width + x)) & 1U) != 0;
      if (rule.next_cell(alive, count)) out |= state_t{1} << (y * width + x);
    }
  }
  return out;
}

inline constexpr unsigned default_ca_bit_budget = 24;

inline MapTable ca_map(unsigned width, unsigned height, const TotalisticRule& rule,
                       unsigned bit_budget = default_ca_bit_budget) {
  if (width == 0 || height == 0) throw std::invalid_argument("ca_map: empty grid");
  const std::uint64_t cells = std::uint64_t{width} * height;
  if (cells > bit_budget || cells >= 63) {
    throw unsupported_size("ca_map: " + std::to_string(width) + "x" + std::to_string(height) +
                           " grid needs 2^" + std::to_string(cells) + " states, budget is 2^" +
                           std::to_string(bit_budget));
  }
  const state_t n = state_t{1} << cells;
  std::vector<state_t> next(n);
  for (state_t s = 0; s < n; ++s) next[s] = ca_update(s, width, height, rule);
  return MapTable(std::move(next), CellularAutomatonSource{width, height, rule});
}

inline state_t step(const MapTable& map, state_t s) {
  map.check_state(s);
  return map[s];
}

inline state_t evolve(const MapTable& map, state_t s, std::uint64_t t) {
  map.check_state(s);
  for (std::uint64_t i = 0; i < t; ++i) s = map[s];
  return s;
}

struct CycleInfo {
  state_t start_state;
  std::uint64_t tail_length;  // steps before the first recurrent state
  std::uint64_t period;
  state_t entry_state;        // first recurrent state reached

  friend bool operator==(const CycleInfo&, const CycleInfo&) = default;
};

// Brent's cycle detection: constant memory, exact minimal (tail, period).
inline CycleInfo find_cycle(const MapTable& map, state_t start) {
  map.check_state(start);
  std::uint64_t power = 1;
  std::uint64_t period = 1;
  state_t tortoise = start;
  state_t hare = map[start];
  while (tortoise != hare) {
    if (power == period) {
      tortoise = hare;
      power *= 2;
      period = 0;
    }
    hare = map[hare];
    ++period;
  }

  tortoise = start;
  hare = start;
  for (std::uint64_t i = 0; i < period; ++i) hare = map[hare];
  std::uint64_t tail = 0;
  while (tortoise != hare) {
    tortoise = map[tortoise];
    hare = map[hare];
    ++tail;
  }
  return {start, tail, period, tortoise};
}

struct Cycle {
  std::size_t id;
  std::vector<state_t> members;  // cyclic order, smallest state first

  std::uint64_t period() const noexcept { return members.size(); }
};

// Equivalence class of a state: the cycle it locks onto and the phase on it.
struct StateClass {
  std::size_t cycle_id;
  std::uint64_t phase;

  friend bool operator==(const StateClass&, const StateClass&) = default;
};

struct CycleDecomposition {
  std::size_t n_states = 0;
  std::vector<Cycle> cycles;               // ordered by smallest member
  std::vector<std::uint64_t> basin_size;   // per cycle id
  std::vector<StateClass> class_of;        // per state
  std::vector<std::uint64_t> tail_length;  // per state

  std::uint64_t recurrent_count() const noexcept {
    std::uint64_t r = 0;
    for (const auto& c : cycles) r += c.period();
    return r;
  }

  // The cycle member a state locks onto: phase of its class.
  state_t representative(state_t s) const {
    const auto& cls = class_of.at(s);
    return cycles[cls.cycle_id].members[cls.phase];
  }
};

// Linear-time decomposition of the functional graph. A tail state whose
// successor has phase k gets phase k-1 (mod P), so that the class of a state is
// (cycle, phase of its entry state minus its tail length).
inline CycleDecomposition decompose(const MapTable& map) {
  constexpr auto unvisited = std::numeric_limits<std::size_t>::max();
  constexpr auto on_path = unvisited - 1;
  const std::size_t n = map.n_states();

  std::vector<std::size_t> cycle_of(n, unvisited);
  std::vector<std::uint64_t> phase(n, 0);
  std::vector<std::uint64_t> tail(n, 0);
  std::vector<std::size_t> path_pos(n, 0);
  std::vector<std::vector<state_t>> found;
  std::vector<state_t> path;

  for (state_t s = 0; s < n; ++s) {
    if (cycle_of[s] != unvisited) continue;
    path.clear();
    state_t x = s;
    while (cycle_of[x] == unvisited) {
      cycle_of[x] = on_path;
      path_pos[x] = path.size();
      path.push_back(x);
      x = map[x];
    }

    std::size_t tail_end = path.size();
    if (cycle_of[x] == on_path) {
      tail_end = path_pos[x];
      std::vector<state_t> members(path.begin() + static_cast<std::ptrdiff_t>(tail_end), path.end());
      std::rotate(members.begin(), std::min_element(members.begin(), members.end()), members.end());
      const std::size_t id = found.size();
      for (std::size_t k = 0; k < members.size(); ++k) {
        cycle_of[members[k]] = id;
        phase[members[k]] = k;
        tail[members[k]] = 0;
      }
      found.push_back(std::move(members));
    }
    for (std::size_t i = tail_end; i-- > 0;) {
      const state_t y = path[i];
      const state_t succ = map[y];
      const std::size_t id = cycle_of[succ];
      const std::uint64_t p = found[id].size();
      cycle_of[y] = id;
      phase[y] = (phase[succ] + p - 1) % p;
      tail[y] = tail[succ] + 1;
    }
  }

  // Renumber by smallest member.
  std::vector<std::size_t> order(found.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return found[a][0] < found[b][0]; });
  std::vector<std::size_t> rank(found.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

  CycleDecomposition out;
  out.n_states = n;
  out.cycles.reserve(found.size());
  for (std::size_t r = 0; r < order.size(); ++r) out.cycles.push_back({r, std::move(found[order[r]])});
  out.basin_size.assign(out.cycles.size(), 0);
  out.class_of.resize(n);
  for (state_t s = 0; s < n; ++s) {
    const std::size_t id = rank[cycle_of[s]];
    out.class_of[s] = {id, phase[s]};
    ++out.basin_size[id];
  }
  out.tail_length = std::move(tail);
  return out;
}

struct Quotient {
  std::vector<state_t> recurrent;    // sorted ascending
  Permutation permutation;           // F restricted to `recurrent`, on indices into it
  std::vector<state_t> projection;   // state -> recurrent state it locks onto

  std::size_t index_of(state_t recurrent_state) const {
    const auto it = std::lower_bound(recurrent.begin(), recurrent.end(), recurrent_state);
    if (it == recurrent.end() || *it != recurrent_state) {
      throw std::invalid_argument("state " + std::to_string(recurrent_state) + " is not recurrent");
    }
    return static_cast<std::size_t>(it - recurrent.begin());
  }
};

inline Quotient quotient(const MapTable& map, const CycleDecomposition& dec) {
  Quotient q;
  q.recurrent.reserve(dec.recurrent_count());
  for (const auto& c : dec.cycles) q.recurrent.insert(q.recurrent.end(), c.members.begin(), c.members.end());
  std::sort(q.recurrent.begin(), q.recurrent.end());

  std::vector<std::size_t> image(q.recurrent.size());
  for (std::size_t i = 0; i < q.recurrent.size(); ++i) image[i] = q.index_of(map[q.recurrent[i]]);
  q.permutation = Permutation(std::move(image));

  q.projection.resize(map.n_states());
  for (state_t s = 0; s < map.n_states(); ++s) q.projection[s] = dec.representative(s);
  return q;
}

inline Quotient quotient(const MapTable& map) { return quotient(map, decompose(map)); }

}  // namespace ontoq
