#pragma once

// On-disk forms of maps and decompositions.
//
// Map binary: "OMAP" | u16 version | u64 N | N x u64 entries, all little-endian.
// Decomposition JSON: {schema_version, n_states, cycles: [{id, period, members, basin}], checksum}
// where checksum is the FNV-1a/64 digest of the map's binary encoding, as 16 hex digits.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ontoq/automaton.hpp"
#include "ontoq/error.hpp"

namespace ontoq {

inline constexpr std::array<char, 4> omap_magic{'O', 'M', 'A', 'P'};
inline constexpr std::uint16_t omap_version = 1;
inline constexpr int schema_version = 1;

namespace detail {

inline void put_le(std::ostream& os, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xffU));
}

inline std::uint64_t get_le(std::istream& is, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw format_error("OMAP: truncated input");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

struct Fnv1a64 {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void byte(unsigned char b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  void le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) byte(static_cast<unsigned char>((v >> (8 * i)) & 0xffU));
  }
};

}  // namespace detail

inline void write_map(std::ostream& os, const MapTable& map) {
  os.write(omap_magic.data(), omap_magic.size());
  detail::put_le(os, omap_version, 2);
  detail::put_le(os, map.n_states(), 8);
  for (state_t e : map.table()) detail::put_le(os, e, 8);
  if (!os) throw format_error("OMAP: write failed");
}

inline MapTable read_map(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != omap_magic) throw format_error("OMAP: bad magic");
  const auto version = detail::get_le(is, 2);
  if (version != omap_version) throw format_error("OMAP: unsupported version " + std::to_string(version));
  const auto n = detail::get_le(is, 8);
  if (n == 0) throw format_error("OMAP: empty map");
  std::vector<state_t> next;
  next.reserve(std::min<std::uint64_t>(n, std::uint64_t{1} << 20));
  for (std::uint64_t i = 0; i < n; ++i) next.push_back(detail::get_le(is, 8));
  try {
    return MapTable(std::move(next));
  } catch (const std::invalid_argument& e) {
    throw format_error(std::string("OMAP: ") + e.what());
  }
}

inline void save_map(const std::string& path, const MapTable& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("cannot open " + path + " for writing");
  write_map(os, map);
}

inline MapTable load_map(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("cannot open " + path);
  return read_map(is);
}

inline std::string map_checksum(const MapTable& map) {
  detail::Fnv1a64 f;
  for (char c : omap_magic) f.byte(static_cast<unsigned char>(c));
  f.le(omap_version, 2);
  f.le(map.n_states(), 8);
  for (state_t e : map.table()) f.le(e, 8);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << f.h;
  return os.str();
}

struct DecompositionSummary {
  struct Entry {
    std::size_t id;
    std::uint64_t period;
    std::vector<state_t> members;
    std::uint64_t basin;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::uint64_t n_states = 0;
  std::vector<Entry> cycles;
  std::string checksum;
  friend bool operator==(const DecompositionSummary&, const DecompositionSummary&) = default;
};

inline DecompositionSummary summarize(const MapTable& map, const CycleDecomposition& dec) {
  DecompositionSummary s;
  s.n_states = dec.n_states;
  for (const auto& c : dec.cycles) s.cycles.push_back({c.id, c.period(), c.members, dec.basin_size[c.id]});
  s.checksum = map_checksum(map);
  return s;
}

inline nlohmann::json to_json(const DecompositionSummary& s) {
  nlohmann::json j;
  j["schema_version"] = schema_version;
  j["n_states"] = s.n_states;
  j["cycles"] = nlohmann::json::array();
  for (const auto& c : s.cycles) {
    j["cycles"].push_back({{"id", c.id}, {"period", c.period}, {"members", c.members}, {"basin", c.basin}});
  }
  j["checksum"] = s.checksum;
  return j;
}

inline DecompositionSummary decomposition_from_json(const nlohmann::json& j) {
  try {
    DecompositionSummary s;
    s.n_states = j.at("n_states").get<std::uint64_t>();
    for (const auto& c : j.at("cycles")) {
      s.cycles.push_back({c.at("id").get<std::size_t>(), c.at("period").get<std::uint64_t>(),
                          c.at("members").get<std::vector<state_t>>(), c.at("basin").get<std::uint64_t>()});
    }
    s.checksum = j.at("checksum").get<std::string>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("decomposition JSON: ") + e.what());
  }
}

}  // namespace ontoq
