// ontoq: command-line front end for the ontoq library.
// Exit codes: 0 success, 1 domain or input error, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ontoq.hpp"

namespace {

using nlohmann::json;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Output sink: a file, or stdout for "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }
  void close() {
    if (file_) {
      file_->close();
      if (!*file_) throw std::runtime_error("write failed");
    }
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

// "# ontoq schema_version=1 command=... key=value ..." as the first line of every CSV.
std::string csv_config_line(const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string s = "# ontoq schema_version=" + std::to_string(ontoq::schema_version) + " command=" + command;
  for (const auto& [k, v] : kv) s += " " + k + "=" + v;
  return s + "\n";
}

json config_json(const std::string& command, json params) {
  return {{"tool", "ontoq"}, {"schema_version", ontoq::schema_version}, {"command", command}, {"params", std::move(params)}};
}

void write_json(const std::string& path, const json& j) {
  Sink sink(path);
  sink.os() << j.dump(2) << '\n';
  sink.close();
}

// ---- map sources -------------------------------------------------------------

struct MapSourceOptions {
  std::string file;
  std::uint64_t random_n = 0;
  std::uint64_t seed = 0;
  std::string ca;
  std::string rule = "B3/S23";
  unsigned bit_budget = ontoq::default_ca_bit_budget;

  void add_to(CLI::App& app) {
    app.add_option("--map", file, "Map table in OMAP format");
    app.add_option("--random", random_n, "Uniform random map on N states")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Seed for --random")->capture_default_str();
    app.add_option("--ca", ca, "Totalistic cellular automaton on a WxH torus, e.g. 3x3");
    app.add_option("--rule", rule, "Outer totalistic rule for --ca")->capture_default_str();
    app.add_option("--bit-budget", bit_budget, "Largest W*H accepted for --ca")->capture_default_str();
  }

  json describe() const {
    if (!file.empty()) return {{"source", "file"}, {"map", file}};
    if (random_n != 0) return {{"source", "random"}, {"n_states", random_n}, {"seed", seed}};
    return {{"source", "ca"}, {"ca", ca}, {"rule", ontoq::TotalisticRule::parse(rule).to_string()}};
  }

  std::vector<std::pair<std::string, std::string>> describe_kv() const {
    if (!file.empty()) return {{"source", "file"}, {"map", file}};
    if (random_n != 0) return {{"source", "random"}, {"n_states", std::to_string(random_n)}, {"seed", std::to_string(seed)}};
    return {{"source", "ca"}, {"ca", ca}, {"rule", ontoq::TotalisticRule::parse(rule).to_string()}};
  }

  void validate() const {
    const int given = (file.empty() ? 0 : 1) + (random_n == 0 ? 0 : 1) + (ca.empty() ? 0 : 1);
    if (given != 1) throw usage_error("exactly one of --map, --random, --ca is required");
  }

  ontoq::MapTable load() const {
    if (!file.empty()) return ontoq::load_map(file);
    if (random_n != 0) return ontoq::random_map(random_n, seed);
    const auto x = ca.find('x');
    if (x == std::string::npos) throw usage_error("--ca expects WxH, got '" + ca + "'");
    unsigned w = 0, h = 0;
    try {
      w = static_cast<unsigned>(std::stoul(ca.substr(0, x)));
      h = static_cast<unsigned>(std::stoul(ca.substr(x + 1)));
    } catch (const std::logic_error&) {
      throw usage_error("--ca expects WxH, got '" + ca + "'");
    }
    return ontoq::ca_map(w, h, ontoq::TotalisticRule::parse(rule), bit_budget);
  }
};

// ---- subcommands -------------------------------------------------------------

struct CensusCmd {
  std::uint64_t n_states = 0, num_maps = 0, starts = 64, seed = 0;
  std::string mode = "full", out = "-", histogram_csv;
  double h = 1.0, dt = 1.0;

  void add_to(CLI::App& app) {
    app.add_option("--n-states", n_states, "Number of states N")->required()->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 32));
    app.add_option("--num-maps", num_maps, "Number of random maps")->required()->check(CLI::PositiveNumber);
    app.add_option("--mode", mode, "full (decompose every map) or sampled (follow --starts random starts per map)")
        ->check(CLI::IsMember({"full", "sampled", "full-decomposition", "sampled-starts"}))
        ->capture_default_str();
    app.add_option("--starts", starts, "Starts per map in sampled mode")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--seed", seed, "Master seed; map i uses stream i")->capture_default_str();
    app.add_option("--planck", h, "Planck constant used for E = h / (P dt)")->capture_default_str();
    app.add_option("--dt", dt, "Time step")->capture_default_str();
    app.add_option("--out", out, "Output JSON path, - for stdout")->capture_default_str();
    app.add_option("--histogram-csv", histogram_csv, "Also write the period histogram as tidy CSV (P, count, E)");
  }

  int run() const {
    const ontoq::CensusParams params{n_states, num_maps, ontoq::parse_census_mode(mode),
                                     ontoq::parse_census_mode(mode) == ontoq::CensusMode::sampled ? starts : 0, seed};
    const auto census = ontoq::run_census(params);
    const auto summary = ontoq::summarize(census, h, dt);
    json j = ontoq::to_json(summary);
    j["config"] = config_json("census", j["params"]);
    write_json(out, j);
    if (!histogram_csv.empty()) {
      Sink sink(histogram_csv);
      sink.os() << csv_config_line("census", {{"n_states", std::to_string(n_states)},
                                              {"num_maps", std::to_string(num_maps)},
                                              {"mode", ontoq::to_string(params.mode)},
                                              {"starts_per_map", std::to_string(params.starts_per_map)},
                                              {"seed", std::to_string(seed)},
                                              {"h", ontoq::csv::fmt(h)},
                                              {"dt", ontoq::csv::fmt(dt)}});
      sink.os() << "P,count,E\n";
      for (const auto& [p, c] : summary.histogram) sink.os() << p << ',' << c << ',' << ontoq::csv::fmt(ontoq::cycle_energy(p, h, dt)) << '\n';
      sink.close();
    }
    return 0;
  }
};

struct PrequantizeCmd {
  std::string density, out = "-", report;
  std::size_t zeros = 0;
  double beta0 = 0.0;
  bool require_normalized = false;

  void add_to(CLI::App& app) {
    app.add_option("--density", density, "CSV with columns q, W on the grid q_k = 2 pi k / M")->required();
    app.add_option("--zeros", zeros, "Order k of the zero at the origin (psi gains a factor exp(i k q))")->capture_default_str();
    app.add_option("--beta0", beta0, "Free common phase")->capture_default_str();
    app.add_flag("--require-normalized", require_normalized, "Reject densities whose integral differs from 1");
    app.add_option("--out", out, "Output CSV path (q, W, alpha, beta, re_psi, im_psi)")->capture_default_str();
    app.add_option("--report", report, "Also write the spectrum report as JSON");
  }

  int run() const {
    auto in = open_input(density);
    const auto d = ontoq::read_density_csv(in, require_normalized);
    const auto wf = ontoq::synthesize(d, zeros, beta0);
    const auto samples = ontoq::wavefunction_samples(d, wf);
    Sink sink(out);
    sink.os() << csv_config_line("prequantize", {{"density", density},
                                                 {"M", std::to_string(d.grid.size())},
                                                 {"zeros", std::to_string(zeros)},
                                                 {"beta0", ontoq::csv::fmt(beta0)},
                                                 {"require_normalized", require_normalized ? "1" : "0"}});
    ontoq::write_wavefunction_csv(sink.os(), samples);
    sink.close();
    if (!report.empty()) {
      json j = ontoq::to_json(ontoq::spectrum_report(wf));
      j["config"] = config_json("prequantize", {{"density", density},
                                                {"M", d.grid.size()},
                                                {"zeros", zeros},
                                                {"beta0", beta0},
                                                {"require_normalized", require_normalized}});
      write_json(report, j);
    }
    return 0;
  }
};

struct PairSpectrumCmd {
  std::string w1 = "1", w2 = "1", out = "-", sector = "ket";
  std::uint64_t nmax = 0;
  std::optional<std::uint64_t> n2max;

  void add_to(CLI::App& app) {
    app.add_option("--w1", w1, "Frequency of oscillator 1 (rational, e.g. 2/3)")->capture_default_str();
    app.add_option("--w2", w2, "Frequency of oscillator 2 (rational)")->capture_default_str();
    app.add_option("--nmax", nmax, "Largest n1 (and n2 unless --n2max is given)")->required()->check(CLI::Range(0, 100000));
    app.add_option("--n2max", n2max, "Largest n2")->check(CLI::Range(0, 100000));
    app.add_option("--sector", sector, "ket, or bra for the negated mirror")->check(CLI::IsMember({"ket", "bra"}))->capture_default_str();
    app.add_option("--out", out, "Output CSV path (n1, n2, p, q, n, energy_num, energy_den)")->capture_default_str();
  }

  int run() const {
    const auto r1 = ontoq::parse_rational(w1), r2 = ontoq::parse_rational(w2);
    const std::uint64_t m2 = n2max.value_or(nmax);
    auto levels = ontoq::pair_spectrum(r1, r2, nmax, m2);
    if (ontoq::parse_sector(sector) == ontoq::Sector::bra) levels = ontoq::bra_mirror(std::move(levels));
    Sink sink(out);
    sink.os() << csv_config_line("pair-spectrum", {{"w1", ontoq::to_string(r1)},
                                                   {"w2", ontoq::to_string(r2)},
                                                   {"n1max", std::to_string(nmax)},
                                                   {"n2max", std::to_string(m2)},
                                                   {"sector", sector}});
    ontoq::write_pair_spectrum_csv(sink.os(), levels);
    sink.close();
    return 0;
  }
};

struct ClassifyCmd {
  std::uint64_t n1 = 0, n2 = 0;
  bool as_json = false;

  void add_to(CLI::App& app) {
    app.add_option("--n1", n1, "Quantum number of oscillator 1")->required();
    app.add_option("--n2", n2, "Quantum number of oscillator 2")->required();
    app.add_flag("--json", as_json, "Print JSON with the resolved config");
  }

  int run() const {
    const auto l = ontoq::classify({n1, n2, ontoq::Sector::ket});
    if (as_json) {
      json j{{"p", l.p()}, {"q", l.q()}, {"n", l.n()}};
      j["config"] = config_json("classify", {{"n1", n1}, {"n2", n2}});
      std::cout << j.dump(2) << '\n';
    } else {
      std::cout << "p=" << l.p() << " q=" << l.q() << " n=" << l.n() << '\n';
    }
    return 0;
  }
};

struct QuotientCmd {
  MapSourceOptions source;
  std::string out = "-", save_map;

  void add_to(CLI::App& app) {
    source.add_to(app);
    app.add_option("--out", out, "Output JSON path")->capture_default_str();
    app.add_option("--save-map", save_map, "Also write the map table in OMAP format");
  }

  int run() const {
    source.validate();
    const auto map = source.load();
    const auto dec = ontoq::decompose(map);
    const auto q = ontoq::quotient(map, dec);
    json j = ontoq::to_json(ontoq::summarize(map, dec));
    j["recurrent"] = q.recurrent.size();
    j["config"] = config_json("quotient", source.describe());
    write_json(out, j);
    if (!save_map.empty()) ontoq::save_map(save_map, map);
    return 0;
  }
};

struct SpectrumCmd {
  MapSourceOptions source;
  std::string out = "-", convention = "half";
  double h = 1.0, dt = 1.0;
  bool bras = false;

  void add_to(CLI::App& app) {
    source.add_to(app);
    app.add_option("--planck", h, "Planck constant")->capture_default_str();
    app.add_option("--dt", dt, "Time step")->capture_default_str();
    app.add_option("--convention", convention, "half: H = (n + 1/2) E; integer: H = n E")
        ->check(CLI::IsMember({"half", "integer"}))
        ->capture_default_str();
    app.add_flag("--bras", bras, "Also emit the negated bra levels");
    app.add_option("--out", out, "Output CSV path (cycle_id, P, k, phase, E, n, H_value, sector)")->capture_default_str();
  }

  int run() const {
    source.validate();
    if (!(h > 0.0) || !(dt > 0.0)) throw std::invalid_argument("--planck and --dt must be positive");
    const auto map = source.load();
    const auto q = ontoq::quotient(map);
    const auto spec = ontoq::evolution_eigenphases(q.permutation);
    const auto conv = convention == "half" ? ontoq::LevelConvention::half_offset : ontoq::LevelConvention::integer;
    const auto rows = ontoq::spectrum_rows(spec, h, dt, conv, bras);
    auto kv = source.describe_kv();
    kv.insert(kv.end(), {{"h", ontoq::csv::fmt(h)}, {"dt", ontoq::csv::fmt(dt)}, {"convention", convention}, {"bras", bras ? "1" : "0"}});
    Sink sink(out);
    sink.os() << csv_config_line("spectrum", kv);
    ontoq::write_spectrum_csv(sink.os(), rows);
    sink.close();
    return 0;
  }
};

struct ComposeCmd {
  std::string p1, p2;
  bool as_json = false;

  void add_to(CLI::App& app) {
    app.add_option("--p1", p1, "Period of system 1 (rational)")->required();
    app.add_option("--p2", p2, "Period of system 2 (rational)")->required();
    app.add_flag("--json", as_json, "Print JSON with the resolved config");
  }

  int run() const {
    const auto a = ontoq::parse_rational(p1), b = ontoq::parse_rational(p2);
    const auto p = ontoq::compose_periods(a, b);
    if (as_json) {
      json j{{"P12", ontoq::to_string(p)}};
      j["config"] = config_json("compose", {{"p1", ontoq::to_string(a)}, {"p2", ontoq::to_string(b)}});
      std::cout << j.dump(2) << '\n';
    } else {
      std::cout << ontoq::to_string(p) << '\n';
    }
    return 0;
  }
};

struct VacuumCmd {
  double lambda = 0.0, volume = 0.0;
  bool as_json = false;

  void add_to(CLI::App& app) {
    app.add_option("--lambda", lambda, "Cosmological constant in 1/m^2")->required();
    app.add_option("--volume", volume, "Volume in m^3")->required();
    app.add_flag("--json", as_json, "Print JSON with the resolved config");
  }

  int run() const {
    const auto v = ontoq::vacuum_cycle_period(lambda, volume);
    const std::string text = v.infinite ? "inf" : ontoq::csv::fmt(v.seconds);
    if (as_json) {
      json j{{"seconds", v.infinite ? json(nullptr) : json(v.seconds)}, {"infinite", v.infinite}};
      j["config"] = config_json("vacuum-period", {{"lambda", lambda}, {"volume", volume}});
      std::cout << j.dump(2) << '\n';
    } else {
      std::cout << text << '\n';
    }
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ontoq: limit cycles of deterministic maps, their quantum spectra, positive-energy wave functions "
               "and oscillator composition."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  CensusCmd census;
  PrequantizeCmd prequantize;
  PairSpectrumCmd pair;
  ClassifyCmd classify;
  QuotientCmd quotient;
  SpectrumCmd spectrum;
  ComposeCmd compose;
  VacuumCmd vacuum;

  auto* c_census = app.add_subcommand("census", "Limit-cycle statistics of uniform random maps");
  c_census->footer(
      "Expected number of P-cycles per map: E(P) = (1/P) prod_{i<P} (1 - i/N), approximately\n"
      "(1/P) exp(-P^2 / 2N). Energies E = h / (P dt) are distributed as dE/E between\n"
      "E_min ~ h / (sqrt(2N) dt) and E_max = h / dt. gof is a Pearson chi-square of the\n"
      "counts against the exact product. Sampled mode records the period reached from each\n"
      "start; starts already on their cycle are compared with k P E(P) / N.\n"
      "Worker threads: ONTOQ_WORKERS (speed only; results do not depend on it).");
  census.add_to(*c_census);

  auto* c_pre = app.add_subcommand("prequantize", "Positive-energy wave function for a density on the circle");
  c_pre->footer(
      "psi(q) = exp(i beta0) exp(i k q) exp(alpha(q) + i beta(q)), alpha = log(W)/2, beta the\n"
      "harmonic conjugate of alpha (negative Fourier modes of alpha + i beta removed). Then\n"
      "|psi|^2 = W and psi has Fourier modes n >= k only. W must be strictly positive.");
  prequantize.add_to(*c_pre);

  auto* c_pair = app.add_subcommand("pair-spectrum", "Two-oscillator ket spectrum with odd-coprime series labels");
  c_pair->footer(
      "E = (n1 + 1/2) w1 + (n2 + 1/2) w2 = (n + 1/2)(p w1 + q w2) with g = gcd(2n1+1, 2n2+1),\n"
      "p = (2n1+1)/g, q = (2n2+1)/g, n = (g-1)/2. Exact rational arithmetic.");
  pair.add_to(*c_pair);

  auto* c_classify = app.add_subcommand("classify", "Series label (p, q, n) of the state |n1, n2>");
  c_classify->footer("(2n1+1)/(2n2+1) = p/q with p, q odd coprime and 2n+1 = gcd(2n1+1, 2n2+1).");
  classify.add_to(*c_classify);

  auto* c_quot = app.add_subcommand("quotient", "Cycle decomposition and quotient of a map");
  c_quot->footer(
      "States are grouped by the cycle they fall into and their phase on it; the recurrent\n"
      "states carry the induced permutation. Output: {n_states, cycles:[{id, period, members,\n"
      "basin}], checksum}.");
  quotient.add_to(*c_quot);

  auto* c_spec = app.add_subcommand("spectrum", "Eigenphases and energy levels of the quotient evolution");
  c_spec->footer(
      "A P-cycle of U contributes eigenphases 2 pi k / P, k = 0..P-1, with level spacing\n"
      "E = h / (P dt) and H = (k + 1/2) E (or k E with --convention integer).");
  spectrum.add_to(*c_spec);

  auto* c_comp = app.add_subcommand("compose", "Period of two weakly coupled periodic systems");
  c_comp->footer("1/P12 = 1/P1 + 1/P2, evaluated exactly: P12 = P1 P2 / (P1 + P2).");
  compose.add_to(*c_comp);

  auto* c_vac = app.add_subcommand("vacuum-period", "Cycle period of a vacuum region");
  c_vac->footer(
      "P = 8 pi h G / (Lambda V c^4) in SI units; Lambda = 0 prints inf.");
  vacuum.add_to(*c_vac);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_census->parsed()) return census.run();
    if (c_pre->parsed()) return prequantize.run();
    if (c_pair->parsed()) return pair.run();
    if (c_classify->parsed()) return classify.run();
    if (c_quot->parsed()) return quotient.run();
    if (c_spec->parsed()) return spectrum.run();
    if (c_comp->parsed()) return compose.run();
    if (c_vac->parsed()) return vacuum.run();
  } catch (const usage_error& e) {
    std::cerr << "ontoq: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ontoq: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
