#pragma once

// Command-line driver: configuration, sweep orchestration and CSV/JSON
// output. Kept header-only so the commands can be exercised in-process.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coldchain/core_model.hpp"
#include "coldchain/disorder_scaling.hpp"
#include "coldchain/level_shift.hpp"
#include "coldchain/spectral.hpp"
#include "coldchain/sweeps.hpp"
#include "coldchain/waveguide_scattering.hpp"

namespace coldchain::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kCompute = 3 };

/// Output file could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- parsing

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  std::string tmp(s);
  std::size_t used = 0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tmp.size() || tmp.empty() || !std::isfinite(v))
    throw InvalidArgument(std::string(what) + ": '" + tmp + "' is not a finite number");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

/// "a:b:step" -> a, a+step, ..., up to b inclusive.
inline std::vector<double> parse_range(std::string_view s, std::string_view what) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw InvalidArgument(std::string(what) + " must look like start:stop:step");
  const double a = parse_double(parts[0], what), b = parse_double(parts[1], what), st = parse_double(parts[2], what);
  if (!(st > 0.0) || b < a) throw InvalidArgument(std::string(what) + " needs step > 0 and stop >= start");
  const auto count = static_cast<std::size_t>(std::floor((b - a) / st + 1e-9)) + 1;
  if (count > 10'000'000) throw InvalidArgument(std::string(what) + " has too many points");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = a + static_cast<double>(i) * st;
  return v;
}

inline std::vector<std::size_t> parse_count_range(std::string_view s, std::string_view what) {
  std::vector<std::size_t> out;
  for (double x : parse_range(s, what)) {
    if (x < 1.0 || x != std::floor(x)) throw InvalidArgument(std::string(what) + " must contain positive integers");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

inline std::pair<double, double> parse_pair(std::string_view s, std::string_view what) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) throw InvalidArgument(std::string(what) + " must look like lo:hi");
  const double lo = parse_double(parts[0], what), hi = parse_double(parts[1], what);
  if (!(hi > lo)) throw InvalidArgument(std::string(what) + " needs hi > lo");
  return {lo, hi};
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------- config

struct RunConfig {
  std::string command;
  // geometry
  std::size_t n = 10;
  std::string n_range;
  std::optional<double> dz;
  std::string dz_range = "0.05:0.499:0.001";
  std::string axis = "transverse";
  std::string env = "vacuum";
  double fiber_radius = 0.25;
  double fiber_eps = 2.1;
  double atom_offset = 0.25;
  bool bragg = false;
  std::string period_window;  // empty: command default
  // spectrum
  double delta_min = -3.0;
  double delta_max = 3.0;
  std::size_t delta_points = 1201;
  std::string photon = "axial";
  // disorder
  double delta_a = 0.0;
  std::size_t realizations = 200;
  std::uint64_t seed = 12345;
  // fits
  std::string fit_window = "20:100";
  // output
  unsigned threads = 0;
  std::string out = "-";
  std::string format = "csv";
  std::string summary;
  bool quiet = false;

  PolarizationAxis polarization() const {
    if (axis == "transverse") return PolarizationAxis::TransverseX;
    if (axis == "longitudinal") return PolarizationAxis::LongitudinalZ;
    throw InvalidArgument("--axis must be transverse or longitudinal");
  }

  Environment environment() const {
    if (env == "vacuum") return Vacuum{};
    if (env == "fiber") return FiberGeometry(fiber_radius, fiber_eps, atom_offset);
    throw InvalidArgument("--env must be vacuum or fiber");
  }

  PeriodWindow window() const {
    if (period_window.empty())
      return command == "fiber-spectrum" ? PeriodWindow{0.2, 0.26} : PeriodWindow{};
    const auto [lo, hi] = parse_pair(period_window, "--period-window");
    return {lo, hi};
  }

  std::vector<double> detuning_grid() const {
    if (delta_points < 2) throw InvalidArgument("--delta-points must be >= 2");
    if (!(delta_max > delta_min)) throw InvalidArgument("--delta-max must exceed --delta-min");
    std::vector<double> g(delta_points);
    for (std::size_t i = 0; i < delta_points; ++i)
      g[i] = delta_min + (delta_max - delta_min) * static_cast<double>(i) / static_cast<double>(delta_points - 1);
    return g;
  }

  Vec3 photon_wavevector() const {
    if (photon == "axial") return units::k0 * Vec3::UnitZ();
    if (photon == "perpendicular") return units::k0 * Vec3::UnitY();
    throw InvalidArgument("--photon must be axial or perpendicular");
  }

  /// Resolved configuration echoed into every output header.
  std::vector<std::pair<std::string, std::string>> resolved() const {
    std::vector<std::pair<std::string, std::string>> r{
        {"command", command},
        {"n", std::to_string(n)},
        {"n-range", n_range},
        {"dz", dz ? format_double(*dz) : std::string()},
        {"dz-range", dz_range},
        {"axis", axis},
        {"env", env},
        {"fiber-radius", format_double(fiber_radius)},
        {"fiber-eps", format_double(fiber_eps)},
        {"atom-offset", format_double(atom_offset)},
        {"bragg", bragg ? "true" : "false"},
        {"period-window", format_double(window().lo) + ":" + format_double(window().hi)},
        {"delta-min", format_double(delta_min)},
        {"delta-max", format_double(delta_max)},
        {"delta-points", std::to_string(delta_points)},
        {"photon", photon},
        {"delta-a", format_double(delta_a)},
        {"realizations", std::to_string(realizations)},
        {"seed", std::to_string(seed)},
        {"fit-window", fit_window},
        {"format", format},
    };
    return r;
  }
};

/// key = value lines; [section] headers group keys and are otherwise ignored.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineno = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidArgument(path + ":" + std::to_string(lineno) + ": malformed section header");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key = value");
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

// ---------------------------------------------------------------- datasets

struct Dataset {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
};

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline constexpr std::string_view kUnitsLine =
    "lengths in lambda0; detunings, shifts and rates in gamma0; cross sections in lambda0^2; k0 = 2 pi";

inline void write_csv(std::ostream& os, const Dataset& d) {
  os << "# coldchain " << kVersion << "\n";
  os << "# command: " << d.command << "\n";
  for (const auto& [k, v] : d.config) os << "# config " << k << " = " << v << "\n";
  os << "# seed: " << d.seed << "\n";
  os << "# units: " << kUnitsLine << "\n";
  if (!d.summary.empty()) os << "# summary: " << d.summary.dump() << "\n";
  for (std::size_t c = 0; c < d.columns.size(); ++c) os << (c ? "," : "") << csv_field(d.columns[c]);
  os << "\n";
  for (const auto& row : d.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
    os << "\n";
  }
}

inline nlohmann::json to_json(const Dataset& d) {
  nlohmann::json j;
  j["tool"] = "coldchain";
  j["version"] = std::string(kVersion);
  j["command"] = d.command;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : d.config) cfg[k] = v;
  j["config"] = cfg;
  j["seed"] = d.seed;
  j["units"] = std::string(kUnitsLine);
  j["columns"] = d.columns;
  j["rows"] = d.rows;
  j["summary"] = d.summary;
  return j;
}

inline void write_json(std::ostream& os, const Dataset& d) { os << to_json(d).dump(1) << "\n"; }

// ---------------------------------------------------------------- commands

namespace detail {

inline Dataset start(const RunConfig& cfg, std::vector<std::string> columns) {
  Dataset d;
  d.command = cfg.command;
  d.columns = std::move(columns);
  d.config = cfg.resolved();
  d.seed = cfg.seed;
  return d;
}

inline void progress(const RunConfig& cfg, const std::string& msg) {
  if (!cfg.quiet) std::cerr << "coldchain " << cfg.command << ": " << msg << "\n";
}

inline double chain_period(const RunConfig& cfg, const CouplingModel& model, std::size_t n, PolarizationAxis axis) {
  if (cfg.bragg) {
    if (!model.mode()) throw InvalidArgument("--bragg needs --env fiber");
    return std::numbers::pi / model.mode()->beta;
  }
  if (cfg.dz) return *cfg.dz;
  if (n < 2) return 0.3;
  return optimize_period(n, axis, model, cfg.window()).delta_z;
}

}  // namespace detail

inline Dataset cmd_decay_scan(const RunConfig& cfg) {
  const auto axis = cfg.polarization();
  const CouplingModel model(cfg.environment());
  const auto periods = parse_range(cfg.dz_range, "--dz-range");
  detail::progress(cfg, std::to_string(periods.size()) + " periods, N = " + std::to_string(cfg.n));
  const auto map = decay_map(cfg.n, periods, axis, model, resolve_threads(cfg.threads));
  auto d = detail::start(cfg, {"delta_z", "state_index", "gamma_over_gamma0", "re_lambda", "nn_correlation"});
  std::vector<double> gmin;
  for (const auto& row : map) {
    for (Eigen::Index j = 0; j < row.gamma.size(); ++j)
      d.rows.push_back({row.delta_z, static_cast<double>(j), row.gamma[j], row.re_lambda[j], row.nn_corr[j]});
    gmin.push_back(row.gamma[0]);
  }
  if (periods.size() >= 3 && cfg.n >= 2) {
    nlohmann::json dips = nlohmann::json::array();
    for (const auto& dip : find_dips(periods, gmin))
      dips.push_back({{"delta_z", dip.delta_z}, {"gamma_min", dip.gamma}, {"prominence_decades", dip.prominence}});
    d.summary["dips"] = dips;
  }
  if (const auto* mode = model.mode()) d.summary["beta"] = mode->beta;
  return d;
}

inline Dataset cmd_cross_section(const RunConfig& cfg) {
  const auto axis = cfg.polarization();
  const CouplingModel model(cfg.environment());
  const double dz = cfg.dz ? *cfg.dz : (cfg.bragg ? detail::chain_period(cfg, model, cfg.n, axis) : 0.23);
  const auto arr = regular_chain(cfg.n, dz, axis, model.environment());
  const auto es = eigensystem(model.sigma(arr));
  const Vec3 k = cfg.photon_wavevector();
  const auto f = oscillator_strengths(es, arr, k);
  const auto grid = cfg.detuning_grid();
  const auto spec = cross_section_expanded(es, f, grid);
  std::vector<std::string> cols{"delta", "sigma_total", "sigma_norm"};
  for (Eigen::Index j = 0; j < es.size(); ++j) cols.push_back("sigma_" + std::to_string(j + 1));
  auto d = detail::start(cfg, cols);
  const double norm = units::k0 * units::k0 / static_cast<double>(cfg.n);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> row{grid[g], spec.total[g], spec.total[g] * norm};
    for (Eigen::Index j = 0; j < es.size(); ++j) row.push_back(spec.partials(static_cast<Eigen::Index>(g), j));
    d.rows.push_back(std::move(row));
  }
  nlohmann::json states = nlohmann::json::array();
  for (Eigen::Index j = 0; j < es.size(); ++j)
    states.push_back({{"gamma", es.decay_rates[j]},
                      {"re_lambda", es.lambdas[j].real()},
                      {"f_re", f[j].real()},
                      {"f_im", f[j].imag()}});
  d.summary["delta_z"] = dz;
  d.summary["states"] = states;
  d.summary["degenerate"] = es.degenerate;
  return d;
}

inline Dataset cmd_fiber_spectrum(const RunConfig& cfg) {
  if (cfg.env != "fiber") throw InvalidArgument("fiber-spectrum needs --env fiber");
  const auto axis = cfg.polarization();
  const CouplingModel model(cfg.environment());
  const GuidedMode& mode = *model.mode();
  if (!cfg.n_range.empty()) {
    const auto ns = parse_count_range(cfg.n_range, "--n-range");
    detail::progress(cfg, "resonance scan over " + std::to_string(ns.size()) + " chain lengths");
    const auto rows = resonance_vs_n(ns, axis, model, cfg.window(), resolve_threads(cfg.threads));
    auto d = detail::start(cfg, {"n", "delta_z", "gamma_min", "delta_resonance", "T_at_resonance", "R_at_resonance"});
    std::vector<double> t;
    for (const auto& r : rows) {
      d.rows.push_back({static_cast<double>(r.n), r.delta_z, r.gamma_min, r.detuning, r.transmission, r.reflection});
      t.push_back(r.transmission);
    }
    nlohmann::json minima = nlohmann::json::array();
    for (std::size_t i : interior_minima(t)) minima.push_back(rows[i].n);
    d.summary["T_local_minima_n"] = minima;
    d.summary["beta"] = mode.beta;
    return d;
  }
  const double dz = detail::chain_period(cfg, model, cfg.n, axis);
  const auto arr = regular_chain(cfg.n, dz, axis, model.environment());
  const auto es = eigensystem(model.sigma(arr));
  const auto cs = channel_strengths(es, arr, mode);
  const auto grid = cfg.detuning_grid();
  const auto t = transmission_spectrum(cs, es, grid);
  const auto r = reflection_spectrum(cs, es, grid);
  auto d = detail::start(cfg, {"delta", "T", "R"});
  for (std::size_t g = 0; g < grid.size(); ++g) d.rows.push_back({grid[g], t.total[g], r.total[g]});
  d.summary["delta_z"] = dz;
  d.summary["beta"] = mode.beta;
  d.summary["gamma_wg_forward"] = cs.gamma_f;
  d.summary["gamma_min"] = es.decay_rates[0];
  d.summary["delta_resonance"] = es.lambdas[0].real();
  return d;
}

inline Dataset cmd_scaling(const RunConfig& cfg) {
  if (cfg.n_range.empty()) throw InvalidArgument("scaling needs --n-range");
  const auto axis = cfg.polarization();
  const CouplingModel model(cfg.environment());
  const auto ns = parse_count_range(cfg.n_range, "--n-range");
  const unsigned threads = resolve_threads(cfg.threads);
  const bool disorder = cfg.delta_a > 0.0;
  detail::progress(cfg, std::to_string(ns.size()) + " chain lengths" + (disorder ? ", with disorder" : ""));
  struct Point {
    double dz, gmin, gave, ipr;
  };
  // Outer loop over N runs in parallel only when the inner ensemble does not.
  const auto points = parallel_map(ns.size(), disorder ? 1u : threads, [&](std::size_t i) {
    const std::size_t n = ns[i];
    Point p{};
    if (cfg.dz) {
      p.dz = *cfg.dz;
      p.gmin = chain_min_decay(n, p.dz, axis, model);
    } else {
      const auto opt = optimize_period(n, axis, model, cfg.window());
      p.dz = opt.delta_z;
      p.gmin = opt.gamma_min;
    }
    if (disorder) {
      EnsembleOptions eo;
      eo.axis = axis;
      eo.threads = threads;
      const auto st = disorder_ensemble(n, p.dz, cfg.delta_a, cfg.realizations, derive_seed(cfg.seed, n), model, eo);
      p.gave = st.gamma_ave;
      p.ipr = st.ipr_mean;
    } else {
      const auto es = eigensystem(model.regular_chain_sigma(n, p.dz, axis));
      p.gave = p.gmin;
      p.ipr = ipr(es, 0);
    }
    return p;
  });
  auto d = detail::start(cfg, {"n", "delta_z_used", "gamma_min", "gamma_ave", "ipr_mean"});
  std::vector<std::pair<double, double>> fit_points;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto& p = points[i];
    d.rows.push_back({static_cast<double>(ns[i]), p.dz, p.gmin, p.gave, p.ipr});
    fit_points.emplace_back(static_cast<double>(ns[i]), p.gave);
  }
  const auto window = parse_pair(cfg.fit_window, "--fit-window");
  try {
    const auto fit = scaling_exponent(fit_points, window);
    d.summary["alpha"] = fit.alpha;
    d.summary["stderr"] = fit.stderr_alpha;
    d.summary["r_squared"] = fit.r_squared;
    d.summary["points_used"] = fit.points_used;
    d.summary["fit_window"] = {window.first, window.second};
  } catch (const InsufficientData& e) {
    d.summary["fit_error"] = e.what();
  }
  if (disorder && fit_points.size() >= 6) {
    const auto two = two_segment_fit(fit_points);
    d.summary["transition_n"] = two.transition_n;
    d.summary["alpha_small_n"] = two.small.alpha;
    d.summary["alpha_large_n"] = two.large.alpha;
  }
  return d;
}

inline Dataset cmd_disorder_scan(const RunConfig& cfg) {
  const auto axis = cfg.polarization();
  const CouplingModel model(cfg.environment());
  const auto periods = parse_range(cfg.dz_range, "--dz-range");
  const unsigned threads = resolve_threads(cfg.threads);
  detail::progress(cfg, std::to_string(periods.size()) + " periods x " + std::to_string(cfg.realizations) +
                            " realizations");
  auto d = detail::start(cfg, {"delta_z_reg", "gamma_regular", "gamma_ave", "gamma_std", "ipr_mean"});
  EnsembleOptions eo;
  eo.axis = axis;
  eo.threads = threads;
  for (std::size_t i = 0; i < periods.size(); ++i) {
    const auto st = disorder_ensemble(cfg.n, periods[i], cfg.delta_a, cfg.realizations, derive_seed(cfg.seed, i),
                                      model, eo);
    d.rows.push_back({periods[i], chain_min_decay(cfg.n, periods[i], axis, model), st.gamma_ave, st.gamma_std,
                      st.ipr_mean});
  }
  return d;
}

inline Dataset dispatch(const RunConfig& cfg) {
  if (cfg.command == "decay-scan") return cmd_decay_scan(cfg);
  if (cfg.command == "cross-section") return cmd_cross_section(cfg);
  if (cfg.command == "fiber-spectrum") return cmd_fiber_spectrum(cfg);
  if (cfg.command == "scaling") return cmd_scaling(cfg);
  if (cfg.command == "disorder-scan") return cmd_disorder_scan(cfg);
  throw InvalidArgument("unknown command '" + cfg.command + "'");
}

inline void emit(const Dataset& d, const RunConfig& cfg, std::ostream& stdout_stream) {
  const auto write = [&](std::ostream& os) {
    if (cfg.format == "json")
      write_json(os, d);
    else
      write_csv(os, d);
  };
  if (cfg.out.empty() || cfg.out == "-") {
    write(stdout_stream);
  } else {
    // write to a temporary file first so a failed run never leaves a truncated table
    const std::string tmp = cfg.out + ".partial";
    {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw IoError("cannot open '" + cfg.out + "' for writing");
      write(os);
      os.flush();
      if (!os) throw IoError("failed while writing '" + cfg.out + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, cfg.out, ec);
    if (ec) throw IoError("cannot move output into place at '" + cfg.out + "': " + ec.message());
  }
  if (!cfg.summary.empty()) {
    std::ofstream os(cfg.summary, std::ios::trunc);
    nlohmann::json s = d.summary;
    s["command"] = d.command;
    s["version"] = std::string(kVersion);
    if (!os || !(os << s.dump(1) << "\n")) throw IoError("cannot write summary '" + cfg.summary + "'");
  }
}

// ---------------------------------------------------------------- entry point

inline void add_shared_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--n", cfg.n, "number of atoms")->check(CLI::PositiveNumber);
  sub->add_option("--n-range", cfg.n_range, "atom counts start:stop:step");
  sub->add_option_function<double>("--dz", [&cfg](const double& v) { cfg.dz = v; }, "chain period (lambda0)");
  sub->add_option("--dz-range", cfg.dz_range, "periods start:stop:step (lambda0)");
  sub->add_option("--axis", cfg.axis, "dipole axis")->check(CLI::IsMember({"transverse", "longitudinal"}));
  sub->add_option("--env", cfg.env, "coupling environment")->check(CLI::IsMember({"vacuum", "fiber"}));
  sub->add_option("--fiber-radius", cfg.fiber_radius, "fiber radius (lambda0)");
  sub->add_option("--fiber-eps", cfg.fiber_eps, "fiber permittivity");
  sub->add_option("--atom-offset", cfg.atom_offset, "atom distance from the fiber surface (lambda0)");
  sub->add_flag("--bragg", cfg.bragg, "use the Bragg period pi / beta");
  sub->add_option("--period-window", cfg.period_window, "period search window lo:hi (lambda0)");
  sub->add_option("--delta-min", cfg.delta_min, "lowest detuning (gamma0)");
  sub->add_option("--delta-max", cfg.delta_max, "highest detuning (gamma0)");
  sub->add_option("--delta-points", cfg.delta_points, "detuning grid points");
  sub->add_option("--photon", cfg.photon, "incident photon direction")->check(CLI::IsMember({"axial", "perpendicular"}));
  sub->add_option("--delta-a", cfg.delta_a, "disorder amplitude delta a (lambda0)");
  sub->add_option("--realizations", cfg.realizations, "disorder realizations")->check(CLI::PositiveNumber);
  sub->add_option("--seed", cfg.seed, "master seed");
  sub->add_option("--fit-window", cfg.fit_window, "N window lo:hi of the power-law fit");
  sub->add_option("--threads", cfg.threads, "worker threads (default: COLDCHAIN_THREADS or all cores)");
  sub->add_option("--out", cfg.out, "output path, '-' for stdout");
  sub->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--summary", cfg.summary, "also write the JSON summary to this path");
  sub->add_flag("--quiet", cfg.quiet, "no progress messages");
  sub->add_option("--config", "key = value file; command-line flags win")->type_name("FILE");
}

inline constexpr std::array<std::string_view, 5> kCommands{"decay-scan", "cross-section", "fiber-spectrum", "scaling",
                                                          "disorder-scan"};

/// Replaces --config FILE by the file's entries, each added as a flag unless
/// that flag is already on the command line. A `command` key supplies the
/// subcommand when none is given.
inline std::vector<std::string> merge_config_args(const std::vector<std::string>& args) {
  std::string path;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw InvalidArgument("--config needs a file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (path.empty()) return out;
  const auto present = [&](const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& a : out)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  const bool has_command = std::any_of(out.begin(), out.end(), [](const std::string& a) {
    return std::find(kCommands.begin(), kCommands.end(), a) != kCommands.end();
  });
  for (const auto& [key, value] : read_config_file(path)) {
    if (key == "command") {
      if (!has_command) out.insert(out.begin(), value);
      continue;
    }
    if (key == "config") throw InvalidArgument("config files cannot include other config files");
    if (present(key)) continue;
    if (key == "bragg" || key == "quiet") {
      if (value == "true" || value == "1" || value == "yes") out.push_back("--" + key);
      continue;
    }
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

inline int run(const std::vector<std::string>& argv_in, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"coldchain: collective decay, cross sections and guided spectra of 1D atom chains"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  const std::array<std::string_view, kCommands.size()> help{
      "collective decay rates versus chain period",
      "partial and total scattering cross sections",
      "guided transmission and reflection",
      "minimal decay rate versus N with power-law fit",
      "disorder-averaged minimal decay versus regular period",
  };
  for (std::size_t c = 0; c < kCommands.size(); ++c)
    add_shared_options(app.add_subcommand(std::string(kCommands[c]), std::string(help[c])), cfg);
  app.add_option("--config", "key = value file; command-line flags win")->type_name("FILE");

  std::vector<std::string> args;
  try {
    std::vector<std::string> raw(argv_in.begin() + (argv_in.empty() ? 0 : 1), argv_in.end());
    args = merge_config_args(raw);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());  // CLI11 consumes from the back
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  for (const auto* sub : app.get_subcommands()) cfg.command = sub->get_name();

  Dataset d;
  try {
    d = dispatch(cfg);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "computation failed: " << e.what() << "\n";
    return kCompute;
  }
  try {
    emit(d, cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args);
}

}  // namespace coldchain::cli
