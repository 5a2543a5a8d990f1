#pragma once

// Sweep drivers behind the command-line figures: decay-rate maps over the
// period, subradiant dip detection, and guided T/R at the subradiant
// resonance as a function of N.

#include <algorithm>
#include <cmath>
#include <vector>

#include "coldchain/disorder_scaling.hpp"
#include "coldchain/level_shift.hpp"
#include "coldchain/parallel.hpp"
#include "coldchain/spectral.hpp"
#include "coldchain/waveguide_scattering.hpp"

namespace coldchain {

struct DecayMapRow {
  double delta_z = 0.0;
  Eigen::VectorXd gamma;   // spectral order
  Eigen::VectorXd re_lambda;
  Eigen::VectorXd nn_corr;  // zero for N = 1
};

/// Full collective spectrum of a regular chain at each period of the grid.
inline std::vector<DecayMapRow> decay_map(std::size_t n, const std::vector<double>& periods, PolarizationAxis axis,
                                          const CouplingModel& model, unsigned threads = 1) {
  return parallel_map(periods.size(), threads, [&](std::size_t i) {
    const auto arr = regular_chain(n, periods[i], axis, model.environment());
    const auto es = eigensystem(model.sigma(arr));
    DecayMapRow row;
    row.delta_z = periods[i];
    row.gamma = es.decay_rates;
    row.re_lambda = es.lambdas.real();
    row.nn_corr = Eigen::VectorXd::Zero(es.size());
    if (n >= 2)
      for (Eigen::Index j = 0; j < es.size(); ++j) row.nn_corr[j] = nn_correlation(es, j).value;
    return row;
  });
}

/// gamma_min only, on a period grid.
inline std::vector<double> min_decay_curve(std::size_t n, const std::vector<double>& periods, PolarizationAxis axis,
                                           const CouplingModel& model, unsigned threads = 1) {
  return parallel_map(periods.size(), threads,
                      [&](std::size_t i) { return chain_min_decay(n, periods[i], axis, model); });
}

struct Dip {
  double delta_z = 0.0;
  double gamma = 0.0;
  double prominence = 0.0;  // depth in decades of gamma
};

struct DipCriteria {
  double half_window = 0.015;      // must be the lowest point within +-half_window
  double min_prominence = 1.0;     // decades
};

/// Subradiant dips of a gamma_min(delta_z) curve: local minima of log10 gamma
/// that dominate their neighbourhood and stand out by a minimum prominence.
inline std::vector<Dip> find_dips(const std::vector<double>& periods, const std::vector<double>& gamma,
                                  const DipCriteria& crit = {}) {
  if (periods.size() != gamma.size()) throw InvalidArgument("period and gamma arrays differ in length");
  const std::size_t n = gamma.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(gamma[i] > 0.0)) throw InvalidArgument("dip detection needs positive decay rates");
    y[i] = std::log10(gamma[i]);
  }
  std::vector<Dip> dips;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] < y[i - 1] && y[i] <= y[i + 1])) continue;
    bool lowest = true;
    for (std::size_t k = 0; k < n && lowest; ++k)
      if (k != i && std::abs(periods[k] - periods[i]) <= crit.half_window && y[k] < y[i]) lowest = false;
    if (!lowest) continue;
    // topographic prominence of the valley
    double left_max = y[i], right_max = y[i];
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] < y[i]) break;
      left_max = std::max(left_max, y[k]);
    }
    for (std::size_t k = i + 1; k < n; ++k) {
      if (y[k] < y[i]) break;
      right_max = std::max(right_max, y[k]);
    }
    const double prom = std::min(left_max, right_max) - y[i];
    if (prom >= crit.min_prominence) dips.push_back({periods[i], gamma[i], prom});
  }
  return dips;
}

struct ResonanceRow {
  std::size_t n = 0;
  double delta_z = 0.0;
  double gamma_min = 0.0;
  double detuning = 0.0;  // Re lambda of the most subradiant state
  double transmission = 0.0;
  double reflection = 0.0;
};

/// T and R at the most subradiant resonance for each N, with the period
/// optimized per N inside `window`.
inline std::vector<ResonanceRow> resonance_vs_n(const std::vector<std::size_t>& ns, PolarizationAxis axis,
                                                const CouplingModel& model, PeriodWindow window,
                                                unsigned threads = 1) {
  const GuidedMode* mode = model.mode();
  if (!mode) throw InvalidArgument("resonance scan needs a fiber environment");
  return parallel_map(ns.size(), threads, [&](std::size_t i) {
    const std::size_t n = ns[i];
    const auto opt = optimize_period(n, axis, model, window);
    const auto arr = regular_chain(n, opt.delta_z, axis, model.environment());
    const auto sigma = model.sigma(arr);
    const auto es = eigensystem(sigma);
    const double delta = es.lambdas[0].real();
    const auto s = s_matrix_direct(sigma, arr, *mode, {delta});
    return ResonanceRow{n, opt.delta_z, es.decay_rates[0], delta, std::norm(s.forward[0]), std::norm(s.backward[0])};
  });
}

/// Positions of strict interior local minima of a sequence.
inline std::vector<std::size_t> interior_minima(const std::vector<double>& v) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (v[i] < v[i - 1] && v[i] < v[i + 1]) idx.push_back(i);
  return idx;
}

}  // namespace coldchain
