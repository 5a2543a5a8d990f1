#pragma once

// Minimal decay rates, optimal-period search, disorder ensembles and
// power-law fits of gamma_min against N.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coldchain/core_model.hpp"
#include "coldchain/errors.hpp"
#include "coldchain/level_shift.hpp"
#include "coldchain/parallel.hpp"
#include "coldchain/spectral.hpp"

namespace coldchain {

struct MinDecay {
  double gamma_min = 0.0;
  Eigen::Index state_index = 0;  // index in the spectral order, always 0
  double delta_z = 0.0;          // leading period of the array
};

inline MinDecay min_decay(const AtomArray& array, const CouplingModel& model) {
  const auto lambdas = sorted_eigenvalues(model.sigma(array).entries);
  return {-2.0 * lambdas[0].imag(), 0, array.leading_period()};
}

inline MinDecay min_decay(const AtomArray& array) { return min_decay(array, CouplingModel(array.environment())); }

/// gamma_min of a regular chain with the given period.
inline double chain_min_decay(std::size_t n, double period, PolarizationAxis axis, const CouplingModel& model) {
  const auto sigma = model.regular_chain_sigma(n, period, axis);
  return -2.0 * centrosymmetric_eigenvalues(sigma.entries)[0].imag();
}

struct PeriodWindow {
  double lo = 0.05;
  double hi = 0.499;
};

struct OptimizeOptions {
  double coarse_step = 1e-3;
  int coarse_candidates = 4;   // coarse local minima re-scanned finely
  double fine_half_width = 1.5e-3;  // reaches into both neighbouring coarse cells
  double fine_step = 2e-5;
  int refine_candidates = 8;   // fine local minima polished by golden section
  double tolerance = 1e-10;    // golden-section bracket width
};

struct PeriodOptimum {
  double delta_z = 0.0;
  double gamma_min = 0.0;
  double coarse_delta_z = 0.0;
  double coarse_gamma = 0.0;
  bool boundary_warning = false;  // optimum sits at a window edge
};

namespace detail {

struct Sample {
  double x;
  double g;
};

inline std::vector<Sample> scan(double lo, double hi, double step, const auto& f) {
  std::vector<Sample> s;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  s.reserve(count + 1);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    s.push_back({x, f(x)});
  }
  if (hi - s.back().x > 1e-12) s.push_back({hi, f(hi)});
  return s;
}

/// Indices of local minima (edges count when lower than their neighbour), best first.
inline std::vector<std::size_t> local_minima(const std::vector<Sample>& s) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool left = i == 0 || s[i].g <= s[i - 1].g;
    const bool right = i + 1 == s.size() || s[i].g <= s[i + 1].g;
    if (left && right) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a].g < s[b].g; });
  return idx;
}

inline Sample golden_section(double a, double b, double tol, const auto& f) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? Sample{c, fc} : Sample{d, fd};
}

}  // namespace detail

/// Global minimizer of gamma_min over the period window. The dips sharpen
/// quickly with N, so the coarse grid is followed by fine scans around the
/// best coarse minima and golden-section polishing of the best fine minima.
inline PeriodOptimum optimize_period(std::size_t n, PolarizationAxis axis, const CouplingModel& model,
                                     PeriodWindow window = {}, const OptimizeOptions& opt = {}) {
  if (!(window.lo > 0.0) || !(window.hi > window.lo)) throw InvalidArgument("period window must satisfy 0 < lo < hi");
  if (n < 2) throw InvalidArgument("period optimization needs at least two atoms");
  const auto f = [&](double dz) { return chain_min_decay(n, dz, axis, model); };

  const auto coarse = detail::scan(window.lo, window.hi, opt.coarse_step, f);
  const auto coarse_min = detail::local_minima(coarse);
  detail::Sample best = coarse[coarse_min.front()];
  PeriodOptimum out;
  out.coarse_delta_z = best.x;
  out.coarse_gamma = best.g;

  struct Bracket {
    double a, b, g;
  };
  std::vector<Bracket> brackets;
  const int nc = std::min<int>(opt.coarse_candidates, static_cast<int>(coarse_min.size()));
  for (int c = 0; c < nc; ++c) {
    const double x = coarse[coarse_min[c]].x;
    const double lo = std::max(window.lo, x - opt.fine_half_width);
    const double hi = std::min(window.hi, x + opt.fine_half_width);
    const auto fine = detail::scan(lo, hi, opt.fine_step, f);
    for (std::size_t i : detail::local_minima(fine)) {
      if (fine[i].g < best.g) best = fine[i];
      const double a = i == 0 ? fine[i].x : fine[i - 1].x;
      const double b = i + 1 == fine.size() ? fine[i].x : fine[i + 1].x;
      brackets.push_back({a, b, fine[i].g});
    }
  }
  std::sort(brackets.begin(), brackets.end(), [](const Bracket& l, const Bracket& r) { return l.g < r.g; });
  const int nr = std::min<int>(opt.refine_candidates, static_cast<int>(brackets.size()));
  for (int r = 0; r < nr; ++r) {
    if (!(brackets[r].b > brackets[r].a)) continue;
    const auto s = detail::golden_section(brackets[r].a, brackets[r].b, opt.tolerance, f);
    if (s.g < best.g) best = s;
  }
  out.delta_z = best.x;
  out.gamma_min = best.g;
  out.boundary_warning = best.x - window.lo < opt.coarse_step || window.hi - best.x < opt.coarse_step;
  return out;
}

inline PeriodOptimum optimize_period(std::size_t n, PolarizationAxis axis, const Environment& env,
                                     PeriodWindow window = {}, const OptimizeOptions& opt = {}) {
  return optimize_period(n, axis, CouplingModel(env), window, opt);
}

struct ScalingFit {
  double alpha = 0.0;
  double stderr_alpha = 0.0;
  double intercept = 0.0;  // ln gamma at N = 1
  double r_squared = 0.0;
  std::vector<double> residuals;  // ln gamma - fit, for the in-window points
  std::size_t points_used = 0;
  std::pair<double, double> window{0.0, 0.0};
};

/// Least-squares slope of ln gamma against ln N over points with N in [lo, hi].
inline ScalingFit scaling_exponent(const std::vector<std::pair<double, double>>& points, std::pair<double, double> window) {
  std::vector<double> x, y;
  for (const auto& [n, g] : points) {
    if (n < window.first || n > window.second) continue;
    if (!(g > 0.0) || !(n > 0.0)) throw InvalidArgument("scaling fit needs positive N and gamma");
    x.push_back(std::log(n));
    y.push_back(std::log(g));
  }
  if (x.size() < 3) throw InsufficientData("scaling fit needs at least three points inside the window");
  const double m = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientData("scaling fit needs at least two distinct N values");
  ScalingFit fit;
  fit.alpha = sxy / sxx;
  fit.intercept = my - fit.alpha * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.alpha * x[i]);
    fit.residuals.push_back(r);
    ssr += r * r;
  }
  fit.stderr_alpha = std::sqrt(ssr / (m - 2.0) / sxx);
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  fit.points_used = x.size();
  fit.window = window;
  return fit;
}

struct ScalingResult {
  std::vector<std::size_t> n_values;
  std::vector<double> gamma_min;
  std::vector<double> delta_z_used;
  ScalingFit fit;
};

struct EnsembleStats {
  double gamma_ave = 0.0;
  double gamma_std = 0.0;  // sample standard deviation over realizations
  double ipr_mean = 0.0;   // of the min-gamma state; 0 when not requested
  double ipr_std = 0.0;
  std::size_t realizations = 0;
};

namespace detail {
// Sorting first makes the aggregate independent of realization order.
inline std::pair<double, double> mean_std(std::vector<double> v) {
  if (v.empty()) return {0.0, 0.0};
  if (std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); })) return {v.front(), 0.0};
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double a : v) ss += (a - mean) * (a - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}
}  // namespace detail

struct EnsembleOptions {
  PolarizationAxis axis = PolarizationAxis::TransverseX;
  bool with_ipr = true;
  unsigned threads = 1;
};

/// Ensemble over seeded disordered chains; realization r uses derive_seed(seed, r).
inline EnsembleStats disorder_ensemble(std::size_t n, double delta_z_reg, double delta_a, std::size_t n_realizations,
                                       std::uint64_t seed, const CouplingModel& model, const EnsembleOptions& opt = {}) {
  if (n_realizations < 1) throw InvalidArgument("ensemble needs at least one realization");
  struct One {
    double gamma = 0.0;
    double ipr = 0.0;
  };
  const auto results = parallel_map(n_realizations, opt.threads, [&](std::size_t r) {
    const auto arr = disordered_chain(n, delta_z_reg, delta_a, derive_seed(seed, r), opt.axis, model.environment());
    const auto sigma = model.sigma(arr);
    One o;
    if (opt.with_ipr) {
      const auto es = eigensystem(sigma);
      o.gamma = es.decay_rates[0];
      o.ipr = ipr(es, 0);
    } else {
      o.gamma = -2.0 * sorted_eigenvalues(sigma.entries)[0].imag();
    }
    return o;
  });
  std::vector<double> g, p;
  for (const auto& o : results) {
    g.push_back(o.gamma);
    p.push_back(o.ipr);
  }
  EnsembleStats st;
  std::tie(st.gamma_ave, st.gamma_std) = detail::mean_std(g);
  if (opt.with_ipr) std::tie(st.ipr_mean, st.ipr_std) = detail::mean_std(p);
  st.realizations = n_realizations;
  return st;
}

inline EnsembleStats disorder_ensemble(std::size_t n, double delta_z_reg, double delta_a, std::size_t n_realizations,
                                       std::uint64_t seed, const Environment& env = Vacuum{},
                                       const EnsembleOptions& opt = {}) {
  return disorder_ensemble(n, delta_z_reg, delta_a, n_realizations, seed, CouplingModel(env), opt);
}

struct TwoSegmentFit {
  double transition_n = 0.0;  // first N of the large-N segment
  ScalingFit small;
  ScalingFit large;
  double residual = 0.0;  // total squared log residual
};

/// Split point minimizing the summed residual of two independent log-log lines.
inline TwoSegmentFit two_segment_fit(std::vector<std::pair<double, double>> points) {
  std::sort(points.begin(), points.end());
  if (points.size() < 6) throw InsufficientData("two-segment fit needs at least six points");
  TwoSegmentFit best;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::size_t k = 3; k + 3 <= points.size(); ++k) {
    const auto a = scaling_exponent({points.begin(), points.begin() + k}, {points.front().first, points[k - 1].first});
    const auto b = scaling_exponent({points.begin() + k, points.end()}, {points[k].first, points.back().first});
    double r = 0.0;
    for (double e : a.residuals) r += e * e;
    for (double e : b.residuals) r += e * e;
    if (r < best.residual) best = {points[k].first, a, b, r};
  }
  return best;
}

}  // namespace coldchain
