#pragma once

// Integer-order cylinder functions of complex argument: J_n, Y_n, H^(1)_n
// and their derivatives with respect to the argument.
//
// J_n comes from Miller's backward recurrence normalized by the generating
// function. H^(1)_0 and H^(1)_1 are evaluated in one of three regimes
// (asymptotic expansion, integral representation of K_nu, Neumann series)
// and continued upward by forward recurrence, which is stable for H.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "coldchain/errors.hpp"

namespace coldchain {

using cplx = std::complex<double>;

struct CylFunValue {
  cplx value;
  cplx derivative;
};

inline constexpr int kMaxBesselOrder = 50;

namespace detail {

inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr double kMaxImag = 700.0;

inline void check_cyl_args(int n, cplx x) {
  if (std::abs(n) > kMaxBesselOrder) throw InvalidArgument("Bessel order exceeds the supported bound |n| <= 50");
  if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw InvalidArgument("Bessel argument is not finite");
  if (std::abs(x.imag()) > kMaxImag) throw RangeError("Bessel argument imaginary part too large (|Im x| > 700)");
}

/// J_0..J_nmax by Miller's algorithm. Also returns enough extra orders for
/// the Neumann series when `extra` is true.
inline std::vector<cplx> bessel_j_table(int nmax, cplx x) {
  std::vector<cplx> out(static_cast<std::size_t>(nmax) + 1, cplx(0.0));
  const double ax = std::abs(x);
  if (ax == 0.0) {
    out[0] = 1.0;
    return out;
  }
  int m = static_cast<int>(std::ceil(std::max<double>(nmax, ax) + 8.0 * std::cbrt(ax) + 20.0));
  if (m % 2) ++m;
  std::vector<cplx> j(static_cast<std::size_t>(m) + 2, cplx(0.0));
  j[m + 1] = 0.0;
  j[m] = 1e-300;
  const cplx two_over_x = 2.0 / x;
  for (int k = m; k >= 1; --k) {
    j[k - 1] = two_over_x * static_cast<double>(k) * j[k] - j[k + 1];
    if (std::abs(j[k - 1]) > 1e250) {
      for (int r = k - 1; r <= m + 1; ++r) j[r] *= 1e-250;
    }
  }
  // Generating function at t = -i (Im x >= 0) or t = +i keeps the sum from cancelling.
  const bool upper = x.imag() >= 0.0;
  const cplx unit = upper ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
  cplx sum = 0.0;
  cplx phase = 1.0;
  for (int k = 1; k <= m; ++k) {
    phase *= unit;
    sum += phase * j[k];
  }
  sum = j[0] + 2.0 * sum;
  const cplx target = upper ? std::exp(cplx(0.0, -1.0) * x) : std::exp(cplx(0.0, 1.0) * x);
  const cplx scale = target / sum;
  for (int k = 0; k <= nmax; ++k) out[k] = j[k] * scale;
  return out;
}

inline cplx bessel_j_single(int n, cplx x) {
  const int an = std::abs(n);
  const cplx v = bessel_j_table(an, x)[an];
  return (n < 0 && (an % 2)) ? -v : v;
}

// H_nu(z) ~ sqrt(2/(pi z)) exp(i(z - nu pi/2 - pi/4)) sum_k i^k a_k(nu) / z^k
inline cplx hankel1_asymptotic(int nu, cplx z) {
  const double mu = 4.0 * nu * nu;
  cplx sum = 1.0;
  cplx term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 80; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= cplx(0.0, 1.0) * (mu - odd * odd) / (8.0 * k) / z;
    const double mag = std::abs(term);
    if (mag > last) break;
    sum += term;
    last = mag;
    if (mag < 1e-17 * std::abs(sum)) break;
  }
  const double pi = std::numbers::pi;
  return std::sqrt(2.0 / (pi * z)) * std::exp(cplx(0.0, 1.0) * (z - nu * pi / 2.0 - pi / 4.0)) * sum;
}

// K_0(w), K_1(w) for Re w > 0 from K_nu(w) = int_0^inf exp(-w cosh t) cosh(nu t) dt.
// Trapezoid rule; the step follows the width of the analyticity strip.
inline void bessel_k01_integral(cplx w, cplx& k0, cplx& k1) {
  const double d = std::numbers::pi / 2.0 - std::abs(std::arg(w));
  const double h = std::min(0.25, std::numbers::pi * d / 40.0);
  const double rew = w.real();
  // exp(-Re w (cosh t - 1)) < 1e-18 beyond t_max
  const double t_max = std::acosh(1.0 + 42.0 / rew);
  const cplx ref = std::exp(-w);
  cplx s0 = 0.5 * std::exp(-w) / ref;  // t = 0 endpoint weight 1/2
  cplx s1 = s0;
  const int steps = static_cast<int>(std::ceil(t_max / h));
  for (int i = 1; i <= steps; ++i) {
    const double t = i * h;
    const cplx e = std::exp(-w * (std::cosh(t) - 1.0));
    s0 += e;
    s1 += e * std::cosh(t);
  }
  k0 = s0 * h * ref;
  k1 = s1 * h * ref;
}

// Neumann series for Y_0, Y_1 given a table of J_k.
inline void bessel_y01_neumann(cplx x, const std::vector<cplx>& j, cplx& y0, cplx& y1) {
  const double pi = std::numbers::pi;
  const cplx lg = std::log(x / 2.0) + kEulerGamma;
  cplx s0 = 0.0;
  cplx s1 = 0.0;
  const int kmax = (static_cast<int>(j.size()) - 2) / 2;
  for (int k = 1; k <= kmax; ++k) {
    const double sign = (k % 2) ? -1.0 : 1.0;
    s0 += sign * j[2 * k] / static_cast<double>(k);
    s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / static_cast<double>(k);
  }
  y0 = (2.0 / pi) * lg * j[0] - (4.0 / pi) * s0;
  y1 = (2.0 / pi) * lg * j[1] - (2.0 / pi) * j[0] / x + (2.0 / pi) * s1;
}

inline void hankel1_01(cplx x, cplx& h0, cplx& h1) {
  const double ax = std::abs(x);
  if (ax >= 17.0 && (x.imag() >= 0.0 || x.real() >= 0.0)) {
    h0 = hankel1_asymptotic(0, x);
    h1 = hankel1_asymptotic(1, x);
    return;
  }
  if (x.imag() > 1.5 && ax < 17.0) {
    cplx k0, k1;
    bessel_k01_integral(cplx(0.0, -1.0) * x, k0, k1);
    const double pi = std::numbers::pi;
    h0 = 2.0 / (pi * cplx(0.0, 1.0)) * k0;   // 2 / (pi i)
    h1 = 2.0 / (pi * cplx(-1.0, 0.0)) * k1;  // 2 / (pi i^2)
    return;
  }
  // Table long enough for the Neumann sums to converge.
  const int nmax = static_cast<int>(std::ceil(ax + 8.0 * std::cbrt(ax) + 24.0));
  const auto j = bessel_j_table(nmax + (nmax % 2 ? 2 : 1), x);
  cplx y0, y1;
  bessel_y01_neumann(x, j, y0, y1);
  h0 = j[0] + cplx(0.0, 1.0) * y0;
  h1 = j[1] + cplx(0.0, 1.0) * y1;
}

inline std::vector<cplx> hankel1_table(int nmax, cplx x) {
  std::vector<cplx> h(static_cast<std::size_t>(std::max(nmax, 1)) + 1);
  hankel1_01(x, h[0], h[1]);
  for (int k = 1; k < nmax; ++k) h[k + 1] = 2.0 * static_cast<double>(k) / x * h[k] - h[k - 1];
  return h;
}

inline cplx signed_order(const std::vector<cplx>& table, int n) {
  const int an = std::abs(n);
  const cplx v = table[an];
  return (n < 0 && (an % 2)) ? -v : v;
}

}  // namespace detail

inline CylFunValue bessel_j(int n, cplx x) {
  detail::check_cyl_args(n, x);
  const int an = std::abs(n);
  const auto t = detail::bessel_j_table(an + 1, x);
  const cplx prev = an == 0 ? -t[1] : t[an - 1];  // J_{-1} = -J_1
  CylFunValue r{t[an], 0.5 * (prev - t[an + 1])};
  if (n < 0 && (an % 2)) {
    r.value = -r.value;
    r.derivative = -r.derivative;
  }
  return r;
}

inline CylFunValue hankel1(int n, cplx x) {
  detail::check_cyl_args(n, x);
  if (x == cplx(0.0)) throw DomainError("Hankel function is singular at x = 0");
  const int an = std::abs(n);
  const auto t = detail::hankel1_table(an + 1, x);
  const cplx prev = an == 0 ? -t[1] : t[an - 1];
  CylFunValue r{t[an], 0.5 * (prev - t[an + 1])};
  if (n < 0 && (an % 2)) {
    r.value = -r.value;
    r.derivative = -r.derivative;
  }
  return r;
}

/// Y_n = -i (H^(1)_n - J_n).
inline CylFunValue bessel_y(int n, cplx x) {
  const CylFunValue h = hankel1(n, x);
  const CylFunValue j = bessel_j(n, x);
  const cplx mi(0.0, -1.0);
  return {mi * (h.value - j.value), mi * (h.derivative - j.derivative)};
}

}  // namespace coldchain
