#pragma once

// Test-side reference implementations. None of these call into the library's
// numerical kernels, so agreement is a genuine cross-check.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

namespace oracle {

using cplx = std::complex<double>;
using mp_real = boost::multiprecision::cpp_bin_float_50;
using mp_cplx = boost::multiprecision::cpp_complex_50;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kK0 = 2.0 * kPi;

// ------------------------------------------------------------------ Bessel

inline mp_real factorial(int m) {
  mp_real f = 1;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

/// Power series of J_n (n >= 0) in 50-digit arithmetic.
inline cplx series_j(int n, cplx z_in) {
  const mp_cplx z(z_in.real(), z_in.imag());
  const mp_cplx half = z / mp_real(2);
  const mp_cplx q = -(half * half);
  mp_cplx term = pow(half, n) / factorial(n);
  mp_cplx sum = term;
  for (int k = 1; k < 400; ++k) {
    term *= q / mp_real(k * (n + k));
    sum += term;
    if (abs(term) < mp_real(1e-45) * (abs(sum) + mp_real(1e-300)) && k > abs(z_in)) break;
  }
  return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

/// Neumann series of Y_n (n >= 0), principal branch of log.
inline cplx series_y(int n, cplx z_in) {
  using boost::math::constants::euler;
  using boost::math::constants::pi;
  const mp_cplx z(z_in.real(), z_in.imag());
  const mp_cplx half = z / mp_real(2);
  const mp_cplx q = -(half * half);
  const mp_real p = pi<mp_real>();
  // psi(m + 1) = -gamma + H_m
  std::vector<mp_real> psi(600);
  psi[0] = -euler<mp_real>();
  for (std::size_t m = 1; m < psi.size(); ++m) psi[m] = psi[m - 1] + mp_real(1) / mp_real(m);

  mp_cplx j = 0, s2 = 0;
  mp_cplx term = pow(half, n) / factorial(n);
  for (int k = 0; k < 400; ++k) {
    if (k > 0) term *= q / mp_real(k * (n + k));
    j += term;
    s2 += (psi[static_cast<std::size_t>(k)] + psi[static_cast<std::size_t>(n + k)]) * term;
    if (k > abs(z_in) && abs(term) < mp_real(1e-45) * (abs(j) + mp_real(1e-300))) break;
  }
  mp_cplx s1 = 0;
  for (int k = 0; k < n; ++k) s1 += factorial(n - k - 1) / factorial(k) * pow(half, 2 * k - n);
  const mp_cplx y = mp_real(2) / p * j * log(half) - s1 / p - s2 / p;
  return {static_cast<double>(y.real()), static_cast<double>(y.imag())};
}

// ------------------------------------------------------------------ vacuum

/// Free-space dyadic Green's tensor, textbook near/intermediate/far-field form.
inline Eigen::Matrix3cd free_green(const Eigen::Vector3d& r1, const Eigen::Vector3d& r2, double k = kK0) {
  const Eigen::Vector3d d = r1 - r2;
  const double r = d.norm();
  const Eigen::Vector3d u = d / r;
  const double kr = k * r;
  const cplx i(0.0, 1.0);
  const cplx pref = std::exp(i * kr) / (4.0 * kPi * r);
  const cplx a = 1.0 + i / kr - 1.0 / (kr * kr);
  const cplx b = -1.0 - 3.0 * i / kr + 3.0 / (kr * kr);
  return pref * (a * Eigen::Matrix3cd::Identity() + b * (u * u.transpose()).cast<cplx>());
}

/// Vacuum Sigma from the dyadic Green's tensor, in gamma0 units.
inline Eigen::MatrixXcd brute_sigma(const std::vector<Eigen::Vector3d>& pos, const Eigen::Vector3d& dip) {
  const auto n = static_cast<Eigen::Index>(pos.size());
  // -4 pi k0^2 d^2 with d^2 = 3 / (4 k0^3)
  const double g2s = -3.0 * kPi / kK0;
  Eigen::MatrixXcd s(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      s(a, b) = a == b ? cplx(0.0, -0.5)
                       : g2s * (dip.transpose().cast<cplx>() * free_green(pos[a], pos[b]) * dip.cast<cplx>())(0, 0);
  return s;
}

/// -3 pi / k0^2 Im[p^dagger (Delta - Sigma)^-1 p].
inline std::vector<double> direct_cross_section(const Eigen::MatrixXcd& sigma, const Eigen::VectorXcd& p,
                                                const std::vector<double>& grid) {
  std::vector<double> out;
  for (double delta : grid) {
    Eigen::MatrixXcd m = -sigma;
    m.diagonal().array() += delta;
    const Eigen::VectorXcd x = m.fullPivLu().solve(p);
    out.push_back(-3.0 * kPi / (kK0 * kK0) * p.dot(x).imag());
  }
  return out;
}

// ------------------------------------------------------------------ fiber

/// Step-index fiber, HE11 mode from the standard hybrid-mode eigenvalue equation.
struct StepFiber {
  double a;    // radius
  double eps;  // core permittivity, cladding is vacuum
  double k = kK0;

  double u(double beta) const { return a * std::sqrt(eps * k * k - beta * beta); }
  double w(double beta) const { return a * std::sqrt(beta * beta - k * k); }

  double characteristic(double beta) const {
    const double uu = u(beta), ww = w(beta);
    const double jr = 0.5 * (std::cyl_bessel_j(0.0, uu) - std::cyl_bessel_j(2.0, uu)) / (uu * std::cyl_bessel_j(1.0, uu));
    const double kr = -0.5 * (std::cyl_bessel_k(0.0, ww) + std::cyl_bessel_k(2.0, ww)) / (ww * std::cyl_bessel_k(1.0, ww));
    const double rhs = beta / k * (1.0 / (uu * uu) + 1.0 / (ww * ww));
    return (jr + kr) * (eps * jr + kr) - rhs * rhs;
  }

  double beta() const {
    const double lo = k * (1.0 + 1e-9), hi = k * std::sqrt(eps) * (1.0 - 1e-9);
    const int samples = 4000;
    double prev_x = lo, prev_f = characteristic(lo);
    for (int i = 1; i <= samples; ++i) {
      const double x = lo + (hi - lo) * i / samples;
      const double f = characteristic(x);
      if (std::signbit(f) != std::signbit(prev_f)) {
        std::uintmax_t iters = 200;
        const auto tol = boost::math::tools::eps_tolerance<double>(52);
        const auto r = boost::math::tools::toms748_solve([&](double b) { return characteristic(b); }, prev_x, x,
                                                         prev_f, f, tol, iters);
        return 0.5 * (r.first + r.second);
      }
      prev_x = x;
      prev_f = f;
    }
    return std::nan("");
  }

  /// d beta / d k by central differences of the dispersion relation.
  double group_slope() const {
    const double h = 1e-5 * k;
    StepFiber up = *this, dn = *this;
    up.k = k + h;
    dn.k = k - h;
    return (up.beta() - dn.beta()) / (2.0 * h);
  }
};

/// Quasi-circular HE11 profile (l = +1), normalized to int eps |e|^2 dA = 1.
struct He11Profile {
  StepFiber fiber;
  double beta, h, q, s, amp = 1.0;

  explicit He11Profile(const StepFiber& f) : fiber(f) {
    beta = f.beta();
    h = std::sqrt(f.eps * f.k * f.k - beta * beta);
    q = std::sqrt(beta * beta - f.k * f.k);
    const double ha = h * f.a, qa = q * f.a;
    const double j1p = 0.5 * (std::cyl_bessel_j(0.0, ha) - std::cyl_bessel_j(2.0, ha));
    const double k1p = -0.5 * (std::cyl_bessel_k(0.0, qa) + std::cyl_bessel_k(2.0, qa));
    s = (1.0 / (ha * ha) + 1.0 / (qa * qa)) / (j1p / (ha * std::cyl_bessel_j(1.0, ha)) + k1p / (qa * std::cyl_bessel_k(1.0, qa)));
    const auto dens = [this](double r) {
      const auto e = field(r);
      const double eps_r = r < fiber.a ? fiber.eps : 1.0;
      return 2.0 * kPi * r * eps_r * (std::norm(e[0]) + std::norm(e[1]) + std::norm(e[2]));
    };
    const double inner = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(dens, 0.0, fiber.a, 10, 1e-14);
    boost::math::quadrature::exp_sinh<double> es;
    const double outer = es.integrate(
        [&](double t) { return q * (fiber.a + t) > 600.0 ? 0.0 : dens(fiber.a + t); }, 1e-14);
    amp = 1.0 / std::sqrt(inner + outer);
  }

  /// (e_r, e_phi, e_z) at radius r.
  std::array<cplx, 3> field(double r) const {
    const cplx i(0.0, 1.0);
    if (r < fiber.a) {
      const double hr = h * r;
      const double j0 = std::cyl_bessel_j(0.0, hr), j1 = std::cyl_bessel_j(1.0, hr), j2 = std::cyl_bessel_j(2.0, hr);
      return {i * amp * beta / (2.0 * h) * ((1.0 - s) * j0 - (1.0 + s) * j2),
              -amp * beta / (2.0 * h) * ((1.0 - s) * j0 + (1.0 + s) * j2), cplx(amp * j1)};
    }
    const double qr = q * r;
    const double ratio = std::cyl_bessel_j(1.0, h * fiber.a) / std::cyl_bessel_k(1.0, q * fiber.a);
    const double k0v = std::cyl_bessel_k(0.0, qr), k1 = std::cyl_bessel_k(1.0, qr), k2 = std::cyl_bessel_k(2.0, qr);
    return {i * amp * ratio * beta / (2.0 * q) * ((1.0 - s) * k0v + (1.0 + s) * k2),
            -amp * ratio * beta / (2.0 * q) * ((1.0 - s) * k0v - (1.0 + s) * k2), cplx(amp * ratio * k1)};
  }

  /// Emission rate into forward guided modes, both circular polarizations,
  /// for a dipole along the radial (component 0) or axial (component 2) direction.
  double gamma_forward(double r, int component) const {
    const double slope = fiber.group_slope();
    const double e2 = std::norm(field(r)[static_cast<std::size_t>(component)]);
    return 3.0 * kPi / (2.0 * fiber.k * fiber.k) * slope * 2.0 * e2;
  }
};


/// Outside Fresnel coefficients of a dielectric cylinder from the four
/// tangential boundary conditions at rho = a. Fields are built from
/// psi = Z_n(q rho) exp(i n phi + i kz z) with M = curl(z psi) and
/// N = curl(M) / k; the magnetic field of aM + bN in a medium of
/// wavenumber k is proportional to k (aN + bM).
/// Returns {R_MM, R_NM, R_MN, R_NN}, where R_AB maps an incident regular
/// B wave to an outgoing A wave.
inline std::array<cplx, 4> bc_fresnel(int n, cplx kz, double a, double eps, double k) {
  const auto sqrt_up = [](cplx v) {
    cplx s = std::sqrt(v);
    if (s.imag() < 0.0 || (s.imag() == 0.0 && s.real() < 0.0)) s = -s;
    return s;
  };
  const double k1 = k, k2 = std::sqrt(eps) * k;
  const cplx q1 = sqrt_up(k1 * k1 - kz * kz), q2 = sqrt_up(k2 * k2 - kz * kz);
  // Z_{-n} = (-1)^n Z_n for both J and H, so the ratios only see the sign of n
  // through the tangential components below.
  const int na = std::abs(n);
  const double dn = static_cast<double>(n), dna = static_cast<double>(na);
  const cplx i(0.0, 1.0);
  const auto jz = [&](cplx x) {
    const cplx v = series_j(na, x);
    const cplx prev = na >= 1 ? series_j(na - 1, x) : -series_j(1, x);
    return std::pair{v, prev - dna / x * v};
  };
  const auto hz = [&](cplx x) {
    const auto [jv, jd] = jz(x);
    const cplx yv = series_y(na, x);
    const cplx prev = na >= 1 ? series_y(na - 1, x) : -series_y(1, x);
    return std::pair{jv + i * yv, jd + i * (prev - dna / x * yv)};
  };
  // tangential (phi, z) components of M and N for a given radial function value/derivative
  struct Tan {
    cplx m_phi, m_z, n_phi, n_z;
  };
  const auto tan = [&](std::pair<cplx, cplx> z, cplx q, double kk) {
    return Tan{-q * z.second, 0.0, -dn * kz / (a * kk) * z.first, q * q / kk * z.first};
  };
  const auto j1 = tan(jz(q1 * a), q1, k1);
  const auto h1 = tan(hz(q1 * a), q1, k1);
  const auto j2 = tan(jz(q2 * a), q2, k2);

  // unknowns: R_M, R_N (outside, outgoing), T_M, T_N (inside, regular)
  Eigen::Matrix4cd A;
  // E_phi, E_z, H_phi / k-scaled, H_z / k-scaled
  A << h1.m_phi, h1.n_phi, -j2.m_phi, -j2.n_phi,
       h1.m_z, h1.n_z, -j2.m_z, -j2.n_z,
       k1 * h1.n_phi, k1 * h1.m_phi, -k2 * j2.n_phi, -k2 * j2.m_phi,
       k1 * h1.n_z, k1 * h1.m_z, -k2 * j2.n_z, -k2 * j2.m_z;
  const Eigen::Vector4cd inc_m(-j1.m_phi, -j1.m_z, -k1 * j1.n_phi, -k1 * j1.n_z);
  const Eigen::Vector4cd inc_n(-j1.n_phi, -j1.n_z, -k1 * j1.m_phi, -k1 * j1.m_z);
  const Eigen::Vector4cd xm = A.fullPivLu().solve(inc_m);
  const Eigen::Vector4cd xn = A.fullPivLu().solve(inc_n);
  return {xm[0], xm[1], xn[0], xn[1]};
}

}  // namespace oracle
