#pragma once

// Dielectric-cylinder Green's tensor restricted to the HE11 guided pole:
// dispersion denominator DT(k_z), outside-outside Fresnel coefficients,
// the mode solver, and the fiber-environment level-shift matrix.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coldchain/core_model.hpp"
#include "coldchain/errors.hpp"
#include "coldchain/specfun.hpp"
#include "coldchain/vacuum_coupling.hpp"

namespace coldchain {

/// Outside-to-outside Fresnel coefficients for one azimuthal order.
struct FresnelSet {
  cplx r_mm;
  cplx r_mn;
  cplx r_nm;
  cplx r_nn;
  cplx dt;
};

/// Pole data of one azimuthal order: Fresnel numerators (R * DT) and dDT/dk_z at beta.
struct HarmonicResidue {
  int order = 1;
  cplx q_out;
  cplx n_mm, n_nm, n_mn, n_nn;
  cplx dt_slope;
};

struct GuidedMode {
  double beta = 0.0;
  std::array<HarmonicResidue, 2> residues;  // orders -1 and +1
  double group_slope = 0.0;                 // d beta / d k at k0
  FiberGeometry geometry{1.0, 1.0, 0.0};
  double k0 = units::k0;

  /// Imaginary outside radial wavenumber, i * sqrt(beta^2 - k0^2).
  cplx q_out() const { return residues[1].q_out; }
};

enum class GuidedDirection { Forward, Backward };

namespace detail {

/// sqrt(k^2 - kz^2) on the branch with Im >= 0 (Re >= 0 on the real axis).
inline cplx radial_wavenumber(cplx k_sq, cplx kz) {
  cplx s = std::sqrt(k_sq - kz * kz);
  if (s.imag() < 0.0 || (s.imag() == 0.0 && s.real() < 0.0)) s = -s;
  return s;
}

struct CylinderParts {
  double k1 = 0.0;
  double k2_sq = 0.0;
  cplx q1, q2;
  cplx j1, j1p, j2, j2p, h1, h1p;
};

inline CylinderParts cylinder_parts(int n, cplx kz, double radius, double eps, double k) {
  const double k_sq = k * k;
  const double tol = 1e-14 * eps * k_sq;
  if (std::abs(kz * kz - k_sq) <= tol || std::abs(kz * kz - eps * k_sq) <= tol)
    throw DomainError("k_z sits on a branch point of the cylinder problem");
  CylinderParts p;
  p.k1 = k;
  p.k2_sq = eps * k_sq;
  p.q1 = radial_wavenumber(k_sq, kz);
  p.q2 = radial_wavenumber(eps * k_sq, kz);
  const auto j_in = bessel_j(n, p.q2 * radius);
  const auto j_out = bessel_j(n, p.q1 * radius);
  const auto h_out = hankel1(n, p.q1 * radius);
  p.j2 = j_in.value;
  p.j2p = j_in.derivative;
  p.j1 = j_out.value;
  p.j1p = j_out.derivative;
  p.h1 = h_out.value;
  p.h1p = h_out.derivative;
  return p;
}

struct DtTerms {
  cplx value;
  double scale;  // magnitude of the cancelling pieces, factor by factor
};

inline DtTerms dt_terms(int n, cplx kz, double radius, double eps, double k) {
  const auto p = cylinder_parts(n, kz, radius, eps, k);
  const cplx a = p.j2p / (p.q2 * p.j2);
  const cplx b = p.h1p / (p.q1 * p.h1);
  const cplx inv = 1.0 / (p.q2 * p.q2) - 1.0 / (p.q1 * p.q1);
  const cplx t0 = inv * inv * kz * kz * static_cast<double>(n * n);
  const double k1_sq = p.k1 * p.k1;
  const cplx t1 = (a - b) * (a * p.k2_sq - b * k1_sq) * radius * radius;
  // For n = 0 there is no cross term, so each factor has to be scaled on its own.
  const double s1 = (std::abs(a) + std::abs(b)) * (std::abs(a) * p.k2_sq + std::abs(b) * k1_sq) * radius * radius;
  return {-t0 + t1, std::abs(t0) + s1};
}

/// Fresnel numerators R_AB * DT, written without dividing by J_n(k_rho1 rho_c).
inline std::array<cplx, 3> fresnel_numerators(int n, cplx kz, double radius, double eps, double k) {
  const auto p = cylinder_parts(n, kz, radius, eps, k);
  const cplx a = p.j2p / (p.q2 * p.j2);
  const cplx b = p.h1p / (p.q1 * p.h1);
  const cplx inv = 1.0 / (p.q2 * p.q2) - 1.0 / (p.q1 * p.q1);
  const cplx t0 = inv * inv * kz * kz * static_cast<double>(n * n);
  const cplx pre = p.j1 / p.h1;            // J/H
  const cplx pre_c = p.j1p / (p.q1 * p.h1);  // (J/H) * J'/(q J)
  const double rr = radius * radius;
  const double k1_sq = p.k1 * p.k1;
  const cplx n_mm = pre * (t0 - a * (a * p.k2_sq - b * k1_sq) * rr) + pre_c * (a * p.k2_sq - b * k1_sq) * rr;
  const cplx n_nn = pre * (t0 - (a - b) * a * p.k2_sq * rr) + pre_c * (a - b) * k1_sq * rr;
  const cplx n_nm = (p.j1p - p.j1 * p.h1p / p.h1) / (p.q1 * p.h1) * (-inv) * p.k1 * kz *
                    static_cast<double>(n) * radius;
  return {n_mm, n_nm, n_nn};
}

inline cplx dt_value(int n, cplx kz, double radius, double eps, double k) {
  return dt_terms(n, kz, radius, eps, k).value;
}

/// Centered difference with step h and one Richardson step.
inline cplx dt_derivative(int n, double kz, double radius, double eps, double k) {
  const double h = 1e-6 * k;
  const auto d = [&](double step) {
    return (dt_value(n, kz + step, radius, eps, k) - dt_value(n, kz - step, radius, eps, k)) / (2.0 * step);
  };
  return (4.0 * d(h) - d(2.0 * h)) / 3.0;
}

/// Real roots of DT(n, k_z) on the guided window (k, sqrt(eps) k).
inline std::vector<double> guided_roots(int n, double radius, double eps, double k) {
  std::vector<double> roots;
  if (!(eps > 1.0)) return roots;
  // k_z^2 = k^2 (1 + s (eps - 1)); nodes crowd both ends of s in (0, 1).
  std::vector<double> s;
  for (int e = -12; e < -3; ++e)
    for (int m = 1; m < 10; ++m) {
      const double v = m * std::pow(10.0, e);
      s.push_back(v);
      s.push_back(1.0 - v);
    }
  const int uniform = 1200;
  for (int i = 1; i < uniform; ++i) s.push_back(static_cast<double>(i) / uniform);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());

  const auto kz_of = [&](double si) { return k * std::sqrt(1.0 + si * (eps - 1.0)); };
  const auto f = [&](double kz) { return dt_value(n, kz, radius, eps, k).real(); };

  double x0 = kz_of(s.front());
  double f0 = f(x0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double x1 = kz_of(s[i]);
    const double f1 = f(x1);
    if (std::isfinite(f0) && std::isfinite(f1) && ((f0 < 0.0) != (f1 < 0.0))) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      // secant polish inside the final bracket
      double root = 0.5 * (lo + hi);
      const double fl = f(lo), fh = f(hi);
      if (fh != fl) {
        const double sec = lo - fl * (hi - lo) / (fh - fl);
        if (sec >= lo && sec <= hi) root = sec;
      }
      // a sign flip through a pole of DT leaves |DT| comparable to its pieces
      const auto t = dt_terms(n, root, radius, eps, k);
      if (std::abs(t.value) <= 1e-8 * t.scale) roots.push_back(root);
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

inline double he11_beta(double radius, double eps, double k) {
  const auto r = guided_roots(1, radius, eps, k);
  if (r.size() != 1)
    throw GeometryNotSingleMode("expected exactly one HE11 root, found " + std::to_string(r.size()),
                                static_cast<int>(r.size()));
  return r.front();
}

/// Cartesian basis (e_rho, e_phi, e_z) as columns.
inline Eigen::Matrix3d cylinder_frame(double phi) {
  Eigen::Matrix3d R;
  const double c = std::cos(phi), s = std::sin(phi);
  R << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return R;
}

}  // namespace detail

/// DT(k_z) for azimuthal order n.
inline cplx dt(int n, cplx kz, const FiberGeometry& geom) {
  return detail::dt_value(n, kz, geom.radius(), geom.permittivity(), units::k0);
}

inline FresnelSet fresnel(int n, cplx kz, const FiberGeometry& geom) {
  const double rc = geom.radius(), eps = geom.permittivity(), k = units::k0;
  const auto num = detail::fresnel_numerators(n, kz, rc, eps, k);
  const cplx d = detail::dt_value(n, kz, rc, eps, k);
  return {num[0] / d, num[1] / d, num[1] / d, num[2] / d, d};
}

/// Number of guided roots of DT for azimuthal order n.
inline std::size_t count_guided_roots(int n, const FiberGeometry& geom) {
  return detail::guided_roots(n, geom.radius(), geom.permittivity(), units::k0).size();
}

inline GuidedMode solve_he11(const FiberGeometry& geom) {
  const double rc = geom.radius(), eps = geom.permittivity(), k = units::k0;
  // Other low orders must stay cut off for the single-mode model to hold.
  std::size_t others = 0;
  for (int n : {0, 2}) others += detail::guided_roots(n, rc, eps, k).size();
  const auto main = detail::guided_roots(1, rc, eps, k);
  if (main.size() != 1 || others != 0)
    throw GeometryNotSingleMode("fiber is not single-mode: " + std::to_string(main.size()) +
                                    " order-1 root(s), " + std::to_string(others) + " other guided root(s)",
                                static_cast<int>(main.size() + others));
  GuidedMode mode;
  mode.beta = main.front();
  mode.geometry = geom;
  mode.k0 = k;

  const double h = 1e-5;
  const double bp = detail::he11_beta(rc, eps, k * (1.0 + h));
  const double bm = detail::he11_beta(rc, eps, k * (1.0 - h));
  mode.group_slope = (bp - bm) / (2.0 * h * k);

  const double scale = detail::dt_terms(1, mode.beta, rc, eps, k).scale;
  for (int idx = 0; idx < 2; ++idx) {
    const int n = idx == 0 ? -1 : 1;
    HarmonicResidue res;
    res.order = n;
    res.q_out = detail::radial_wavenumber(k * k, mode.beta);
    const auto num = detail::fresnel_numerators(n, mode.beta, rc, eps, k);
    res.n_mm = num[0];
    res.n_nm = num[1];
    res.n_mn = num[1];
    res.n_nn = num[2];
    res.dt_slope = detail::dt_derivative(n, mode.beta, rc, eps, k);
    if (std::abs(res.dt_slope) * k < 1e-8 * scale) throw DegeneratePole("dDT/dk_z vanishes at the HE11 pole");
    mode.residues[idx] = res;
  }
  return mode;
}

/// Guided-pole tensor for z > z' without the exp(i beta (z - z')) factor;
/// points given by cylindrical (rho, phi). Optionally a single order.
inline Mat3c guided_transverse_block(const GuidedMode& mode, double rho, double phi, double rho_p, double phi_p,
                                     int only_order = 0) {
  const double rc = mode.geometry.radius();
  if (!(rho > rc) || !(rho_p > rc)) throw InvalidArgument("guided Green's tensor needs both points outside the fiber");
  const cplx i(0.0, 1.0);
  const double k = mode.k0;
  const double kz = mode.beta;
  Mat3c g = Mat3c::Zero();
  for (const auto& res : mode.residues) {
    if (only_order != 0 && res.order != only_order) continue;
    const int n = res.order;
    const double dn = static_cast<double>(n);
    const cplx q = res.q_out;
    const auto z = hankel1(n, q * rho);
    const auto zp = hankel1(n, q * rho_p);
    const cplx ph = std::exp(i * dn * (phi - phi_p));
    Eigen::Vector3cd M(i * dn / rho * z.value, -q * z.derivative, 0.0);
    Eigen::Vector3cd N(i * kz * q / k * z.derivative, -dn * kz / (rho * k) * z.value, q * q / k * z.value);
    Eigen::Vector3cd Mb(-i * dn / rho_p * zp.value, -q * zp.derivative, 0.0);
    Eigen::Vector3cd Nb(-i * kz * q / k * zp.derivative, -dn * kz / (rho_p * k) * zp.value, q * q / k * zp.value);
    const Mat3c F = res.n_mm * M * Mb.transpose() + res.n_nm * N * Mb.transpose() + res.n_mn * M * Nb.transpose() +
                    res.n_nn * N * Nb.transpose();
    // (i / 8 pi) * 2 pi i = -1/4
    g += (-0.25 * ph / (q * q * res.dt_slope)) * F;
  }
  const Eigen::Matrix3cd R = detail::cylinder_frame(phi).cast<cplx>();
  const Eigen::Matrix3cd Rp = detail::cylinder_frame(phi_p).cast<cplx>();
  return R * g * Rp.transpose();
}

/// Guided (HE11 pole) part of the scattering Green's tensor G_s(r, r').
inline Mat3c residue_green(const GuidedMode& mode, const Vec3& r, const Vec3& r_prime) {
  const double rho = cylindrical_radius(r), phi = azimuth(r);
  const double rho_p = cylindrical_radius(r_prime), phi_p = azimuth(r_prime);
  const double dz = r.z() - r_prime.z();
  const cplx phase = std::exp(cplx(0.0, mode.beta * std::abs(dz)));
  if (dz > 0.0) return guided_transverse_block(mode, rho, phi, rho_p, phi_p) * phase;
  if (dz < 0.0) return guided_transverse_block(mode, rho_p, phi_p, rho, phi).transpose() * phase;
  // equal z: forward and backward poles contribute equally
  return 0.5 * (guided_transverse_block(mode, rho, phi, rho_p, phi_p) +
                guided_transverse_block(mode, rho_p, phi_p, rho, phi).transpose());
}

namespace detail {
inline void check_mode_matches(const GuidedMode& mode, const AtomArray& array) {
  const auto* fiber = array.fiber();
  if (!fiber) throw InvalidArgument("array is not in a fiber environment");
  if (!(*fiber == mode.geometry)) throw InvalidArgument("guided mode was solved for a different fiber geometry");
}

inline Eigen::MatrixXcd guided_entries(const AtomArray& array, const GuidedMode& mode) {
  const auto n = static_cast<Eigen::Index>(array.size());
  const auto& pos = array.positions();
  const Eigen::Vector3cd u = array.dipole_direction().cast<cplx>();
  // Transverse blocks depend only on (rho, phi) pairs; chains share one pair.
  std::vector<std::pair<double, double>> sites;
  std::vector<std::size_t> site_of(pos.size());
  for (std::size_t a = 0; a < pos.size(); ++a) {
    const std::pair<double, double> key{cylindrical_radius(pos[a]), azimuth(pos[a])};
    auto it = std::find(sites.begin(), sites.end(), key);
    if (it == sites.end()) {
      sites.push_back(key);
      it = sites.end() - 1;
    }
    site_of[a] = static_cast<std::size_t>(it - sites.begin());
  }
  const std::size_t ns = sites.size();
  std::vector<cplx> fwd(ns * ns);  // u . block(s, t) . u
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t t = 0; t < ns; ++t)
      fwd[s * ns + t] =
          u.transpose() * guided_transverse_block(mode, sites[s].first, sites[s].second, sites[t].first, sites[t].second) * u;

  Eigen::MatrixXcd g(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) {
      const std::size_t sa = site_of[a], sb = site_of[b];
      const double dz = pos[a].z() - pos[b].z();
      cplx v;
      if (dz > 0.0)
        v = fwd[sa * ns + sb];
      else if (dz < 0.0)
        v = fwd[sb * ns + sa];
      else
        v = 0.5 * (fwd[sa * ns + sb] + fwd[sb * ns + sa]);
      v *= std::exp(cplx(0.0, mode.beta * std::abs(dz))) * units::green_to_shift;
      g(a, b) = v;
      g(b, a) = v;
    }
  return g;
}
}  // namespace detail

/// Guided-channel contribution to Sigma, including the diagonal.
inline Eigen::MatrixXcd sigma_guided(const AtomArray& array, const GuidedMode& mode) {
  detail::check_mode_matches(mode, array);
  return detail::guided_entries(array, mode);
}

inline LevelShiftMatrix sigma_fiber(const AtomArray& array, const GuidedMode& mode) {
  detail::check_mode_matches(mode, array);
  return {detail::vacuum_entries(array) + detail::guided_entries(array, mode), EnvironmentKind::Fiber};
}

inline LevelShiftMatrix sigma_fiber(const AtomArray& array) {
  const auto* fiber = array.fiber();
  if (!fiber) throw InvalidArgument("sigma_fiber requires a fiber environment");
  return sigma_fiber(array, solve_he11(*fiber));
}

/// Per-atom emission rate into one guided direction.
inline double gamma_wg(const GuidedMode& mode, const AtomArray& array, GuidedDirection direction) {
  detail::check_mode_matches(mode, array);
  const Vec3& p0 = array.position(0);
  for (const auto& p : array.positions())
    if (p.x() != p0.x() || p.y() != p0.y())
      throw UnsupportedGeometry("gamma_wg assumes every atom at the same (rho, phi)");
  const Eigen::Vector3cd u = array.dipole_direction().cast<cplx>();
  const cplx self = units::green_to_shift * (u.transpose() * residue_green(mode, p0, p0) * u)(0, 0);
  (void)direction;  // reciprocal geometry: both directions carry half
  return -self.imag();
}

}  // namespace coldchain
