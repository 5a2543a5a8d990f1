#pragma once

// Free-space dipole-dipole coupling and the vacuum level-shift matrix.

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "coldchain/core_model.hpp"
#include "coldchain/errors.hpp"

namespace coldchain {

using cplx = std::complex<double>;
using Mat3c = Eigen::Matrix3cd;

enum class EnvironmentKind { Vacuum, Fiber };

/// Sigma(omega0) in units of hbar*gamma0. Symmetric for reciprocal media.
struct LevelShiftMatrix {
  Eigen::MatrixXcd entries;
  EnvironmentKind environment = EnvironmentKind::Vacuum;

  Eigen::Index size() const { return entries.rows(); }
};

/// Diagonal element of the vacuum level shift (Lamb shift absorbed into omega0).
inline constexpr cplx kSelfShift{0.0, -0.5};

/// Free-space dyadic Green's tensor (I + grad grad / k^2) exp(ikR)/(4 pi R).
inline Mat3c green0(const Vec3& r, const Vec3& r_prime, double k) {
  const Vec3 d = r - r_prime;
  const double R = d.norm();
  if (!(R > 0.0)) throw DomainError("green0 is singular at coincident points");
  const Vec3 u = d / R;
  const double kr = k * R;
  const cplx ikr(0.0, kr);
  const cplx g = std::exp(ikr) / (4.0 * std::numbers::pi * R);
  const cplx a = 1.0 + (ikr - 1.0) / (kr * kr);
  const cplx b = (3.0 - 3.0 * ikr - kr * kr) / (kr * kr);
  Mat3c G = a * Mat3c::Identity() + b * (u * u.transpose()).cast<cplx>();
  return g * G;
}

namespace detail {
inline void check_separation(double dz) {
  if (!(dz > 0.0) || !std::isfinite(dz)) throw InvalidArgument("separation must be positive and finite");
}
}  // namespace detail

/// Coupling of two dipoles perpendicular to their separation dz.
inline cplx coupling_transverse(double dz) {
  detail::check_separation(dz);
  const double x = units::k0 * dz;
  const cplx i(0.0, 1.0);
  return -0.75 * std::exp(i * x) * (1.0 / x + i / (x * x) - 1.0 / (x * x * x));
}

/// Coupling of two dipoles parallel to their separation dz.
inline cplx coupling_longitudinal(double dz) {
  detail::check_separation(dz);
  const double x = units::k0 * dz;
  const cplx i(0.0, 1.0);
  return -1.5 * std::exp(i * x) * (-i / (x * x) + 1.0 / (x * x * x));
}

/// Off-diagonal vacuum element for two dipoles with the given axis.
inline cplx vacuum_pair_coupling(const Vec3& rm, const Vec3& rn, PolarizationAxis axis) {
  const Vec3 d = rm - rn;
  if (d.x() == 0.0 && d.y() == 0.0) {
    const double dz = std::abs(d.z());
    return axis == PolarizationAxis::TransverseX ? coupling_transverse(dz) : coupling_longitudinal(dz);
  }
  const Vec3 u = direction(axis);
  return units::green_to_shift * u.cast<cplx>().dot(green0(rm, rn, units::k0) * u.cast<cplx>());
}

namespace detail {
inline Eigen::MatrixXcd vacuum_entries(const AtomArray& array) {
  const auto n = static_cast<Eigen::Index>(array.size());
  Eigen::MatrixXcd s(n, n);
  const auto& pos = array.positions();
  for (Eigen::Index m = 0; m < n; ++m) {
    s(m, m) = kSelfShift;
    for (Eigen::Index k = m + 1; k < n; ++k) {
      const cplx g = vacuum_pair_coupling(pos[m], pos[k], array.axis());
      s(m, k) = g;
      s(k, m) = g;
    }
  }
  return s;
}
}  // namespace detail

inline LevelShiftMatrix sigma_vacuum(const AtomArray& array) {
  if (array.fiber()) throw InvalidArgument("sigma_vacuum requires a vacuum environment");
  return {detail::vacuum_entries(array), EnvironmentKind::Vacuum};
}

}  // namespace coldchain
