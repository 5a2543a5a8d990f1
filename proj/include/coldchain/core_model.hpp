#pragma once

// Domain types shared by every module: unit conventions, dipole axis,
// fiber geometry and the atom array with its builders.
//
// Units throughout the library: lengths in resonant wavelengths (lambda0 = 1),
// energies, detunings and rates in free-space decay rates (gamma0 = 1),
// hbar = c = 1.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "coldchain/errors.hpp"

namespace coldchain {

using Vec3 = Eigen::Vector3d;

namespace units {
inline constexpr double lambda0 = 1.0;
inline constexpr double gamma0 = 1.0;
inline constexpr double hbar = 1.0;
inline constexpr double c = 1.0;
inline constexpr double k0 = 2.0 * std::numbers::pi / lambda0;
inline constexpr double omega0 = k0 * c;
/// |d|^2 from gamma0 = 4 |d|^2 omega0^3 / (3 hbar c^3).
inline constexpr double dipole_sq = 3.0 * gamma0 * hbar * c * c * c / (4.0 * omega0 * omega0 * omega0);
/// -4 pi k0^2 |d|^2: converts a Green's tensor projection into a level shift.
inline constexpr double green_to_shift = -4.0 * std::numbers::pi * k0 * k0 * dipole_sq;
}  // namespace units

enum class PolarizationAxis { TransverseX, LongitudinalZ };

inline Vec3 direction(PolarizationAxis axis) {
  return axis == PolarizationAxis::TransverseX ? Vec3::UnitX() : Vec3::UnitZ();
}

inline std::string_view to_string(PolarizationAxis axis) {
  return axis == PolarizationAxis::TransverseX ? "transverse" : "longitudinal";
}

/// Dielectric nanofiber: cylinder of radius `radius` along z with relative
/// permittivity `permittivity`; atoms sit `atom_offset` away from its surface.
class FiberGeometry {
 public:
  FiberGeometry(double radius, double permittivity, double atom_offset)
      : radius_(radius), permittivity_(permittivity), atom_offset_(atom_offset) {
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw InvalidArgument("fiber radius must be positive");
    // eps == 1 is accepted so the no-scatterer limit can be evaluated; the
    // mode solver rejects it because nothing is guided.
    if (!(permittivity >= 1.0) || !std::isfinite(permittivity))
      throw InvalidArgument("fiber permittivity must be >= 1");
    if (!(atom_offset >= 0.0) || !std::isfinite(atom_offset))
      throw InvalidArgument("atom offset from the fiber surface must be >= 0");
  }

  double radius() const noexcept { return radius_; }
  double permittivity() const noexcept { return permittivity_; }
  double atom_offset() const noexcept { return atom_offset_; }
  double atom_radius() const noexcept { return radius_ + atom_offset_; }

  bool operator==(const FiberGeometry&) const = default;

 private:
  double radius_;
  double permittivity_;
  double atom_offset_;
};

struct Vacuum {
  bool operator==(const Vacuum&) const = default;
};

using Environment = std::variant<Vacuum, FiberGeometry>;

inline bool is_fiber(const Environment& env) { return std::holds_alternative<FiberGeometry>(env); }

inline double cylindrical_radius(const Vec3& p) { return std::hypot(p.x(), p.y()); }
inline double azimuth(const Vec3& p) { return std::atan2(p.y(), p.x()); }

class AtomArray {
 public:
  AtomArray(std::vector<Vec3> positions, PolarizationAxis axis, Environment env)
      : positions_(std::move(positions)), axis_(axis), env_(std::move(env)) {
    if (positions_.empty()) throw InvalidArgument("atom array needs at least one atom");
    for (const auto& p : positions_)
      if (!p.allFinite()) throw InvalidArgument("atom position is not finite");
    for (std::size_t i = 0; i < positions_.size(); ++i)
      for (std::size_t j = i + 1; j < positions_.size(); ++j)
        if ((positions_[i] - positions_[j]).norm() <= 0.0)
          throw InvalidArgument("atom positions must be distinct (atoms " + std::to_string(i) +
                                " and " + std::to_string(j) + " coincide)");
    if (const auto* fiber = std::get_if<FiberGeometry>(&env_)) {
      for (const auto& p : positions_)
        if (!(cylindrical_radius(p) > fiber->radius()))
          throw InvalidArgument("atoms must lie strictly outside the fiber");
    }
  }

  std::size_t size() const noexcept { return positions_.size(); }
  const std::vector<Vec3>& positions() const noexcept { return positions_; }
  const Vec3& position(std::size_t i) const { return positions_.at(i); }
  PolarizationAxis axis() const noexcept { return axis_; }
  Vec3 dipole_direction() const { return direction(axis_); }
  const Environment& environment() const noexcept { return env_; }
  const FiberGeometry* fiber() const noexcept { return std::get_if<FiberGeometry>(&env_); }

  /// Spacing between the first two atoms; zero for a single atom.
  double leading_period() const {
    return positions_.size() < 2 ? 0.0 : std::abs(positions_[1].z() - positions_[0].z());
  }

 private:
  std::vector<Vec3> positions_;
  PolarizationAxis axis_;
  Environment env_;
};

namespace detail {
inline Vec3 chain_site(const Environment& env, double z) {
  if (const auto* fiber = std::get_if<FiberGeometry>(&env)) return {fiber->atom_radius(), 0.0, z};
  return {0.0, 0.0, z};
}
}  // namespace detail

inline AtomArray regular_chain(std::size_t n, double period, PolarizationAxis axis, const Environment& env) {
  if (n < 1) throw InvalidArgument("chain needs at least one atom");
  if (!(period > 0.0) || !std::isfinite(period)) throw InvalidArgument("chain period must be positive");
  std::vector<Vec3> pos;
  pos.reserve(n);
  for (std::size_t j = 0; j < n; ++j) pos.push_back(detail::chain_site(env, static_cast<double>(j) * period));
  return AtomArray(std::move(pos), axis, env);
}

/// splitmix64 finalizer; used to derive independent per-item seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of work item `index` under master seed `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(mix_seed(master) ^ (index * 0xd1b54a32d192ed03ULL));
}

/// Uniform [0, 1) with 53 random bits; portable across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Regular chain whose z coordinates are shifted by 2 * delta_a * U(0,1).
inline AtomArray disordered_chain(std::size_t n, double period, double delta_a, std::uint64_t seed,
                                  PolarizationAxis axis, const Environment& env) {
  if (!(delta_a >= 0.0) || !std::isfinite(delta_a)) throw InvalidArgument("disorder amplitude must be >= 0");
  if (n < 1) throw InvalidArgument("chain needs at least one atom");
  if (!(period > 0.0) || !std::isfinite(period)) throw InvalidArgument("chain period must be positive");
  std::mt19937_64 rng(seed);
  std::vector<Vec3> pos;
  pos.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double shift = 2.0 * delta_a * uniform01(rng);
    pos.push_back(detail::chain_site(env, static_cast<double>(j) * period + shift));
  }
  return AtomArray(std::move(pos), axis, env);
}

}  // namespace coldchain
