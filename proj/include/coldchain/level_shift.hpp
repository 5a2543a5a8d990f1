#pragma once

// Environment dispatch for Sigma. The HE11 solve is done once per model so
// sweeps over positions reuse it.

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <vector>

#include "coldchain/core_model.hpp"
#include "coldchain/fiber_coupling.hpp"
#include "coldchain/vacuum_coupling.hpp"

namespace coldchain {

class CouplingModel {
 public:
  explicit CouplingModel(Environment env) : env_(std::move(env)) {
    if (const auto* fiber = std::get_if<FiberGeometry>(&env_)) mode_ = solve_he11(*fiber);
  }

  const Environment& environment() const noexcept { return env_; }
  bool fiber() const noexcept { return mode_.has_value(); }
  /// Guided mode, or nullptr in vacuum.
  const GuidedMode* mode() const noexcept { return mode_ ? &*mode_ : nullptr; }

  /// Sigma(m, n) for two atoms of the given axis; the self term when m == n.
  cplx element(const Vec3& rm, const Vec3& rn, PolarizationAxis axis) const {
    cplx v = rm == rn ? kSelfShift : vacuum_pair_coupling(rm, rn, axis);
    if (mode_) {
      const Eigen::Vector3cd u = direction(axis).cast<cplx>();
      v += units::green_to_shift * (u.transpose() * residue_green(*mode_, rm, rn) * u)(0, 0);
    }
    return v;
  }

  /// Sigma of regular_chain(n, period, axis, env), assembled from its first
  /// column so the Toeplitz (and centrosymmetric) structure is exact.
  LevelShiftMatrix regular_chain_sigma(std::size_t n, double period, PolarizationAxis axis) const {
    const auto arr = regular_chain(std::min<std::size_t>(n, 2), period, axis, env_);
    const Vec3 origin = arr.position(0);
    std::vector<cplx> col(n);
    for (std::size_t k = 0; k < n; ++k)
      col[k] = element(origin + Vec3(0.0, 0.0, static_cast<double>(k) * period), origin, axis);
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXcd s(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) s(a, b) = col[static_cast<std::size_t>(std::abs(a - b))];
    return {std::move(s), mode_ ? EnvironmentKind::Fiber : EnvironmentKind::Vacuum};
  }

  LevelShiftMatrix sigma(const AtomArray& array) const {
    if (!(array.environment() == env_)) throw InvalidArgument("array environment differs from the coupling model");
    if (mode_) return sigma_fiber(array, *mode_);
    return sigma_vacuum(array);
  }

 private:
  Environment env_;
  std::optional<GuidedMode> mode_;
};

/// Sigma for the array's own environment.
inline LevelShiftMatrix level_shift(const AtomArray& array) { return CouplingModel(array.environment()).sigma(array); }

}  // namespace coldchain
