#include <gtest/gtest.h>

#include <numbers>

#include "coldchain/fiber_coupling.hpp"
#include "coldchain/level_shift.hpp"
#include "oracles.hpp"

using namespace coldchain;

namespace {

const FiberGeometry kFiber(0.25, 2.1, 0.25);

const GuidedMode& mode() {
  static const GuidedMode m = solve_he11(kFiber);
  return m;
}

const oracle::He11Profile& profile() {
  static const oracle::He11Profile p(oracle::StepFiber{0.25, 2.1});
  return p;
}

}  // namespace

TEST(FiberMode, PropagationConstantMatchesTextbookEquation) {
  const double ref = oracle::StepFiber{0.25, 2.1}.beta();
  EXPECT_NEAR(mode().beta, ref, 1e-10 * ref);
  EXPECT_GT(mode().beta, units::k0);
  EXPECT_LT(mode().beta, std::sqrt(2.1) * units::k0);
  const double slope = oracle::StepFiber{0.25, 2.1}.group_slope();
  EXPECT_NEAR(mode().group_slope, slope, 1e-7);
}

TEST(FiberMode, DispersionResidualAtRoot) {
  const auto t = detail::dt_terms(1, mode().beta, 0.25, 2.1, units::k0);
  EXPECT_LT(std::abs(t.value), 1e-12 * t.scale);
  EXPECT_LT(std::abs(dt(-1, mode().beta, kFiber)), 1e-12 * t.scale);
}

TEST(FiberMode, SingleModeAndMultiModeGeometries) {
  EXPECT_EQ(count_guided_roots(1, kFiber), 1u);
  EXPECT_EQ(count_guided_roots(0, kFiber), 0u);
  EXPECT_EQ(count_guided_roots(2, kFiber), 0u);
  // a thick fiber guides TE01/TM01 and higher orders as well
  const FiberGeometry thick(0.8, 2.1, 0.25);
  try {
    solve_he11(thick);
    FAIL() << "expected GeometryNotSingleMode";
  } catch (const GeometryNotSingleMode& e) {
    EXPECT_GT(e.root_count(), 1);
  }
  EXPECT_THROW(solve_he11(FiberGeometry(0.25, 1.0, 0.25)), GeometryNotSingleMode);
}

TEST(FiberMode, FindsTe01AndTm01) {
  // V = 2.72 > 2.405: only the n = 0 modes have crossed cutoff besides HE11
  const FiberGeometry dense(0.25, 4.0, 0.25);
  const auto r0 = detail::guided_roots(0, 0.25, 4.0, units::k0);
  ASSERT_EQ(r0.size(), 2u);
  EXPECT_NEAR(r0[0], 6.490251831132064, 1e-9);  // TM01
  EXPECT_NEAR(r0[1], 7.062222959071005, 1e-9);  // TE01
  EXPECT_EQ(count_guided_roots(1, dense), 1u);
  EXPECT_THROW(solve_he11(dense), GeometryNotSingleMode);
}

TEST(Fresnel, MatchesBoundaryConditionSolve) {
  for (int n : {-2, -1, 0, 1, 2, 3})
    for (cplx kz : {cplx(3.0, 0.0), cplx(7.5, 0.3), cplx(2.0, -0.5), cplx(8.6, 0.0), cplx(0.5, 1.0)}) {
      const auto ref = oracle::bc_fresnel(n, kz, 0.25, 2.1, units::k0);
      const auto f = fresnel(n, kz, kFiber);
      const double scale = std::abs(ref[0]) + std::abs(ref[3]);
      EXPECT_LT(std::abs(f.r_mm - ref[0]), 1e-11 * scale) << n << " " << kz;
      EXPECT_LT(std::abs(f.r_nm - ref[1]), 1e-11 * scale) << n << " " << kz;
      EXPECT_LT(std::abs(f.r_mn - ref[2]), 1e-11 * scale) << n << " " << kz;
      EXPECT_LT(std::abs(f.r_nn - ref[3]), 1e-11 * scale) << n << " " << kz;
    }
}

TEST(Fresnel, BranchPointsRejected) {
  EXPECT_THROW(fresnel(1, units::k0, kFiber), DomainError);
  EXPECT_THROW(fresnel(1, std::sqrt(2.1) * units::k0, kFiber), DomainError);
}

TEST(GuidedRate, MatchesModeProfile) {
  for (auto [axis, comp] : {std::pair{PolarizationAxis::TransverseX, 0}, std::pair{PolarizationAxis::LongitudinalZ, 2}}) {
    const auto arr = regular_chain(1, 0.3, axis, kFiber);
    const double ref = profile().gamma_forward(0.5, comp);
    EXPECT_NEAR(gamma_wg(mode(), arr, GuidedDirection::Forward), ref, 1e-8 * ref);
    EXPECT_EQ(gamma_wg(mode(), arr, GuidedDirection::Forward), gamma_wg(mode(), arr, GuidedDirection::Backward));
  }
}

TEST(GuidedSigma, ChainCouplingIsPlaneWaveExchange) {
  // same (rho, phi): Sigma_g(m, n) = -i gamma_f exp(i beta |z_m - z_n|)
  for (auto [axis, comp] : {std::pair{PolarizationAxis::TransverseX, 0}, std::pair{PolarizationAxis::LongitudinalZ, 2}}) {
    const auto arr = regular_chain(6, 0.37, axis, kFiber);
    const auto g = sigma_guided(arr, mode());
    const double gf = profile().gamma_forward(0.5, comp);
    for (Eigen::Index a = 0; a < 6; ++a)
      for (Eigen::Index b = 0; b < 6; ++b) {
        const double dz = 0.37 * static_cast<double>(std::abs(a - b));
        const cplx ref = cplx(0.0, -gf) * std::exp(cplx(0.0, profile().beta * dz));
        EXPECT_LT(std::abs(g(a, b) - ref), 1e-8 * gf);
      }
  }
}

TEST(GuidedSigma, AzimuthalRotation) {
  // atoms at phi = pi/2 with x dipoles couple through the azimuthal field component
  const double r = 0.5;
  std::vector<Vec3> pos{Vec3(0, r, 0.0), Vec3(0, r, 0.31), Vec3(0, r, 0.9)};
  const AtomArray arr(pos, PolarizationAxis::TransverseX, kFiber);
  const auto g = sigma_guided(arr, mode());
  const double slope = oracle::StepFiber{0.25, 2.1}.group_slope();
  const double gphi = 3.0 * std::numbers::pi / (2.0 * units::k0 * units::k0) * slope * 2.0 * std::norm(profile().field(r)[1]);
  for (Eigen::Index a = 0; a < 3; ++a)
    for (Eigen::Index b = 0; b < 3; ++b) {
      const double dz = std::abs(pos[static_cast<std::size_t>(a)].z() - pos[static_cast<std::size_t>(b)].z());
      const cplx ref = cplx(0.0, -gphi) * std::exp(cplx(0.0, profile().beta * dz));
      EXPECT_LT(std::abs(g(a, b) - ref), 1e-8 * gphi);
    }
}

TEST(GuidedGreen, Reciprocity) {
  const std::vector<Vec3> pts{Vec3(0.5, 0.0, 0.0), Vec3(0.2, 0.45, 0.31), Vec3(-0.3, 0.4, -0.7), Vec3(0.0, -0.6, 0.05),
                              Vec3(0.35, 0.35, 0.0)};
  for (const auto& r : pts)
    for (const auto& rp : pts) {
      const Mat3c a = residue_green(mode(), r, rp);
      const Mat3c b = residue_green(mode(), rp, r).transpose();
      EXPECT_LT((a - b).norm(), 1e-10 * std::max(a.norm(), 1e-300));
    }
}

TEST(GuidedGreen, MirrorSymmetry) {
  // the backward block follows from the forward one by z -> -z, M = diag(1, 1, -1)
  const Eigen::Matrix3cd m = Eigen::Vector3cd(1.0, 1.0, -1.0).asDiagonal();
  const std::vector<std::pair<double, double>> sites{{0.5, 0.0}, {0.3, 1.1}, {0.7, -2.0}, {0.45, 3.0}};
  for (const auto& [r1, p1] : sites)
    for (const auto& [r2, p2] : sites) {
      const Mat3c fwd = guided_transverse_block(mode(), r1, p1, r2, p2);
      const Mat3c bwd = guided_transverse_block(mode(), r2, p2, r1, p1).transpose();
      EXPECT_LT((bwd - m * fwd * m).norm(), 1e-10 * fwd.norm());
    }
}

TEST(GuidedGreen, GuidedLambShiftVanishes) {
  const auto arr = regular_chain(1, 0.3, PolarizationAxis::TransverseX, kFiber);
  const auto g = sigma_guided(arr, mode());
  EXPECT_LT(std::abs(g(0, 0).real()), 1e-12);
}

TEST(GuidedGreen, Errors) {
  EXPECT_THROW(guided_transverse_block(mode(), 0.2, 0.0, 0.5, 0.0), InvalidArgument);
  const AtomArray off({Vec3(0.5, 0, 0), Vec3(0.6, 0, 0.3)}, PolarizationAxis::TransverseX, kFiber);
  EXPECT_THROW(gamma_wg(mode(), off, GuidedDirection::Forward), UnsupportedGeometry);
  const auto other = regular_chain(2, 0.3, PolarizationAxis::TransverseX, FiberGeometry(0.25, 2.1, 0.3));
  EXPECT_THROW(sigma_fiber(other, mode()), InvalidArgument);
  EXPECT_THROW(sigma_fiber(regular_chain(2, 0.3, PolarizationAxis::TransverseX, Vacuum{})), InvalidArgument);
}

TEST(SigmaFiber, IsVacuumPlusGuided) {
  const auto arr = regular_chain(5, 0.23, PolarizationAxis::TransverseX, kFiber);
  const auto vac = regular_chain(5, 0.23, PolarizationAxis::TransverseX, Vacuum{});
  const auto s = sigma_fiber(arr, mode());
  EXPECT_EQ(s.environment, EnvironmentKind::Fiber);
  const Eigen::MatrixXcd diff = s.entries - sigma_vacuum(vac).entries - sigma_guided(arr, mode());
  EXPECT_LT(diff.norm(), 1e-14);
}
