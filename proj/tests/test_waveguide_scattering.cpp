#include <gtest/gtest.h>

#include "coldchain/level_shift.hpp"
#include "coldchain/waveguide_scattering.hpp"
#include "oracles.hpp"

using namespace coldchain;

namespace {

const FiberGeometry kFiber(0.25, 2.1, 0.25);

const CouplingModel& model() {
  static const CouplingModel m(kFiber);
  return m;
}

std::vector<double> grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

struct Oracle {
  std::vector<double> t, r;
};

// |S|^2 from the resolvent, with the coupling rate from the mode-profile oracle.
Oracle resolvent_tr(const Eigen::MatrixXcd& sigma, const AtomArray& arr, double beta, const std::vector<double>& g) {
  static const double gf = oracle::He11Profile(oracle::StepFiber{0.25, 2.1}).gamma_forward(0.5, 0);
  Eigen::VectorXcd p(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t a = 0; a < arr.size(); ++a)
    p[static_cast<Eigen::Index>(a)] = std::exp(cplx(0.0, beta * arr.position(a).z()));
  Oracle o;
  for (double delta : g) {
    Eigen::MatrixXcd m = -sigma;
    m.diagonal().array() += delta;
    const Eigen::VectorXcd x = m.fullPivLu().solve(p);
    o.t.push_back(std::norm(1.0 - cplx(0.0, gf) * p.dot(x)));
    o.r.push_back(std::norm(gf * (p.transpose() * x)(0, 0)));
  }
  return o;
}

}  // namespace

TEST(GuidedScattering, SingleAtomLorentzian) {
  const auto arr = regular_chain(1, 0.3, PolarizationAxis::TransverseX, kFiber);
  const auto s = model().sigma(arr);
  const auto es = eigensystem(s);
  const auto cs = channel_strengths(es, arr, *model().mode());
  const double gf = cs.gamma_f;
  const auto t = transmission_spectrum(cs, es, {0.0});
  const auto r = reflection_spectrum(cs, es, {0.0});
  const double gtot = 0.5 + gf;  // half of gamma0 + 2 gamma_f
  EXPECT_NEAR(t.total[0], std::pow(1.0 - gf / gtot, 2), 1e-12);
  EXPECT_NEAR(r.total[0], std::pow(gf / gtot, 2), 1e-12);
  EXPECT_DOUBLE_EQ(t.baseline, 1.0);
  EXPECT_DOUBLE_EQ(r.baseline, 0.0);
}

TEST(GuidedScattering, ExpansionMatchesResolvent) {
  for (std::size_t n : {2u, 5u, 13u, 30u})
    for (double dz : {0.23, 0.3, std::numbers::pi / model().mode()->beta}) {
      const auto arr = regular_chain(n, dz, PolarizationAxis::TransverseX, kFiber);
      const auto s = model().sigma(arr);
      const auto es = eigensystem(s);
      const auto cs = channel_strengths(es, arr, *model().mode());
      const auto g = grid(-3.0, 3.0, 241);
      const auto t = transmission_spectrum(cs, es, g);
      const auto r = reflection_spectrum(cs, es, g);
      const auto ref = resolvent_tr(s.entries, arr, model().mode()->beta, g);
      const auto direct = s_matrix_direct(s, arr, *model().mode(), g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(t.total[i], ref.t[i], 1e-9) << n << " " << dz << " " << g[i];
        EXPECT_NEAR(r.total[i], ref.r[i], 1e-9) << n << " " << dz << " " << g[i];
        EXPECT_NEAR(std::norm(direct.forward[i]), ref.t[i], 1e-9);
        EXPECT_NEAR(std::norm(direct.backward[i]), ref.r[i], 1e-9);
        EXPECT_LE(t.total[i] + r.total[i], 1.0 + 1e-9);
      }
    }
}

TEST(GuidedScattering, StrengthSumRules) {
  const auto arr = regular_chain(11, 0.27, PolarizationAxis::TransverseX, kFiber);
  const auto es = eigensystem(model().sigma(arr));
  const auto cs = channel_strengths(es, arr, *model().mode());
  EXPECT_LT(std::abs(cs.f_t.sum() - 11.0), 1e-10);
  // sum_j f_r,j = sum_a exp(2 i beta z_a)
  cplx ref = 0.0;
  for (const auto& p : arr.positions()) ref += std::exp(cplx(0.0, 2.0 * model().mode()->beta * p.z()));
  EXPECT_LT(std::abs(cs.f_r.sum() - ref), 1e-10);
  EXPECT_FALSE(cs.undamped_cross_term);
}

TEST(GuidedScattering, Errors) {
  const auto arr = regular_chain(3, 0.3, PolarizationAxis::TransverseX, kFiber);
  const auto es = eigensystem(model().sigma(arr));
  const auto other = regular_chain(4, 0.3, PolarizationAxis::TransverseX, kFiber);
  EXPECT_THROW(channel_strengths(es, other, *model().mode()), InvalidArgument);
  const auto vac = sigma_vacuum(regular_chain(3, 0.3, PolarizationAxis::TransverseX, Vacuum{}));
  EXPECT_THROW(s_matrix_direct(vac, arr, *model().mode(), {0.0}), InvalidArgument);
}
