#pragma once

// Single guided-photon scattering off a chain next to the fiber:
// eigenstate expansion of T and R, and the resolvent form used to check it.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "coldchain/core_model.hpp"
#include "coldchain/fiber_coupling.hpp"
#include "coldchain/spectral.hpp"

namespace coldchain {

struct GuidedChannelStrengths {
  Eigen::VectorXcd f_t;  // forward (transmission) strengths
  Eigen::VectorXcd f_r;  // reflection strengths
  double gamma_f = 0.0;
  double gamma_b = 0.0;
  Eigen::VectorXd eta_t, xi_t, eta_r, xi_r;
  bool undamped_cross_term = false;  // some lambda_j == conj(lambda_i)
};

namespace detail {

inline Eigen::VectorXcd guided_phase(const AtomArray& array, double beta, double sign) {
  Eigen::VectorXcd p(static_cast<Eigen::Index>(array.size()));
  for (std::size_t a = 0; a < array.size(); ++a)
    p[static_cast<Eigen::Index>(a)] = std::exp(cplx(0.0, sign * beta * array.position(a).z()));
  return p;
}

// C_j = sum_i f_j conj(f_i) / (lambda_j - conj(lambda_i))
inline Eigen::VectorXcd cross_sums(const Eigen::VectorXcd& f, const Eigen::VectorXcd& lambdas, bool& flag) {
  const Eigen::Index n = f.size();
  Eigen::VectorXcd c(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    cplx s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const cplx d = lambdas[j] - std::conj(lambdas[i]);
      if (std::abs(d) < 1e-300) {
        flag = true;
        continue;
      }
      s += std::conj(f[i]) / d;
    }
    c[j] = f[j] * s;
  }
  return c;
}

}  // namespace detail

inline GuidedChannelStrengths channel_strengths(const EigenSystem& es, const AtomArray& array, const GuidedMode& mode) {
  if (static_cast<Eigen::Index>(array.size()) != es.size())
    throw InvalidArgument("array size does not match the eigensystem");
  GuidedChannelStrengths cs;
  cs.gamma_f = gamma_wg(mode, array, GuidedDirection::Forward);
  cs.gamma_b = gamma_wg(mode, array, GuidedDirection::Backward);
  const Eigen::VectorXcd p = detail::guided_phase(array, mode.beta, 1.0);
  cs.f_t = projected_strengths(es, p.conjugate(), p);
  cs.f_r = projected_strengths(es, p, p);

  const Eigen::VectorXcd ct = detail::cross_sums(cs.f_t, es.lambdas, cs.undamped_cross_term);
  const Eigen::VectorXcd cr = detail::cross_sums(cs.f_r, es.lambdas, cs.undamped_cross_term);
  cs.eta_t = cs.f_t.real() - cs.gamma_f * ct.imag();
  cs.xi_t = cs.f_t.imag() + cs.gamma_f * ct.real();
  cs.eta_r = -cs.gamma_b * cr.imag();
  cs.xi_r = cs.gamma_b * cr.real();
  return cs;
}

namespace detail {
inline SpectrumTable guided_expansion(const Eigen::VectorXd& eta, const Eigen::VectorXd& xi, double gamma_f,
                                      const EigenSystem& es, const std::vector<double>& grid, double baseline,
                                      Observable obs) {
  check_grid(grid);
  SpectrumTable t;
  t.detunings = grid;
  t.baseline = baseline;
  t.observable = obs;
  const auto ng = static_cast<Eigen::Index>(grid.size());
  t.partials.resize(ng, es.size());
  t.total.assign(grid.size(), baseline);
  for (Eigen::Index g = 0; g < ng; ++g) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < es.size(); ++j) {
      const double dr = grid[g] - es.lambdas[j].real();
      const double li = es.lambdas[j].imag();
      const double v = 2.0 * gamma_f * (eta[j] * li + xi[j] * dr) / (dr * dr + li * li);
      t.partials(g, j) = v;
      sum += v;
    }
    t.total[g] = baseline + sum;
  }
  return t;
}
}  // namespace detail

inline SpectrumTable transmission_spectrum(const GuidedChannelStrengths& cs, const EigenSystem& es,
                                           const std::vector<double>& grid) {
  return detail::guided_expansion(cs.eta_t, cs.xi_t, cs.gamma_f, es, grid, 1.0, Observable::Transmission);
}

inline SpectrumTable reflection_spectrum(const GuidedChannelStrengths& cs, const EigenSystem& es,
                                         const std::vector<double>& grid) {
  return detail::guided_expansion(cs.eta_r, cs.xi_r, cs.gamma_f, es, grid, 0.0, Observable::Reflection);
}

struct ScatteringAmplitudes {
  std::vector<double> detunings;
  std::vector<cplx> forward;   // S_ff
  std::vector<cplx> backward;  // S_bf
};

/// Resolvent form of the guided S-matrix elements.
inline ScatteringAmplitudes s_matrix_direct(const LevelShiftMatrix& sigma, const AtomArray& array,
                                            const GuidedMode& mode, const std::vector<double>& grid) {
  check_grid(grid);
  if (sigma.environment != EnvironmentKind::Fiber) throw InvalidArgument("s_matrix_direct needs a fiber-environment Sigma");
  const double gf = gamma_wg(mode, array, GuidedDirection::Forward);
  const double gb = gamma_wg(mode, array, GuidedDirection::Backward);
  const Eigen::VectorXcd p = detail::guided_phase(array, mode.beta, 1.0);
  ScatteringAmplitudes out;
  out.detunings = grid;
  out.forward.reserve(grid.size());
  out.backward.reserve(grid.size());
  const cplx i(0.0, 1.0);
  for (double delta : grid) {
    Eigen::MatrixXcd m = -sigma.entries;
    m.diagonal().array() += delta;
    const Eigen::VectorXcd x = m.partialPivLu().solve(p);
    out.forward.push_back(1.0 - i * gf * p.dot(x));  // dot conjugates p
    out.backward.push_back(-i * std::sqrt(gf * gb) * (p.transpose() * x)(0, 0));
  }
  return out;
}

}  // namespace coldchain
