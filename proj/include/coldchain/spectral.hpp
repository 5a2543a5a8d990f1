#pragma once

// Eigen-analysis of Sigma: collective shifts and widths, oscillator
// strengths, cross-section spectra and eigenvector diagnostics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "coldchain/core_model.hpp"
#include "coldchain/errors.hpp"
#include "coldchain/vacuum_coupling.hpp"

#if defined(COLDCHAIN_USE_LAPACKE)
#include <lapacke.h>
#endif

namespace coldchain {

struct EigenSystem {
  Eigen::VectorXcd lambdas;
  Eigen::MatrixXcd right_vectors;      // S, columns are right eigenvectors
  Eigen::MatrixXcd inverse_transform;  // S^-1
  Eigen::VectorXd decay_rates;         // -2 Im lambda
  bool symmetric_normalization = false;
  bool degenerate = false;  // some |lambda_a - lambda_b| < 1e-10
  double residual = 0.0;    // ||S L S^-1 - Sigma|| / ||Sigma||

  Eigen::Index size() const { return lambdas.size(); }
};

namespace detail {

inline std::vector<Eigen::Index> spectral_order(const Eigen::VectorXcd& lambdas) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(lambdas.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ga = -2.0 * lambdas[a].imag(), gb = -2.0 * lambdas[b].imag();
    if (ga != gb) return ga < gb;
    return lambdas[a].real() < lambdas[b].real();
  });
  return idx;
}

/// Unordered eigenvalues (and optionally right eigenvectors) of a general
/// complex matrix. LAPACK zgeev when available, Eigen otherwise.
inline bool raw_eigen(const Eigen::MatrixXcd& m, Eigen::VectorXcd& values, Eigen::MatrixXcd* vectors) {
  const Eigen::Index n = m.rows();
#if defined(COLDCHAIN_USE_LAPACKE)
  Eigen::MatrixXcd a = m;
  values.resize(n);
  if (vectors) vectors->resize(n, n);
  const lapack_int ln = static_cast<lapack_int>(n);
  auto* vr = vectors ? reinterpret_cast<lapack_complex_double*>(vectors->data()) : nullptr;
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', vectors ? 'V' : 'N', ln, reinterpret_cast<lapack_complex_double*>(a.data()),
                    ln, reinterpret_cast<lapack_complex_double*>(values.data()), nullptr, ln, vr, ln);
  return info == 0;
#else
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, vectors != nullptr);
  if (solver.info() != Eigen::Success) return false;
  values = solver.eigenvalues();
  if (vectors) *vectors = solver.eigenvectors();
  (void)n;
  return true;
#endif
}

inline bool is_symmetric(const Eigen::MatrixXcd& m) {
  return (m - m.transpose()).norm() <= 1e-12 * std::max(1.0, m.norm());
}

}  // namespace detail

inline constexpr double kDegeneracyTol = 1e-10;

inline EigenSystem eigensystem(const LevelShiftMatrix& sigma) {
  const Eigen::MatrixXcd& A = sigma.entries;
  if (!A.allFinite()) throw InvalidArgument("level-shift matrix has non-finite entries");
  const Eigen::Index n = A.rows();
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;
  if (!detail::raw_eigen(A, values, &vectors)) throw ConditioningError("eigen-solver did not converge", 1.0);

  const auto order = detail::spectral_order(values);
  EigenSystem es;
  es.lambdas.resize(n);
  es.right_vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    es.lambdas[j] = values[order[j]];
    es.right_vectors.col(j) = vectors.col(order[j]);
  }
  es.decay_rates = -2.0 * es.lambdas.imag();

  for (Eigen::Index a = 0; a < n && !es.degenerate; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b)
      if (std::abs(es.lambdas[a] - es.lambdas[b]) < kDegeneracyTol) {
        es.degenerate = true;
        break;
      }

  bool done = false;
  if (detail::is_symmetric(A) && !es.degenerate) {
    // v^T v = 1, so that S^-1 = S^T
    Eigen::MatrixXcd S = es.right_vectors;
    bool ok = true;
    for (Eigen::Index j = 0; j < n && ok; ++j) {
      const cplx vv = (S.col(j).transpose() * S.col(j))(0, 0);
      if (std::abs(vv) < 1e-8) {
        ok = false;
        break;
      }
      S.col(j) /= std::sqrt(vv);
    }
    if (ok && (S.transpose() * S - Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-8 * std::sqrt(double(n))) {
      es.right_vectors = S;
      es.inverse_transform = S.transpose();
      es.symmetric_normalization = true;
      done = true;
    }
  }
  if (!done) es.inverse_transform = es.right_vectors.partialPivLu().inverse();

  const double norm = std::max(A.norm(), 1e-300);
  es.residual =
      (es.right_vectors * es.lambdas.asDiagonal() * es.inverse_transform - A).norm() / norm;
  if (!(es.residual <= 1e-8)) throw ConditioningError("eigendecomposition does not reproduce Sigma", es.residual);
  return es;
}

/// Eigenvalues only, in the spectral order (gamma ascending, then Re lambda).
inline Eigen::VectorXcd sorted_eigenvalues(const Eigen::MatrixXcd& sigma) {
  Eigen::VectorXcd values;
  if (!detail::raw_eigen(sigma, values, nullptr)) throw ConditioningError("eigen-solver did not converge", 1.0);
  const auto order = detail::spectral_order(values);
  Eigen::VectorXcd out(sigma.rows());
  for (Eigen::Index j = 0; j < out.size(); ++j) out[j] = values[order[j]];
  return out;
}

/// Eigenvalues of a centrosymmetric matrix (J M J = M, J the exchange
/// matrix) from its symmetric and antisymmetric blocks, in spectral order.
inline Eigen::VectorXcd centrosymmetric_eigenvalues(const Eigen::MatrixXcd& m) {
  const Eigen::Index n = m.rows();
  const Eigen::Index h = n / 2;
  const bool odd = n % 2;
  if (n < 2) return sorted_eigenvalues(m);
  Eigen::MatrixXcd sym(h + (odd ? 1 : 0), h + (odd ? 1 : 0));
  Eigen::MatrixXcd anti(h, h);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < h; ++j) {
      sym(i, j) = m(i, j) + m(i, n - 1 - j);
      anti(i, j) = m(i, j) - m(i, n - 1 - j);
    }
  if (odd) {
    const double r2 = std::sqrt(2.0);
    for (Eigen::Index i = 0; i < h; ++i) {
      sym(i, h) = r2 * m(i, h);
      sym(h, i) = r2 * m(h, i);
    }
    sym(h, h) = m(h, h);
  }
  Eigen::VectorXcd all(n), ls, la;
  if (!detail::raw_eigen(sym, ls, nullptr) || !detail::raw_eigen(anti, la, nullptr))
    throw ConditioningError("eigen-solver did not converge", 1.0);
  all << ls, la;
  const auto order = detail::spectral_order(all);
  Eigen::VectorXcd out(n);
  for (Eigen::Index j = 0; j < n; ++j) out[j] = all[order[j]];
  return out;
}

inline Eigen::VectorXcd plane_wave(const std::vector<Vec3>& positions, const Vec3& k_vec, double sign = 1.0) {
  Eigen::VectorXcd p(static_cast<Eigen::Index>(positions.size()));
  for (std::size_t a = 0; a < positions.size(); ++a)
    p[static_cast<Eigen::Index>(a)] = std::exp(cplx(0.0, sign * k_vec.dot(positions[a])));
  return p;
}

/// Generalized oscillator strengths f_j = (u^T S_:j)(S^-1_j: w) for arbitrary projectors.
inline Eigen::VectorXcd projected_strengths(const EigenSystem& es, const Eigen::VectorXcd& left,
                                            const Eigen::VectorXcd& right) {
  const Eigen::VectorXcd a = es.right_vectors.transpose() * left;  // a_j = sum_i left_i S_ij
  const Eigen::VectorXcd b = es.inverse_transform * right;
  return a.cwiseProduct(b);
}

inline Eigen::VectorXcd oscillator_strengths(const EigenSystem& es, const AtomArray& array, const Vec3& k_vec) {
  if (std::abs(k_vec.norm() - units::k0) > 1e-9 * units::k0)
    throw InvalidArgument("photon wavevector must have magnitude k0");
  if (static_cast<Eigen::Index>(array.size()) != es.size())
    throw InvalidArgument("array size does not match the eigensystem");
  return projected_strengths(es, plane_wave(array.positions(), k_vec, -1.0), plane_wave(array.positions(), k_vec, 1.0));
}

enum class Observable { CrossSection, Transmission, Reflection };

/// Spectrum on a detuning grid. partials has one column per eigenstate
/// (empty when produced by a direct resolvent evaluation).
struct SpectrumTable {
  std::vector<double> detunings;
  Eigen::MatrixXd partials;
  std::vector<double> total;
  double baseline = 0.0;
  Observable observable = Observable::CrossSection;
};

/// -3 pi / k0^2: Im of the resolvent projection to cross section in lambda0^2.
inline constexpr double kCrossSectionPrefactor = -3.0 * std::numbers::pi / (units::k0 * units::k0);

inline void check_grid(const std::vector<double>& grid) {
  for (double d : grid)
    if (!std::isfinite(d)) throw InvalidArgument("detuning grid contains non-finite values");
}

inline SpectrumTable cross_section_expanded(const EigenSystem& es, const Eigen::VectorXcd& f,
                                            const std::vector<double>& grid) {
  check_grid(grid);
  if (f.size() != es.size()) throw InvalidArgument("oscillator strengths do not match the eigensystem");
  SpectrumTable t;
  t.detunings = grid;
  t.observable = Observable::CrossSection;
  const auto ng = static_cast<Eigen::Index>(grid.size());
  t.partials.resize(ng, es.size());
  t.total.assign(grid.size(), 0.0);
  for (Eigen::Index g = 0; g < ng; ++g) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < es.size(); ++j) {
      // Lorentzian (Re f) plus dispersive (Im f) piece
      const double dr = grid[g] - es.lambdas[j].real();
      const double li = es.lambdas[j].imag();
      const double v = kCrossSectionPrefactor * (f[j].imag() * dr + f[j].real() * li) / (dr * dr + li * li);
      t.partials(g, j) = v;
      sum += v;
    }
    t.total[g] = sum;
  }
  return t;
}

inline SpectrumTable cross_section_direct(const LevelShiftMatrix& sigma, const AtomArray& array, const Vec3& k_vec,
                                          const std::vector<double>& grid) {
  check_grid(grid);
  if (std::abs(k_vec.norm() - units::k0) > 1e-9 * units::k0)
    throw InvalidArgument("photon wavevector must have magnitude k0");
  const Eigen::VectorXcd p = plane_wave(array.positions(), k_vec, 1.0);
  SpectrumTable t;
  t.detunings = grid;
  t.observable = Observable::CrossSection;
  t.total.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    Eigen::MatrixXcd m = -sigma.entries;
    m.diagonal().array() += grid[g];
    const Eigen::VectorXcd x = m.partialPivLu().solve(p);
    t.total[g] = kCrossSectionPrefactor * p.dot(x).imag();  // dot conjugates p
  }
  return t;
}

struct NnCorrelation {
  double value = 0.0;
  bool degenerate_phase = false;  // some component was exactly zero
};

/// Mean cos of the phase step between neighbouring amplitudes of state j.
inline NnCorrelation nn_correlation(const EigenSystem& es, Eigen::Index j) {
  const Eigen::Index n = es.size();
  if (n < 2) throw InvalidArgument("nearest-neighbour correlation needs at least two atoms");
  if (j < 0 || j >= n) throw InvalidArgument("state index out of range");
  NnCorrelation out;
  const auto c = es.right_vectors.col(j);
  std::vector<double> phase(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (c[i] == cplx(0.0)) {
      phase[i] = 0.0;
      out.degenerate_phase = true;
    } else {
      phase[i] = std::arg(c[i]);
    }
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) s += std::cos(phase[i + 1] - phase[i]);
  out.value = s / static_cast<double>(n - 1);
  return out;
}

inline double ipr_of(const Eigen::VectorXcd& v) {
  const double n2 = v.squaredNorm();
  if (!(n2 > 0.0)) throw InvalidArgument("IPR of a zero vector");
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double p = std::norm(v[i]) / n2;
    s += p * p;
  }
  return 1.0 / s;
}

inline double ipr(const EigenSystem& es, Eigen::Index j) {
  if (j < 0 || j >= es.size()) throw InvalidArgument("state index out of range");
  return ipr_of(es.right_vectors.col(j));
}

}  // namespace coldchain
