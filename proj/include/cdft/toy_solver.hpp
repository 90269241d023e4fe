#pragma once

// One-particle magnetic Schroedinger operator on a 1D lattice,
//   (H psi)_j = (2/h^2 + v_j) psi_j - e^{i t_{j+1/2}} psi_{j+1} / h^2 - e^{-i t_{j-1/2}} psi_{j-1} / h^2,
// with link phases t = A h (A averaged onto the link). Its quadratic form is
// sum |e^{i t} psi_{j+1} - psi_j|^2 / h^2 + v |psi|^2, the lattice version of
// |(i d/dx - A) psi|^2 + v |psi|^2.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "cdft/audit.hpp"
#include "cdft/density.hpp"
#include "cdft/errors.hpp"
#include "cdft/functionals.hpp"
#include "cdft/grid.hpp"

namespace cdft {

enum class Boundary { dirichlet, periodic };

inline const char* to_string(Boundary b) { return b == Boundary::dirichlet ? "dirichlet" : "periodic"; }

inline Boundary boundary_from_string(const std::string& s) {
  if (s == "dirichlet") return Boundary::dirichlet;
  if (s == "periodic") return Boundary::periodic;
  throw InvalidArgument("unknown boundary '" + s + "'");
}

/// n cells whose zero ghost neighbours sit exactly on the walls lo and hi.
inline GridSpec walled_line(std::size_t n, double lo, double hi) {
  const double h = (hi - lo) / static_cast<double>(n + 1);
  return GridSpec::line(n, lo + 0.5 * h, hi - 0.5 * h);
}

struct LatticeHamiltonian {
  GridSpec grid;
  ScalarField v;
  VectorField a;
  Boundary boundary = Boundary::dirichlet;
  std::vector<double> diag;
  /// hop[j] multiplies psi_{j+1} in row j (index taken mod n when periodic);
  /// size n-1 for dirichlet, n for periodic.
  std::vector<std::complex<double>> hop;

  std::size_t size() const { return diag.size(); }
  double spacing() const { return grid.spacing[0]; }

  /// Infinity norm bound, used as the spectral scale.
  double spectral_scale() const {
    double m = 0.0;
    for (double d : diag) m = std::max(m, std::abs(d));
    return m + 2.0 / (spacing() * spacing());
  }

  std::vector<std::complex<double>> apply(const std::vector<std::complex<double>>& psi) const {
    const std::size_t n = size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = diag[j] * psi[j];
    for (std::size_t j = 0; j < hop.size(); ++j) {
      const std::size_t k = (j + 1) % n;
      out[j] += hop[j] * psi[k];
      out[k] += std::conj(hop[j]) * psi[j];
    }
    return out;
  }

  Eigen::MatrixXcd dense() const {
    const std::size_t n = size();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t j = 0; j < n; ++j) m(j, j) = diag[j];
    for (std::size_t j = 0; j < hop.size(); ++j) {
      const std::size_t k = (j + 1) % n;
      m(j, k) += hop[j];
      m(k, j) += std::conj(hop[j]);
    }
    return m;
  }

  /// ||H - H^*|| / ||H|| on the assembled matrix.
  double hermiticity_residual() const {
    const Eigen::MatrixXcd m = dense();
    return (m - m.adjoint()).norm() / std::max(m.norm(), 1e-300);
  }
};

inline LatticeHamiltonian discretize(const ScalarField& v, const VectorField& a,
                                     Boundary boundary = Boundary::dirichlet) {
  require_same_grid(v.grid, a.grid, "discretize");
  if (v.grid.dim != 1) throw DimensionMismatch("the lattice solver is one-dimensional");
  LatticeHamiltonian H;
  H.grid = v.grid;
  H.v = v;
  H.a = a;
  H.boundary = boundary;
  const std::size_t n = v.size();
  const double h = v.grid.spacing[0];
  const double inv = 1.0 / (h * h);
  H.diag.resize(n);
  for (std::size_t j = 0; j < n; ++j) H.diag[j] = 2.0 * inv + v.values[j];
  const std::size_t links = boundary == Boundary::periodic ? n : n - 1;
  H.hop.resize(links);
  for (std::size_t j = 0; j < links; ++j) {
    const double t = 0.5 * (a.comp[0][j] + a.comp[0][(j + 1) % n]) * h;
    H.hop[j] = -std::polar(inv, t);
  }
  return H;
}

struct SolverOptions {
  double tol_eig_rel = 1e-10;  // residual <= tol_eig_rel * spectral scale
  double gap_tol_rel = 1e-8;   // degenerate when gap < gap_tol_rel * max(1, |e0|)
  double node_floor_rel = 1e-12;
  std::size_t dense_limit = 2048;
  int max_inverse_iterations = 60;
};

struct SpectrumResult {
  double e0 = 0.0;
  double gap = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  ComplexField psi;  // sum |psi|^2 h = 1
  Boundary boundary = Boundary::dirichlet;
  bool degenerate_flag = false;
  std::size_t node_cells = 0;  // |psi|^2 at or below node_floor_rel * max
};

namespace detail {

/// Solves (T - sigma) x = b for symmetric tridiagonal T by the Thomas
/// algorithm; T - sigma must be positive definite.
inline std::vector<double> thomas_solve(const std::vector<double>& d, double off, double sigma,
                                        std::vector<double> b) {
  const std::size_t n = d.size();
  std::vector<double> c(n, 0.0);
  double denom = d[0] - sigma;
  c[0] = off / denom;
  b[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = (d[i] - sigma) - off * c[i - 1];
    c[i] = off / denom;
    b[i] = (b[i] - off * b[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) b[i] -= c[i] * b[i + 1];
  return b;
}

/// Number of eigenvalues of the symmetric tridiagonal (d, off) below x.
inline std::size_t sturm_count(const std::vector<double>& d, double off, double x) {
  const double off2 = off * off;
  const double tiny = std::numeric_limits<double>::min();
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    q = (d[i] - x) - (i ? off2 / q : 0.0);
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

/// k-th smallest eigenvalue (k = 0, 1, ...) by bisection on the Sturm count.
inline double tridiagonal_eigenvalue(const std::vector<double>& d, double off, std::size_t k) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : d) {
    lo = std::min(lo, x - 2.0 * std::abs(off));
    hi = std::max(hi, x + 2.0 * std::abs(off));
  }
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 200 && hi - lo > 2.0 * eps * std::max(std::abs(lo), std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(d, off, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline void finish(SpectrumResult& r, const LatticeHamiltonian& H, const SolverOptions& opt) {
  const std::vector<std::complex<double>> hp = H.apply(r.psi.values);
  const double h = H.spacing();
  double res = 0.0, pmax = 0.0;
  for (std::size_t j = 0; j < hp.size(); ++j) {
    res += std::norm(hp[j] - r.e0 * r.psi.values[j]);
    pmax = std::max(pmax, std::norm(r.psi.values[j]));
  }
  r.residual = std::sqrt(res * h);
  r.tolerance = opt.tol_eig_rel * H.spectral_scale();
  r.degenerate_flag = r.gap < opt.gap_tol_rel * std::max(1.0, std::abs(r.e0));
  for (const auto& z : r.psi.values)
    if (std::norm(z) <= opt.node_floor_rel * pmax) ++r.node_cells;
  if (!(r.residual <= r.tolerance) && !r.degenerate_flag)
    throw NonConvergence("ground_state: residual " + std::to_string(r.residual) + " above " +
                         std::to_string(r.tolerance));
}

inline SpectrumResult dirichlet_ground_state(const LatticeHamiltonian& H, const SolverOptions& opt) {
  // Every link phase of an open chain is removed by psi_j = e^{-i chi_j} phi_j
  // with chi_{j+1} = chi_j + t_{j+1/2}; phi solves the real problem.
  const std::size_t n = H.size();
  const double h = H.spacing();
  const double off = -1.0 / (h * h);
  const double l0 = tridiagonal_eigenvalue(H.diag, off, 0);
  const double l1 = tridiagonal_eigenvalue(H.diag, off, 1);

  const double scale = H.spectral_scale();
  const double shift = std::max(1e-9 * std::max(1.0, std::abs(l0)),
                                1024.0 * std::numeric_limits<double>::epsilon() * scale);
  std::vector<double> phi(n, 1.0);
  for (int it = 0; it < opt.max_inverse_iterations; ++it) {
    std::vector<double> next = thomas_solve(H.diag, off, l0 - shift, phi);
    double nn = 0.0;
    for (double x : next) nn += x * x;
    nn = std::sqrt(nn * h);
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= nn;
      change = std::max(change, std::abs(next[j] - phi[j]));
    }
    phi.swap(next);
    if (change < 1e-14) break;
  }
  double sum = 0.0;
  for (double x : phi) sum += x;
  if (sum < 0.0)
    for (double& x : phi) x = -x;

  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double tphi = H.diag[j] * phi[j];
    if (j > 0) tphi += off * phi[j - 1];
    if (j + 1 < n) tphi += off * phi[j + 1];
    num += phi[j] * tphi;
    den += phi[j] * phi[j];
  }

  SpectrumResult r;
  r.boundary = Boundary::dirichlet;
  r.e0 = num / den;
  r.gap = l1 - l0;
  r.psi = ComplexField(H.grid);
  double chi = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) chi += std::arg(-H.hop[j - 1]);
    r.psi.values[j] = std::polar(phi[j], -chi);
  }
  finish(r, H, opt);
  return r;
}

inline SpectrumResult dense_ground_state(const LatticeHamiltonian& H, const SolverOptions& opt) {
  if (H.size() > opt.dense_limit)
    throw InvalidArgument("periodic lattice larger than the dense solver limit");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.dense());
  if (es.info() != Eigen::Success) throw NonConvergence("dense eigensolve failed");
  const std::size_t n = H.size();
  const double h = H.spacing();
  SpectrumResult r;
  r.boundary = H.boundary;
  r.gap = n > 1 ? es.eigenvalues()[1] - es.eigenvalues()[0] : std::numeric_limits<double>::infinity();
  Eigen::VectorXcd col = es.eigenvectors().col(0);
  Eigen::Index big = 0;
  col.cwiseAbs().maxCoeff(&big);
  col *= std::polar(1.0, -std::arg(col[big])) / (col.norm() * std::sqrt(h));
  r.psi = ComplexField(H.grid);
  for (std::size_t j = 0; j < n; ++j) r.psi.values[j] = col[j];
  const std::vector<std::complex<double>> hp = H.apply(r.psi.values);
  std::complex<double> num{0.0, 0.0};
  for (std::size_t j = 0; j < n; ++j) num += std::conj(r.psi.values[j]) * hp[j];
  r.e0 = num.real() * h;
  finish(r, H, opt);
  return r;
}

}  // namespace detail

/// Lowest eigenpair. Dirichlet chains are solved in the gauge where they are
/// real tridiagonal (Sturm bisection for the two lowest eigenvalues, inverse
/// iteration for the vector); periodic rings by a dense Hermitian solve.
inline SpectrumResult ground_state(const LatticeHamiltonian& H, const SolverOptions& opt = {}) {
  if (H.size() < 3) throw InvalidArgument("ground_state needs at least 3 cells");
  if (H.boundary == Boundary::dirichlet) return detail::dirichlet_ground_state(H, opt);
  return detail::dense_ground_state(H, opt);
}

/// rho = |psi|^2, j = Im(conj(psi) dpsi/dx) with the central difference;
/// the exterior is zero (dirichlet) or wrapped (periodic). j is set to zero
/// on cells where rho is at or below the density floor, where the exponential
/// tail would otherwise leave a current of relative size |A| * 1e-12.
inline DensityPair densities_from_state(const SpectrumResult& s) {
  if (s.degenerate_flag)
    throw DegenerateGroundState("ground state is degenerate to within the gap tolerance");
  const GridSpec& g = s.psi.grid;
  const std::size_t n = g.size();
  const double h = g.spacing[0];
  const auto& psi = s.psi.values;
  DensityPair p{ScalarField(g), VectorField(g), Provenance::solver_AN};
  for (std::size_t j = 0; j < n; ++j) {
    const bool wrap = s.boundary == Boundary::periodic;
    const std::complex<double> left = j > 0 ? psi[j - 1] : (wrap ? psi[n - 1] : 0.0);
    const std::complex<double> right = j + 1 < n ? psi[j + 1] : (wrap ? psi[0] : 0.0);
    p.rho.values[j] = std::norm(psi[j]);
    p.jp.comp[0][j] = std::imag(std::conj(psi[j]) * (right - left)) / (2.0 * h);
  }
  const FloorRule fl = FloorRule::of(p);
  for (std::size_t j = 0; j < n; ++j)
    if (fl.below(p.rho.values[j])) p.jp.comp[0][j] = 0.0;
  return p;
}

inline double e0_of(const ScalarField& v, const VectorField& a, Boundary boundary = Boundary::dirichlet,
                    const SolverOptions& opt = {}) {
  return ground_state(discretize(v, a, boundary), opt).e0;
}

/// e0(v, A) <= Q(rho, j) + 2 int j.A + int rho (v + |A|^2) with the exact
/// one-particle Q; tolerance 5 h^2 max(1, |e0|).
inline InequalityAudit variational_audit(const DensityPair& p, const Potentials& pot,
                                         Boundary boundary = Boundary::dirichlet,
                                         const ValidationOptions& vopt = {}) {
  require_same_grid(p.grid(), pot.grid(), "variational_audit");
  const double lhs = e0_of(pot.v, pot.a, boundary);
  const double rhs = q_exact_n1(p, vopt) + pairing_energy(p, pot);
  const double h = p.grid().max_spacing();
  return make_audit("e0<=Q+pairing", lhs, rhs, 5.0 * h * h * std::max(1.0, std::abs(lhs)));
}

}  // namespace cdft
