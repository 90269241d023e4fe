#pragma once

// Determinant construction for curl-free pairs:
//   phi_k(x) = sqrt(rho(x)/N) exp(i (k f(x1) - M(x1) + S(x))),  k = 0..N-1,
// where f is 2 pi / N times the cumulative x1-marginal of rho, M = (N-1) f / 2
// and grad S = j/rho. The orbitals are orthonormal, reproduce rho exactly and
// j up to discretization error, and their kinetic energy has a closed form.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "cdft/audit.hpp"
#include "cdft/coulomb.hpp"
#include "cdft/density.hpp"
#include "cdft/functionals.hpp"
#include "cdft/grid.hpp"

namespace cdft {

struct PhaseData {
  ScalarField f;  // 1D, radians
  ScalarField M;  // 1D, radians
  ScalarField S;  // same grid as rho
  Index3 ref_point{0, 0, 0};
};

/// Orbitals kept as a shared amplitude sqrt(rho/N) and per-orbital phase;
/// complex values are produced on demand.
struct OrbitalSet {
  int n = 0;
  PhaseData phase;
  DensityPair source;
  ScalarField amplitude;

  const GridSpec& grid() const { return amplitude.grid; }

  double phase_at(int k, std::size_t idx) const {
    const std::size_t i1 = grid().unravel(idx)[0];
    return k * phase.f.values[i1] - phase.M.values[i1] + phase.S.values[idx];
  }

  ComplexField orbital(int k) const {
    if (k < 0 || k >= n) throw InvalidArgument("orbital index out of range");
    ComplexField out(grid());
    for (std::size_t i = 0; i < out.values.size(); ++i)
      out.values[i] = std::polar(amplitude.values[i], phase_at(k, i));
    return out;
  }

  std::vector<ComplexField> orbitals() const {
    std::vector<ComplexField> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) out.push_back(orbital(k));
    return out;
  }
};

/// f(x1) = (2 pi / N) * cumulative trapezoid of the x1-marginal of rho,
/// starting at 0 on the first cell.
inline ScalarField cumulative_phase_f(const ScalarField& rho, int n) {
  if (n < 1) throw InvalidArgument("cumulative_phase_f: N must be positive");
  const ScalarField g2 = marginal_x1(rho);
  ScalarField f(g2.grid);
  const double h = g2.grid.spacing[0];
  const double scale = 2.0 * std::numbers::pi / n;
  double acc = 0.0;
  for (std::size_t i = 1; i < g2.size(); ++i) {
    acc += 0.5 * h * (g2.values[i - 1] + g2.values[i]);
    f.values[i] = scale * acc;
  }
  return f;
}

/// Lowest-index cell with rho above the floor.
inline Index3 phase_reference(const DensityPair& p, const ValidationOptions& opt = {}) {
  const Mask m = support_mask(p, opt);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i]) return p.grid().unravel(i);
  throw InvalidArgument("phase reference: rho vanishes everywhere");
}

/// S with grad S = j/rho on the support and S(reference cell) = 0.
inline ScalarField phase_S(const DensityPair& p, const ValidationOptions& opt = {}) {
  const Mask mask = support_mask(p, opt);
  const VectorField u = velocity(p, opt);
  LineIntegralOptions lo;
  lo.mask = mask;
  lo.tol_curl_rel = opt.curl_rel;
  return line_integrate(u, phase_reference(p, opt), lo);
}

inline PhaseData phase_data(const DensityPair& p, int n, const ValidationOptions& opt = {}) {
  PhaseData d;
  d.f = cumulative_phase_f(p.rho, n);
  d.M = d.f;
  for (double& x : d.M.values) x *= 0.5 * (n - 1);
  d.ref_point = phase_reference(p, opt);
  d.S = phase_S(p, opt);
  return d;
}

inline void require_valid(const DensityPair& p, int n, const ValidationOptions& opt, const char* what) {
  DensityPair copy = p;
  const ValidationReport r = validate_pair(copy, n, opt);
  if (r.verdict) return;
  std::string msg = std::string(what) + ": pair is not valid for N = " + std::to_string(n) + " (";
  for (std::size_t i = 0; i < r.reasons.size(); ++i) msg += (i ? ", " : "") + r.reasons[i];
  throw ValidationFailed(msg + ")");
}

inline OrbitalSet build_orbitals(const DensityPair& p, int n, const ValidationOptions& opt = {}) {
  require_valid(p, n, opt, "build_orbitals");
  require_curl_free(p, std::nullopt, opt);
  OrbitalSet o;
  o.n = n;
  o.phase = phase_data(p, n, opt);
  o.source = p;
  o.amplitude = ScalarField(p.grid());
  for (std::size_t i = 0; i < p.rho.size(); ++i)
    o.amplitude.values[i] = std::sqrt(std::max(p.rho.values[i], 0.0) / n);
  return o;
}

/// rho = sum |phi_k|^2, j = sum Im(conj(phi_k) grad phi_k) with the same
/// difference stencils as gradient().
inline DensityPair densities_from_orbitals(const OrbitalSet& o) {
  const GridSpec& g = o.grid();
  DensityPair out{ScalarField(g), VectorField(g)};
  std::vector<std::complex<double>> d(g.size());
  for (int k = 0; k < o.n; ++k) {
    const ComplexField phi = o.orbital(k);
    for (std::size_t i = 0; i < g.size(); ++i) out.rho.values[i] += std::norm(phi.values[i]);
    for (int a = 0; a < g.dim; ++a) {
      detail::axis_derivative<std::complex<double>>(phi.values, g, a, d);
      for (std::size_t i = 0; i < g.size(); ++i) out.jp.comp[a][i] += std::imag(std::conj(phi.values[i]) * d[i]);
    }
  }
  return out;
}

/// Row-major N x N matrix of L2 inner products.
struct GramMatrix {
  int n = 0;
  std::vector<std::complex<double>> m;

  std::complex<double> operator()(int k, int l) const { return m[k * n + l]; }
  double max_offdiag() const {
    double w = 0.0;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        if (k != l) w = std::max(w, std::abs((*this)(k, l)));
    return w;
  }
  double max_diag_error() const {
    double w = 0.0;
    for (int k = 0; k < n; ++k) w = std::max(w, std::abs((*this)(k, k) - 1.0));
    return w;
  }
};

inline GramMatrix gram_matrix(const OrbitalSet& o) {
  const std::vector<ComplexField> phi = o.orbitals();
  GramMatrix gm{o.n, std::vector<std::complex<double>>(std::size_t(o.n) * o.n)};
  for (int k = 0; k < o.n; ++k)
    for (int l = 0; l < o.n; ++l) gm.m[k * o.n + l] = inner_product(phi[k], phi[l]);
  return gm;
}

/// sum_k int |grad phi_k|^2 with the same link-form gradient energy as J1.
inline double kinetic_direct(const OrbitalSet& o) {
  double t = 0.0;
  for (int k = 0; k < o.n; ++k) {
    const ComplexField phi = o.orbital(k);
    t += dirichlet_energy<std::complex<double>>(phi.values, o.grid());
  }
  return t;
}

/// int rho (df/dx1)^2 with df/dx1 = (2 pi / N) g^2 taken from the marginal.
inline double phase_gradient_energy(const ScalarField& rho, int n) {
  const ScalarField g2 = marginal_x1(rho);
  const double c = 2.0 * std::numbers::pi / n;
  double s = 0.0;
  for (double x : g2.values) s += x * x * x;
  return c * c * s * g2.grid.spacing[0];
}

/// J1 + ((N^2 - 1)/12) int rho (df/dx1)^2 + J0.
inline double kinetic_formula(const DensityPair& p, int n, const ValidationOptions& opt = {}) {
  require_curl_free(p, std::nullopt, opt);
  const std::optional<double> cur = current_energy(p, opt);
  if (!cur) throw ValidationFailed("kinetic_formula: J0 is infinite");
  const double N = n;
  return j1(p.rho) + (N * N - 1.0) / 12.0 * phase_gradient_energy(p.rho, n) + *cur;
}

inline InequalityAudit kinetic_bound_audit(const DensityPair& p, int n, const AuditOptions& aopt = {},
                                           const ValidationOptions& opt = {}) {
  const double lhs = kinetic_formula(p, n, opt);
  const double rhs = BoundConstants::det_coefficient(n) * j1(p.rho) + *current_energy(p, opt);
  return make_audit("T_det<=(1+(4pi)^2(N^2-1)/12)J1+J0", lhs, rhs, relative_tolerance(lhs, rhs, aopt.rel_tol));
}

/// max over x1 of g^4 <= 4 N J1.
inline InequalityAudit g_bound_audit(const ScalarField& rho, int n, const AuditOptions& aopt = {}) {
  const ScalarField g2 = marginal_x1(rho);
  double m = 0.0;
  for (double x : g2.values) m = std::max(m, x * x);
  const double rhs = 4.0 * n * j1(rho);
  return make_audit("max_g^4<=4N*J1", m, rhs, relative_tolerance(m, rhs, aopt.rel_tol));
}

/// sin^2(N t / 2) / (N sin^2(t / 2)); the cosine series is used near the
/// removable singularity so that F_N(2 pi k) = N exactly.
inline double fejer(int n, double t) {
  if (n < 1) throw InvalidArgument("fejer: N must be positive");
  if (n == 1) return 1.0;
  const double s = std::sin(0.5 * t);
  if (std::abs(s) < 1e-3) {
    double acc = 0.0;
    for (int m = 1; m < n; ++m) acc += (n - m) * std::cos(m * t);
    return 1.0 + 2.0 * acc / n;
  }
  const double sn = std::sin(0.5 * n * t);
  return sn * sn / (n * s * s);
}

/// -(1/2N) sum sum rho rho F_N(f(x1) - f(y1)) / sqrt(|x-y|^2 + eta^2).
inline double exc_fejer(const ScalarField& rho, int n) {
  if (n < 1) throw InvalidArgument("exc_fejer: N must be positive");
  if (rho.grid.dim != 3) throw DimensionMismatch("exc_fejer needs a 3D density");
  if (n == 1) return -softened_pair_sum(rho) / 2.0;
  const ScalarField f = cumulative_phase_f(rho, n);
  const std::size_t n0 = f.size();
  std::vector<double> w(n0 * n0);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t k = 0; k < n0; ++k) w[i * n0 + k] = fejer(n, f.values[i] - f.values[k]);
  return -softened_pair_sum(rho, w) / (2.0 * n);
}

struct DetReport {
  double t_direct = 0.0;
  double t_formula = 0.0;
  double t_bound_rhs = 0.0;
  double jp_error_l1 = 0.0;
  double rho_error_max = 0.0;  // relative to max rho
  double gram_offdiag_max = 0.0;
  std::optional<double> exc;
  InequalityAudit kinetic_bound;
  InequalityAudit g_bound;
};

inline DetReport det_report(const DensityPair& p, int n, bool with_exc = true,
                            const ValidationOptions& opt = {}) {
  const OrbitalSet o = build_orbitals(p, n, opt);
  DetReport r;
  r.t_direct = kinetic_direct(o);
  r.kinetic_bound = kinetic_bound_audit(p, n, {}, opt);
  r.t_formula = r.kinetic_bound.lhs;
  r.t_bound_rhs = r.kinetic_bound.rhs;
  const DensityPair back = densities_from_orbitals(o);
  const double rmax = max_abs(p.rho.values);
  const GridSpec& g = p.grid();
  double l1 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    r.rho_error_max = std::max(r.rho_error_max, std::abs(back.rho.values[i] - p.rho.values[i]) / rmax);
    double d2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const double d = back.jp.comp[a][i] - p.jp.comp[a][i];
      d2 += d * d;
    }
    l1 += std::sqrt(d2);
  }
  r.jp_error_l1 = l1 * g.cell_volume();
  r.gram_offdiag_max = gram_matrix(o).max_offdiag();
  if (with_exc && g.dim == 3) r.exc = exc_fejer(p.rho, n);
  r.g_bound = g_bound_audit(p.rho, n);
  return r;
}

}  // namespace cdft
