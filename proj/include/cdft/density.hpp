#pragma once

// Density pairs (rho, j^p), the N-representability proxy used on grids, and
// the quantities every other module builds on: the floor rule for j^2/rho,
// velocities j/rho, vorticity, convex combinations and pairing energies.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "cdft/audit.hpp"
#include "cdft/errors.hpp"
#include "cdft/grid.hpp"

namespace cdft {

enum class Provenance { raw, validated_YN, solver_AN };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::raw: return "raw";
    case Provenance::validated_YN: return "validated_YN";
    case Provenance::solver_AN: return "solver_AN";
  }
  return "raw";
}

inline Provenance provenance_from_string(const std::string& s) {
  if (s == "raw") return Provenance::raw;
  if (s == "validated_YN") return Provenance::validated_YN;
  if (s == "solver_AN") return Provenance::solver_AN;
  throw InvalidArgument("unknown provenance '" + s + "'");
}

struct DensityPair {
  ScalarField rho;
  VectorField jp;
  Provenance provenance = Provenance::raw;

  DensityPair() = default;
  DensityPair(ScalarField r, VectorField j, Provenance p = Provenance::raw)
      : rho(std::move(r)), jp(std::move(j)), provenance(p) {
    require_same_grid(rho.grid, jp.grid, "DensityPair");
  }

  const GridSpec& grid() const { return rho.grid; }
  /// Member of the N-representable set, either checked or solver-produced.
  bool representable() const { return provenance != Provenance::raw; }
};

/// External potentials (v, A). A must be bounded.
struct Potentials {
  ScalarField v;
  VectorField a;

  Potentials() = default;
  Potentials(ScalarField v_, VectorField a_) : v(std::move(v_)), a(std::move(a_)) {
    require_same_grid(v.grid, a.grid, "Potentials");
    for (double x : v.values)
      if (!std::isfinite(x)) throw InvalidArgument("scalar potential holds non-finite values");
    for (int k = 0; k < a.dim(); ++k)
      for (double x : a.comp[k])
        if (!std::isfinite(x)) throw InvalidArgument("vector potential must be bounded");
  }

  static Potentials zero(const GridSpec& g) { return Potentials(ScalarField(g), VectorField(g)); }
  const GridSpec& grid() const { return v.grid; }
};

struct ValidationOptions {
  double tol_mass_rel = 1e-8;        // |int rho - N| <= tol_mass_rel * N
  double tol_neg_rel = 1e-12;        // rho >= -tol_neg_rel * max(rho)
  double rho_floor_rel = 1e-12;      // eps_rho = rho_floor_rel * max(rho)
  double j_floor_rel = 1e-12;        // eps_j = j_floor_rel * max|j|
  double boundary_mass_rel = 1e-10;  // mass in the outermost cell layer
  double curl_rel = 1e-6;            // admissible curl(j/rho) relative to max|j/rho|
};

/// Where rho <= eps_rho the integrand |j|^2/rho is 0 if |j| <= eps_j and the
/// pair is rejected otherwise.
struct FloorRule {
  double rho_floor = 0.0;
  double j_floor = 0.0;

  static FloorRule of(const DensityPair& p, const ValidationOptions& opt = {}) {
    FloorRule f;
    double jmax = 0.0;
    for (std::size_t i = 0; i < p.rho.size(); ++i) jmax = std::max(jmax, p.jp.norm2_at(i));
    f.rho_floor = opt.rho_floor_rel * max_abs(p.rho.values);
    f.j_floor = opt.j_floor_rel * std::sqrt(jmax);
    return f;
  }

  bool below(double rho) const { return rho <= rho_floor; }
};

inline Mask support_mask(const DensityPair& p, const ValidationOptions& opt = {}) {
  const FloorRule fl = FloorRule::of(p, opt);
  Mask m(p.rho.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = fl.below(p.rho.values[i]) ? 0 : 1;
  return m;
}

/// Cells below the density floor whose current exceeds the current floor.
/// With rho > 0 they are flagged and J0 keeps their finite |j|^2/rho; with
/// rho <= 0 the current has nowhere to live and the pair is rejected.
inline std::size_t floor_flagged_cells(const DensityPair& p, const ValidationOptions& opt = {}) {
  const FloorRule fl = FloorRule::of(p, opt);
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.rho.size(); ++i)
    if (fl.below(p.rho.values[i]) && std::sqrt(p.jp.norm2_at(i)) > fl.j_floor) ++n;
  return n;
}

/// J0 = int |j^p|^2 / rho under the floor rule; empty when the current does
/// not vanish where the density does.
inline std::optional<double> current_energy(const DensityPair& p, const ValidationOptions& opt = {}) {
  const FloorRule fl = FloorRule::of(p, opt);
  double s = 0.0;
  for (std::size_t i = 0; i < p.rho.size(); ++i) {
    const double j2 = p.jp.norm2_at(i);
    const double r = p.rho.values[i];
    if (fl.below(r)) {
      if (std::sqrt(j2) <= fl.j_floor) continue;
      if (!(r > 0.0)) return std::nullopt;
    }
    s += j2 / r;
  }
  return s * p.grid().cell_volume();
}

/// J1 = int (grad sqrt(rho))^2, negatives floored at zero.
inline double von_weizsacker(const ScalarField& rho) {
  std::vector<double> amp(rho.size());
  for (std::size_t i = 0; i < amp.size(); ++i) amp[i] = std::sqrt(std::max(rho.values[i], 0.0));
  return dirichlet_energy<double>(amp, rho.grid);
}

/// j/rho on the support, zero elsewhere.
inline VectorField velocity(const DensityPair& p, const ValidationOptions& opt = {}) {
  const FloorRule fl = FloorRule::of(p, opt);
  VectorField u(p.grid());
  for (std::size_t i = 0; i < p.rho.size(); ++i) {
    if (fl.below(p.rho.values[i])) {
      if (!(p.rho.values[i] > 0.0) && std::sqrt(p.jp.norm2_at(i)) > fl.j_floor)
        throw UnsupportedCurrent("current density exceeds floor where rho vanishes");
      continue;
    }
    for (int a = 0; a < u.dim(); ++a) u.comp[a][i] = p.jp.comp[a][i] / p.rho.values[i];
  }
  return u;
}

struct ValidationReport {
  int n_target = 0;
  double mass = 0.0;
  double j1_value = 0.0;
  std::optional<double> j0_value;  // empty = +inf
  double jp_l1_norm = 0.0;
  double negativity_fraction = 0.0;
  double boundary_mass_fraction = 0.0;
  std::size_t floor_flagged = 0;  // below-floor cells carrying current
  bool verdict = false;
  std::vector<std::string> reasons;
};

/// Checks the grid proxy of N-representability. On success a raw pair is
/// upgraded to validated_YN; a failing pair is demoted to raw.
inline ValidationReport validate_pair(DensityPair& p, int n, const ValidationOptions& opt = {}) {
  ValidationReport r;
  r.n_target = n;
  const GridSpec& g = p.grid();

  bool finite = true;
  for (double x : p.rho.values) finite = finite && std::isfinite(x);
  for (int a = 0; a < g.dim; ++a)
    for (double x : p.jp.comp[a]) finite = finite && std::isfinite(x);
  if (!finite) {
    r.reasons.push_back("non-finite");
    r.j1_value = std::numeric_limits<double>::quiet_NaN();
    p.provenance = Provenance::raw;
    return r;
  }

  r.mass = integrate(p.rho);
  double neg = 0.0, absmass = 0.0, rmin = 0.0;
  for (double x : p.rho.values) {
    absmass += std::abs(x);
    if (x < 0.0) neg -= x;
    rmin = std::min(rmin, x);
  }
  r.negativity_fraction = absmass > 0.0 ? neg / absmass : 0.0;
  if (rmin < -opt.tol_neg_rel * max_abs(p.rho.values)) r.reasons.push_back("negativity");

  if (n < 1 || std::abs(r.mass - n) > opt.tol_mass_rel * std::max(n, 1)) r.reasons.push_back("mass");

  r.j1_value = von_weizsacker(p.rho);
  if (!std::isfinite(r.j1_value)) r.reasons.push_back("J1 infinite");

  double l1 = 0.0;
  for (int a = 0; a < g.dim; ++a)
    for (double x : p.jp.comp[a]) l1 += std::abs(x);
  r.jp_l1_norm = l1 * g.cell_volume();
  if (!std::isfinite(r.jp_l1_norm)) r.reasons.push_back("jp not integrable");

  r.j0_value = current_energy(p, opt);
  r.floor_flagged = floor_flagged_cells(p, opt);
  if (!r.j0_value || !std::isfinite(*r.j0_value)) r.reasons.push_back("J0 infinite");

  double edge = 0.0;
  for (std::size_t i = 0; i < p.rho.size(); ++i) {
    const Index3 c = g.unravel(i);
    bool on_edge = false;
    for (int a = 0; a < g.dim; ++a) on_edge = on_edge || c[a] == 0 || c[a] + 1 == g.shape[a];
    if (on_edge) edge += std::abs(p.rho.values[i]);
  }
  r.boundary_mass_fraction = absmass > 0.0 ? edge / absmass : 0.0;
  if (r.boundary_mass_fraction > opt.boundary_mass_rel) r.reasons.push_back("boundary mass");

  r.verdict = r.reasons.empty();
  if (!r.verdict)
    p.provenance = Provenance::raw;
  else if (p.provenance == Provenance::raw)
    p.provenance = Provenance::validated_YN;
  return r;
}

struct Vorticity {
  VectorField omega;
  Mask flagged;  // cells whose stencil leaves the support; omega reported as 0
  double max_norm = 0.0;
};

/// curl(j/rho) on the support of rho.
inline Vorticity vorticity(const DensityPair& p, const ValidationOptions& opt = {}) {
  if (p.grid().dim != 3) throw DimensionMismatch("vorticity needs a 3D pair");
  const Mask mask = support_mask(p, opt);
  Vorticity v{curl(velocity(p, opt)), Mask(p.rho.size(), 0), 0.0};
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!stencil_inside(mask, p.grid(), i)) {
      v.flagged[i] = 1;
      for (int a = 0; a < 3; ++a) v.omega.comp[a][i] = 0.0;
      continue;
    }
    v.max_norm = std::max(v.max_norm, std::sqrt(v.omega.norm2_at(i)));
  }
  return v;
}

/// Throws CurlTooLarge unless the vorticity is below curl_rel * max|j/rho|
/// (or the absolute tol_curl when given). 1D pairs are always curl-free.
inline void require_curl_free(const DensityPair& p, std::optional<double> tol_curl = std::nullopt,
                              const ValidationOptions& opt = {}) {
  if (p.grid().dim != 3) return;
  const Vorticity w = vorticity(p, opt);
  const Mask mask = support_mask(p, opt);
  const VectorField u = velocity(p, opt);
  double umax = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) umax = std::max(umax, std::sqrt(u.norm2_at(i)));
  const double tol = tol_curl.value_or(opt.curl_rel * umax);
  if (w.max_norm > tol) throw CurlTooLarge(w.max_norm, tol);
}

/// Componentwise convex combination. If every input is representable the
/// result is re-validated against its own (rounded) mass.
inline DensityPair convex_combine(const std::vector<DensityPair>& pairs, const std::vector<double>& weights,
                                  const ValidationOptions& opt = {}) {
  if (pairs.empty() || pairs.size() != weights.size())
    throw InvalidArgument("convex_combine: need one weight per pair");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("convex_combine: weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("convex_combine: weights must sum to 1");
  const GridSpec& g = pairs.front().grid();
  bool all_representable = true;
  for (const auto& p : pairs) {
    require_same_grid(g, p.grid(), "convex_combine");
    all_representable = all_representable && p.representable();
  }
  DensityPair out{ScalarField(g), VectorField(g)};
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double w = weights[k];
    for (std::size_t i = 0; i < g.size(); ++i) out.rho.values[i] += w * pairs[k].rho.values[i];
    for (int a = 0; a < g.dim; ++a)
      for (std::size_t i = 0; i < g.size(); ++i) out.jp.comp[a][i] += w * pairs[k].jp.comp[a][i];
  }
  if (all_representable) {
    const int n = static_cast<int>(std::lround(integrate(out.rho)));
    validate_pair(out, n, opt);
  }
  return out;
}

/// 2 int j.A + int rho (v + |A|^2).
inline double pairing_energy(const DensityPair& p, const Potentials& pot) {
  require_same_grid(p.grid(), pot.grid(), "pairing_energy");
  const GridSpec& g = p.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double ja = 0.0;
    for (int a = 0; a < g.dim; ++a) ja += p.jp.comp[a][i] * pot.a.comp[a][i];
    s += 2.0 * ja + p.rho.values[i] * (pot.v.values[i] + pot.a.norm2_at(i));
  }
  return s * g.cell_volume();
}

/// Per component k: int |j_k A_k| <= (int |j|^2/rho)^{1/2} (int rho |A|^2)^{1/2}.
inline std::vector<InequalityAudit> schwarz_audit(const DensityPair& p, const Potentials& pot,
                                                  const ValidationOptions& opt = {}) {
  require_same_grid(p.grid(), pot.grid(), "schwarz_audit");
  const GridSpec& g = p.grid();
  const std::optional<double> j0 = current_energy(p, opt);
  double rho_a2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) rho_a2 += p.rho.values[i] * pot.a.norm2_at(i);
  rho_a2 *= g.cell_volume();
  const double rhs = j0 ? std::sqrt(*j0) * std::sqrt(std::max(rho_a2, 0.0))
                        : std::numeric_limits<double>::infinity();
  std::vector<InequalityAudit> out;
  for (int k = 0; k < g.dim; ++k) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) lhs += std::abs(p.jp.comp[k][i] * pot.a.comp[k][i]);
    lhs *= g.cell_volume();
    out.push_back(make_audit("schwarz_" + std::to_string(k), lhs, rhs, relative_tolerance(lhs, rhs)));
  }
  return out;
}

}  // namespace cdft
