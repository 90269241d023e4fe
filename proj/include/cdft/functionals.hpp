#pragma once

// Computable density functionals and the inequality chains that bound the
// constrained-search functional from above and below.

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "cdft/audit.hpp"
#include "cdft/coulomb.hpp"
#include "cdft/density.hpp"

namespace cdft {

/// Constants of the upper bound a N + (b + c N^2) J1 + J0 and of the
/// Hardy-Littlewood-Sobolev / Sobolev chain feeding it.
struct BoundConstants {
  static double a() { return 4.0 / (3.0 * std::sqrt(3.0) * std::numbers::pi); }
  static double b() { return 1.0 - four_pi_sq() / 12.0; }
  static double c() { return four_pi_sq() / 12.0 + a(); }
  static double hls() { return 2.0 * std::pow(4.0 / std::sqrt(std::numbers::pi), 2.0 / 3.0) / 3.0; }
  static double sobolev() {
    return 2.0 / (std::sqrt(3.0) * std::cbrt(2.0) * std::pow(std::numbers::pi, 2.0 / 3.0));
  }
  static double four_pi_sq() { return 16.0 * std::numbers::pi * std::numbers::pi; }
  /// 1 + (4 pi)^2 (N^2 - 1) / 12, the J1 coefficient of the determinant bound.
  static double det_coefficient(int n) { return 1.0 + four_pi_sq() * (double(n) * n - 1.0) / 12.0; }
};

struct AuditOptions {
  double rel_tol = 1e-8;
};

/// Membership in the N-representable proxy: trusted provenance, or a fresh
/// validation against the rounded mass.
inline bool in_representable_set(const DensityPair& p, const ValidationOptions& opt = {}) {
  if (p.representable()) return true;
  DensityPair copy = p;
  const int n = static_cast<int>(std::lround(integrate(p.rho)));
  return validate_pair(copy, n, opt).verdict;
}

inline FunctionalValue j0(const DensityPair& p, const ValidationOptions& opt = {}) {
  FunctionalValue f{FunctionalName::J0, std::nullopt, std::nullopt};
  if (in_representable_set(p, opt)) f.value = current_energy(p, opt);
  return f;
}

inline double j1(const ScalarField& rho) { return von_weizsacker(rho); }

/// lambda J1 + (1 - lambda) J0 on the representable set, +inf elsewhere.
inline FunctionalValue j_lambda(const DensityPair& p, double lambda, const ValidationOptions& opt = {}) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("j_lambda: lambda must lie in [0,1]");
  FunctionalValue f{FunctionalName::Jlambda, std::nullopt, lambda};
  if (!in_representable_set(p, opt)) return f;
  const std::optional<double> cur = current_energy(p, opt);
  if (!cur) return f;
  f.value = lambda * j1(p.rho) + (1.0 - lambda) * *cur;
  return f;
}

/// (1/2) sum sum rho rho / sqrt(|x-y|^2 + eta^2) with eta = h/2.
inline double hartree(const ScalarField& rho) { return 0.5 * softened_pair_sum(rho); }

inline double lp_norm(const ScalarField& f, double p) {
  double s = 0.0;
  for (double x : f.values) s += std::pow(std::abs(x), p);
  return std::pow(s * f.grid.cell_volume(), 1.0 / p);
}

inline InequalityAudit hls_audit(const ScalarField& rho, std::optional<double> hartree_value = std::nullopt,
                                 const AuditOptions& opt = {}) {
  const double lhs = hartree_value ? *hartree_value : hartree(rho);
  const double n65 = lp_norm(rho, 6.0 / 5.0);
  const double rhs = BoundConstants::hls() * n65 * n65;
  return make_audit("hartree<=C1*|rho|_6/5^2", lhs, rhs, relative_tolerance(lhs, rhs, opt.rel_tol));
}

/// Every link of hartree <= C1 |rho|_{6/5}^2 <= C1 N^{3/2} |rho|_3^{1/2}
/// <= C1 C2 N^{3/2} J1^{1/2} <= a (N + N^2 J1).
inline std::vector<InequalityAudit> sobolev_chain_audit(const ScalarField& rho, int n,
                                                        std::optional<double> hartree_value = std::nullopt,
                                                        const AuditOptions& opt = {}) {
  const double N = n;
  const double c1 = BoundConstants::hls(), c2 = BoundConstants::sobolev(), a = BoundConstants::a();
  const double h = hartree_value ? *hartree_value : hartree(rho);
  const double n65 = lp_norm(rho, 6.0 / 5.0);
  const double l1 = c1 * n65 * n65;
  const double l2 = c1 * std::pow(N, 1.5) * std::sqrt(lp_norm(rho, 3.0));
  const double l3 = c1 * c2 * std::pow(N, 1.5) * std::sqrt(j1(rho));
  const double l4 = a * (N + N * N * j1(rho));
  auto link = [&](const char* name, double lo, double hi) {
    return make_audit(name, lo, hi, relative_tolerance(lo, hi, opt.rel_tol));
  };
  return {link("hartree<=C1*|rho|_6/5^2", h, l1), link("C1*|rho|_6/5^2<=C1*N^1.5*|rho|_3^0.5", l1, l2),
          link("C1*N^1.5*|rho|_3^0.5<=C1*C2*N^1.5*J1^0.5", l2, l3),
          link("C1*C2*N^1.5*J1^0.5<=a*(N+N^2*J1)", l3, l4)};
}

/// Exact constrained search at N = 1: J1 + J0 for a curl-free pair of unit
/// mass (a single orbital sqrt(rho) e^{iS} attains it).
inline double q_exact_n1(const DensityPair& p, const ValidationOptions& opt = {}) {
  DensityPair copy = p;
  const ValidationReport r = validate_pair(copy, 1, opt);
  if (!r.verdict) throw ValidationFailed("q_exact_n1 needs a validated pair of unit mass");
  require_curl_free(p, std::nullopt, opt);
  return r.j1_value + *r.j0_value;
}

/// Upper bound on Q for curl-free pairs:
/// (1 + (4pi)^2 (N^2-1)/12) J1 + J0 + Hartree.
inline double q_upper_bound_curlfree(const DensityPair& p, int n,
                                     std::optional<double> hartree_value = std::nullopt,
                                     const ValidationOptions& opt = {}) {
  require_curl_free(p, std::nullopt, opt);
  const std::optional<double> cur = current_energy(p, opt);
  if (!cur) throw ValidationFailed("q_upper_bound_curlfree: J0 is infinite");
  const double h = hartree_value ? *hartree_value : hartree(p.rho);
  return BoundConstants::det_coefficient(n) * j1(p.rho) + *cur + h;
}

inline double upper_bound_rhs(int n, double j1_value, double j0_value) {
  const double N = n;
  return BoundConstants::a() * N + (BoundConstants::b() + BoundConstants::c() * N * N) * j1_value + j0_value;
}

/// J_lambda <= a N + (b + c N^2) J1 + J0; at N = 1 also J_lambda <= Q <= rhs
/// with the exact single-particle Q. When a Hartree value is supplied the
/// determinant bound with the Hartree term is placed in the chain as well.
inline std::vector<InequalityAudit> upper_bound_audit(const DensityPair& p, int n, double lambda,
                                                      std::optional<double> hartree_value = std::nullopt,
                                                      const AuditOptions& aopt = {},
                                                      const ValidationOptions& opt = {}) {
  require_curl_free(p, std::nullopt, opt);
  const FunctionalValue jl = j_lambda(p, lambda, opt);
  if (jl.is_infinite()) throw ValidationFailed("upper_bound_audit needs a representable pair");
  const double J1 = j1(p.rho);
  const double J0 = *current_energy(p, opt);
  const double rhs = upper_bound_rhs(n, J1, J0);
  auto link = [&](std::string name, double lo, double hi) {
    return make_audit(std::move(name), lo, hi, relative_tolerance(lo, hi, aopt.rel_tol));
  };
  std::vector<InequalityAudit> out{link("J_lambda<=aN+(b+cN^2)J1+J0", jl.get(), rhs)};
  if (n == 1) {
    const double q = q_exact_n1(p, opt);
    out.push_back(link("J_lambda<=Q", jl.get(), q));
    out.push_back(link("Q<=aN+(b+cN^2)J1+J0", q, rhs));
  }
  if (hartree_value) {
    const double upper = BoundConstants::det_coefficient(n) * J1 + J0 + *hartree_value;
    if (n == 1) out.push_back(link("Q<=det_bound", J1 + J0, upper));
    out.push_back(link("det_bound<=aN+(b+cN^2)J1+J0", upper, rhs));
  }
  return out;
}

}  // namespace cdft
