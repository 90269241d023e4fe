#pragma once

// JSON serialization of results. Keys keep insertion order so reports diff
// cleanly; +infinity functional values are written as {"value": null,
// "infinite": true}.

#include <json.hpp>

#include "cdft/audit.hpp"
#include "cdft/convex_lab.hpp"
#include "cdft/density.hpp"
#include "cdft/detbuilder.hpp"
#include "cdft/toy_solver.hpp"

namespace cdft {

using ojson = nlohmann::ordered_json;

inline ojson to_json(const InequalityAudit& a) {
  ojson j;
  j["name"] = a.name;
  j["lhs"] = a.lhs;
  j["rhs"] = a.rhs;
  j["margin"] = a.margin;
  j["tolerance"] = a.tolerance;
  j["pass"] = a.pass;
  return j;
}

inline ojson to_json(const std::vector<InequalityAudit>& audits) {
  ojson arr = ojson::array();
  for (const auto& a : audits) arr.push_back(to_json(a));
  return arr;
}

inline ojson to_json(const FunctionalValue& f, std::optional<double> tolerance = std::nullopt) {
  ojson j;
  j["name"] = to_string(f.name);
  if (f.value)
    j["value"] = *f.value;
  else
    j["value"] = nullptr;
  j["infinite"] = f.is_infinite();
  if (f.lambda) j["lambda"] = *f.lambda;
  j["tolerance"] = tolerance ? ojson(*tolerance) : ojson(nullptr);
  return j;
}

inline FunctionalValue functional(FunctionalName name, std::optional<double> v,
                                  std::optional<double> lambda = std::nullopt) {
  return FunctionalValue{name, v, lambda};
}

inline ojson to_json(const ValidationReport& r, const ValidationOptions& opt) {
  ojson j;
  j["verdict"] = r.verdict;
  j["reasons"] = r.reasons;
  j["n_target"] = r.n_target;
  j["mass"] = {{"value", r.mass}, {"tolerance", opt.tol_mass_rel * std::max(r.n_target, 1)}};
  j["negativity_fraction"] = {{"value", r.negativity_fraction}, {"tolerance", opt.tol_neg_rel}};
  j["boundary_mass_fraction"] = {{"value", r.boundary_mass_fraction}, {"tolerance", opt.boundary_mass_rel}};
  j["jp_l1_norm"] = r.jp_l1_norm;
  j["floor_flagged_cells"] = r.floor_flagged;
  j["floor"] = {{"rho_rel", opt.rho_floor_rel}, {"j_rel", opt.j_floor_rel}};
  return j;
}

inline ojson to_json(const DetReport& r, double tol_kin) {
  ojson j;
  j["t_direct"] = r.t_direct;
  j["t_formula"] = r.t_formula;
  j["t_direct_minus_formula"] = {{"value", r.t_direct - r.t_formula}, {"tolerance", tol_kin}};
  j["t_bound_rhs"] = r.t_bound_rhs;
  j["jp_error_l1"] = r.jp_error_l1;
  j["rho_error_max_rel"] = {{"value", r.rho_error_max}, {"tolerance", 1e-12}};
  j["gram_offdiag_max"] = r.gram_offdiag_max;
  if (r.exc) j["exc"] = *r.exc;
  return j;
}

inline ojson to_json(const SpectrumResult& s) {
  ojson j;
  j["e0"] = s.e0;
  j["gap"] = s.gap;
  j["residual"] = {{"value", s.residual}, {"tolerance", s.tolerance}};
  j["degenerate"] = s.degenerate_flag;
  j["boundary"] = to_string(s.boundary);
  j["node_cells"] = s.node_cells;
  return j;
}

inline ojson to_json(const LegendreResult& r, bool with_trace = true) {
  ojson j;
  j["f_lower"] = r.f_lower;
  j["argmax"] = r.argmax;
  j["evaluations"] = r.evaluations;
  j["failures"] = r.failures;
  if (with_trace) {
    ojson t = ojson::array();
    for (const auto& e : r.trace) {
      ojson row;
      row["restart"] = e.restart;
      row["coefficients"] = e.coefficients;
      row["value"] = e.value;  // -inf serializes as null
      t.push_back(std::move(row));
    }
    j["trace"] = std::move(t);
  }
  return j;
}

inline ojson to_json(const EulerLagrangeResidual& r, double tolerance) {
  ojson j;
  j["r_rho"] = {{"value", r.r_rho}, {"tolerance", tolerance}};
  j["r_jp"] = {{"value", r.r_jp}, {"tolerance", tolerance}};
  j["mu_star"] = r.mu_star;
  return j;
}

inline ojson to_json(const ConvexityProbe& p, double tolerance) {
  ojson j;
  j["min_margin"] = {{"value", p.min_margin}, {"tolerance", tolerance}};
  j["lambdas"] = p.lambdas;
  j["margins"] = p.margins;
  return j;
}

}  // namespace cdft
