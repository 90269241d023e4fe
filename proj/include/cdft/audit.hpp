#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace cdft {

/// One audited inequality lhs <= rhs. pass <=> margin >= -tolerance.
struct InequalityAudit {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = false;
  double tolerance = 0.0;
};

inline InequalityAudit make_audit(std::string name, double lhs, double rhs, double tolerance) {
  InequalityAudit a;
  a.name = std::move(name);
  a.lhs = lhs;
  a.rhs = rhs;
  a.margin = rhs - lhs;
  a.tolerance = tolerance;
  a.pass = std::isfinite(a.margin) && a.margin >= -tolerance;
  return a;
}

/// Relative audit tolerance: rel * max(|lhs|, |rhs|) with a tiny absolute floor.
inline double relative_tolerance(double lhs, double rhs, double rel = 1e-10) {
  return rel * std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

enum class FunctionalName { J0, J1, Jlambda, Hartree, Pairing, Qn1, Texact, Exc };

inline const char* to_string(FunctionalName n) {
  switch (n) {
    case FunctionalName::J0: return "J0";
    case FunctionalName::J1: return "J1";
    case FunctionalName::Jlambda: return "Jlambda";
    case FunctionalName::Hartree: return "Hartree";
    case FunctionalName::Pairing: return "Pairing";
    case FunctionalName::Qn1: return "Qn1";
    case FunctionalName::Texact: return "Texact";
    case FunctionalName::Exc: return "Exc";
  }
  return "?";
}

/// A functional value; an empty `value` is the tagged +infinity used when a
/// pair falls outside the N-representable set.
struct FunctionalValue {
  FunctionalName name = FunctionalName::J0;
  std::optional<double> value;
  std::optional<double> lambda;

  bool is_infinite() const { return !value.has_value(); }
  double get() const {
    if (!value) throw std::logic_error(std::string(to_string(name)) + " is +inf");
    return *value;
  }
};

}  // namespace cdft
