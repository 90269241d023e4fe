#pragma once

// JSON scenario files (1D lattice problems) and potential-family files.
//
// scenario: {"grid": {"cells", "lo", "hi", "walls"}, "boundary",
//            "v": [term...], "a": [term...], "tolerances": {"eig", "gap"}}
// family:   {"basis": [{"name", "target", term fields, "lo", "hi"}...],
//            "budget", "seed", "restarts", "boundary"}
// term:     {"kind": "poly", "power"} | {"kind": "gauss", "center", "width"}
//           | {"kind": "field", "path"}, plus "coefficient" inside scenarios.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdft/convex_lab.hpp"
#include "cdft/errors.hpp"
#include "cdft/field_io.hpp"
#include "cdft/toy_solver.hpp"

namespace cdft {

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

/// Shape of one basis/potential term on grid g; "field" paths are resolved
/// against base_dir.
inline ScalarField term_shape(const nlohmann::json& t, const GridSpec& g, const std::filesystem::path& base_dir) {
  const std::string kind = t.at("kind").get<std::string>();
  if (kind == "poly") return poly_shape(g, t.at("power").get<int>());
  if (kind == "gauss") return gauss_shape(g, t.at("center").get<double>(), t.at("width").get<double>());
  if (kind == "field") {
    ScalarField f = scalar_from_field_file(read_field_file(base_dir / t.at("path").get<std::string>()));
    require_same_grid(g, f.grid, "field term");
    return f;
  }
  throw InvalidArgument("unknown term kind '" + kind + "'");
}

struct GridOverride {
  std::size_t cells = 0;
  std::optional<double> lo, hi;
};

/// Parses "cells" or "cells,lo,hi".
inline GridOverride parse_grid_override(const std::string& s) {
  GridOverride o;
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  try {
    if (parts.size() != 1 && parts.size() != 3) throw std::invalid_argument("arity");
    const long n = std::stol(parts[0]);
    if (n < 3) throw std::invalid_argument("cells");
    o.cells = static_cast<std::size_t>(n);
    if (parts.size() == 3) {
      o.lo = std::stod(parts[1]);
      o.hi = std::stod(parts[2]);
    }
  } catch (const std::exception&) {
    throw InvalidArgument("--grid expects 'cells' or 'cells,lo,hi', got '" + s + "'");
  }
  return o;
}

struct Scenario {
  GridSpec grid;
  Boundary boundary = Boundary::dirichlet;
  Potentials potentials;
  SolverOptions solver;
};

inline Scenario load_scenario(const std::filesystem::path& path, const std::optional<GridOverride>& over = {}) {
  const nlohmann::json j = read_json_file(path);
  const std::filesystem::path dir = path.parent_path();
  Scenario s;
  try {
    const auto& gj = j.at("grid");
    std::size_t cells = gj.at("cells").get<std::size_t>();
    double lo = gj.at("lo").get<double>(), hi = gj.at("hi").get<double>();
    if (over) {
      cells = over->cells;
      if (over->lo) lo = *over->lo;
      if (over->hi) hi = *over->hi;
    }
    if (!(hi > lo)) throw InvalidArgument("scenario grid needs hi > lo");
    s.grid = gj.value("walls", false) ? walled_line(cells, lo, hi) : GridSpec::line(cells, lo, hi);
    s.boundary = boundary_from_string(j.value("boundary", std::string("dirichlet")));
    ScalarField v(s.grid);
    VectorField a(s.grid);
    auto accumulate = [&](const char* key, std::vector<double>& dst) {
      if (!j.contains(key)) return;
      for (const auto& t : j.at(key)) {
        const ScalarField shape = term_shape(t, s.grid, dir);
        const double c = t.value("coefficient", 1.0);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += c * shape.values[i];
      }
    };
    accumulate("v", v.values);
    accumulate("a", a.comp[0]);
    s.potentials = Potentials(std::move(v), std::move(a));
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      s.solver.tol_eig_rel = t.value("eig", s.solver.tol_eig_rel);
      s.solver.gap_tol_rel = t.value("gap", s.solver.gap_tol_rel);
      if (!(s.solver.tol_eig_rel > 0.0) || !(s.solver.gap_tol_rel > 0.0))
        throw InvalidArgument("scenario tolerances must be positive");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad scenario '" + path.string() + "': " + e.what());
  }
  return s;
}

inline PotentialFamily load_family(const std::filesystem::path& path, const GridSpec& grid) {
  const nlohmann::json j = read_json_file(path);
  const std::filesystem::path dir = path.parent_path();
  PotentialFamily fam;
  fam.grid = grid;
  try {
    for (const auto& b : j.at("basis")) {
      BasisShape s;
      s.name = b.value("name", b.at("kind").get<std::string>());
      const std::string target = b.value("target", std::string("v"));
      if (target != "v" && target != "a") throw InvalidArgument("basis target must be 'v' or 'a'");
      s.target = target == "v" ? PotentialTarget::v : PotentialTarget::a;
      s.shape = term_shape(b, grid, dir);
      s.lo = b.at("lo").get<double>();
      s.hi = b.at("hi").get<double>();
      fam.basis.push_back(std::move(s));
    }
    fam.budget = j.value("budget", fam.budget);
    fam.seed = j.value("seed", fam.seed);
    fam.restarts = j.value("restarts", fam.restarts);
    fam.boundary = boundary_from_string(j.value("boundary", std::string("dirichlet")));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad family '" + path.string() + "': " + e.what());
  }
  fam.check();
  return fam;
}

}  // namespace cdft
