// Batch driver: one command per run, one JSON report per run.
//
// Exit status: 0 ok, 1 verdict false (validation or audit failure),
// 2 numerical failure, 3 I/O or configuration error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <unistd.h>
#include <vector>

#include "cdft/cdft.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace cdft;

namespace {

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::string output;
  std::map<std::string, double> tol;
  std::optional<double> tolerance;
  std::uint64_t seed = 0;
  std::string grid;
  int n = 1;
  double lambda = 0.5;
  std::string family;
  std::optional<std::size_t> budget;
  std::string plot;
  std::string evaluator = "q_n1";
  std::string export_dir;
};

const std::vector<std::pair<std::string, double>> kTolerances = {
    {"mass", 1e-8},  {"neg", 1e-12},  {"rho_floor", 1e-12}, {"j_floor", 1e-12},
    {"boundary_mass", 1e-10}, {"curl", 1e-6}, {"audit", 1e-8}, {"eig", 1e-10},
    {"gap", 1e-8},   {"search", 1e-3}, {"kin", 5.0},         {"el", 10.0}};

struct Failure {
  int status;
  std::string type;
  std::string message;
};

std::string fnv1a_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  char out[32];
  std::snprintf(out, sizeof out, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return out;
}

void write_atomic(const std::string& path, const std::string& text) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

class Runner {
 public:
  explicit Runner(const RunConfig& c) : cfg_(c) {
    vopt_.tol_mass_rel = tol("mass");
    vopt_.tol_neg_rel = tol("neg");
    vopt_.rho_floor_rel = tol("rho_floor");
    vopt_.j_floor_rel = tol("j_floor");
    vopt_.boundary_mass_rel = tol("boundary_mass");
    vopt_.curl_rel = tol("curl");
    aopt_.rel_tol = c.tolerance.value_or(tol("audit"));
  }

  ojson results = ojson::object();
  ojson functionals = ojson::array();
  ojson audits = ojson::array();
  ojson series = ojson::object();
  bool verdict = true;

  void run() {
    const std::string& c = cfg_.command;
    if (c == "validate") validate();
    else if (c == "vorticity") vorticity_cmd();
    else if (c == "build-det") build_det();
    else if (c == "bounds") bounds();
    else if (c == "groundstate") groundstate();
    else if (c == "variational") variational();
    else if (c == "legendre") legendre();
    else if (c == "envelope") envelope();
    else if (c == "euler") euler();
    else if (c == "probe") probe();
    else throw InvalidArgument("unknown command '" + c + "'");
  }

 private:
  const RunConfig& cfg_;
  ValidationOptions vopt_;
  AuditOptions aopt_;

  double tol(const std::string& name) const { return cfg_.tol.at(name); }

  const std::string& input(std::size_t k, const char* what) const {
    if (cfg_.inputs.size() <= k) throw InvalidArgument(std::string("missing --input for ") + what);
    return cfg_.inputs[k];
  }

  void add_audit(const InequalityAudit& a) {
    audits.push_back(to_json(a));
    verdict = verdict && a.pass;
  }
  void add_audits(const std::vector<InequalityAudit>& v) {
    for (const auto& a : v) add_audit(a);
  }
  void add_functional(const FunctionalValue& f, std::optional<double> t = std::nullopt) {
    functionals.push_back(to_json(f, t));
  }

  void plot_pair(const DensityPair& p, const std::string& prefix) {
    if (cfg_.plot.empty()) return;
    const ScalarField m = marginal_x1(p.rho);
    std::vector<double> x(m.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = m.grid.coord(0, i);
    ojson s;
    s["x"] = x;
    s["rho_x1"] = m.values;
    std::vector<svg::Series> lines{{"rho (x1 marginal)", m.values}};
    if (p.grid().dim == 1) {
      s["jp"] = p.jp.comp[0];
      lines.push_back({"jp", p.jp.comp[0]});
    }
    series[prefix] = s;
    fs::create_directories(cfg_.plot);
    svg::line_plot(fs::path(cfg_.plot) / (prefix + ".svg"), prefix, x, lines);
  }

  /// Reads the pair and checks it against N; returns false (verdict false)
  /// when validation fails.
  bool load_valid_pair(std::size_t k, int n, DensityPair& p, const char* key = "validation") {
    p = read_pair(input(k, "the density pair"));
    const ValidationReport r = validate_pair(p, n, vopt_);
    results[key] = to_json(r, vopt_);
    verdict = verdict && r.verdict;
    return r.verdict;
  }

  Scenario scenario(std::size_t k) const {
    std::optional<GridOverride> over;
    if (!cfg_.grid.empty()) over = parse_grid_override(cfg_.grid);
    Scenario s = load_scenario(input(k, "the scenario"), over);
    if (cfg_.tol.count("eig_set")) s.solver.tol_eig_rel = tol("eig");
    if (cfg_.tol.count("gap_set")) s.solver.gap_tol_rel = tol("gap");
    return s;
  }

  void validate() {
    DensityPair p;
    load_valid_pair(0, cfg_.n, p);
    add_functional(functional(FunctionalName::J1, j1(p.rho)));
    add_functional(functional(FunctionalName::J0, current_energy(p, vopt_)));
    plot_pair(p, "pair");
  }

  void vorticity_cmd() {
    const DensityPair p = read_pair(input(0, "the density pair"));
    const Vorticity w = vorticity(p, vopt_);
    const VectorField u = velocity(p, vopt_);
    const Mask mask = support_mask(p, vopt_);
    double umax = 0.0;
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) umax = std::max(umax, std::sqrt(u.norm2_at(i)));
      flagged += w.flagged[i];
    }
    const double t = vopt_.curl_rel * umax;
    results["vorticity"] = {{"max_norm", {{"value", w.max_norm}, {"tolerance", t}}},
                            {"flagged_cells", flagged},
                            {"curl_free", w.max_norm <= t}};
    if (!cfg_.export_dir.empty()) {
      fs::create_directories(cfg_.export_dir);
      const fs::path out = fs::path(cfg_.export_dir) / "vorticity.fld";
      write_field_file(out, to_field_file(w.omega));
      results["vorticity"]["path"] = out.string();
    }
  }

  void build_det() {
    DensityPair p;
    if (!load_valid_pair(0, cfg_.n, p)) return;
    const DetReport r = det_report(p, cfg_.n, p.grid().dim == 3, vopt_);
    const double h = p.grid().max_spacing();
    const double tol_kin = std::max(1e-8, tol("kin") * h * h * std::max(1.0, std::abs(r.t_formula)));
    results["det"] = to_json(r, tol_kin);
    if (r.exc) add_functional(functional(FunctionalName::Exc, *r.exc));
    add_functional(functional(FunctionalName::Texact, r.t_formula), tol_kin);
    add_audit(make_audit("|T_direct-T_formula|<=tol_kin", std::abs(r.t_direct - r.t_formula), tol_kin, 0.0));
    add_audit(r.kinetic_bound);
    add_audit(r.g_bound);
    if (!cfg_.export_dir.empty()) {
      const OrbitalSet o = build_orbitals(p, cfg_.n, vopt_);
      fs::create_directories(cfg_.export_dir);
      ojson paths = ojson::array();
      for (int k = 0; k < o.n; ++k) {
        const fs::path out = fs::path(cfg_.export_dir) / ("orbital_" + std::to_string(k) + ".fld");
        write_field_file(out, to_field_file(o.orbital(k)), FieldEncoding::binary);
        paths.push_back(out.string());
      }
      results["orbital_paths"] = paths;
    }
    plot_pair(p, "pair");
  }

  void bounds() {
    DensityPair p;
    const int n = cfg_.n;
    if (!load_valid_pair(0, n, p)) return;
    require_curl_free(p, std::nullopt, vopt_);
    const double J1 = j1(p.rho);
    const std::optional<double> J0 = current_energy(p, vopt_);
    add_functional(functional(FunctionalName::J1, J1));
    add_functional(functional(FunctionalName::J0, J0));
    add_functional(j_lambda(p, cfg_.lambda, vopt_));
    std::optional<double> hart;
    if (p.grid().dim == 3) {
      hart = hartree(p.rho);
      add_functional(functional(FunctionalName::Hartree, hart));
      add_functional(functional(FunctionalName::Exc, exc_fejer(p.rho, n)));
      add_audits(sobolev_chain_audit(p.rho, n, hart, aopt_));
      results["q_upper_bound_curlfree"] = q_upper_bound_curlfree(p, n, hart, vopt_);
    }
    if (n == 1) add_functional(functional(FunctionalName::Qn1, q_exact_n1(p, vopt_)));
    results["constants"] = {{"a", BoundConstants::a()},     {"b", BoundConstants::b()},
                            {"c", BoundConstants::c()},     {"C1", BoundConstants::hls()},
                            {"C2", BoundConstants::sobolev()}};
    add_audits(upper_bound_audit(p, n, cfg_.lambda, hart, aopt_, vopt_));
    add_audit(kinetic_bound_audit(p, n, aopt_, vopt_));
    add_audit(g_bound_audit(p.rho, n, aopt_));
    plot_pair(p, "pair");
  }

  SpectrumResult solve(const Scenario& s) {
    const LatticeHamiltonian H = discretize(s.potentials.v, s.potentials.a, s.boundary);
    const SpectrumResult r = ground_state(H, s.solver);
    ojson j = to_json(r);
    j["hermiticity_residual"] = {{"value", H.size() <= 2048 ? H.hermiticity_residual() : 0.0}, {"tolerance", 1e-13}};
    results["spectrum"] = j;
    return r;
  }

  void groundstate() {
    const Scenario s = scenario(0);
    const SpectrumResult r = solve(s);
    if (r.degenerate_flag) {
      results["density_path"] = nullptr;
      return;
    }
    const DensityPair p = densities_from_state(r);
    if (!cfg_.output.empty()) {
      const fs::path out = fs::path(cfg_.output).replace_extension(".pair.fld");
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      write_pair(out, p);
      results["density_path"] = out.string();
    }
    add_functional(functional(FunctionalName::J1, j1(p.rho)));
    add_functional(functional(FunctionalName::J0, current_energy(p, vopt_)));
    plot_pair(p, "ground_pair");
  }

  /// Ground pair of the scenario, or the pair given as second input.
  DensityPair pair_for(const Scenario& s, const SpectrumResult& r, bool& is_ground) {
    is_ground = cfg_.inputs.size() < 2;
    if (is_ground) return densities_from_state(r);
    DensityPair p = read_pair(cfg_.inputs[1]);
    require_same_grid(p.grid(), s.grid, "scenario and pair");
    return p;
  }

  void variational() {
    const Scenario s = scenario(0);
    const SpectrumResult r = solve(s);
    bool ground = false;
    const DensityPair p = pair_for(s, r, ground);
    const InequalityAudit a = variational_audit(p, s.potentials, s.boundary, vopt_);
    add_audit(a);
    if (ground)
      add_audit(make_audit("|e0-(Q+pairing)|<=5h^2*scale", std::abs(a.rhs - a.lhs), a.tolerance, 0.0));
    add_functional(functional(FunctionalName::Qn1, q_exact_n1(p, vopt_)));
    add_functional(functional(FunctionalName::Pairing, pairing_energy(p, s.potentials)));
    plot_pair(p, "pair");
  }

  PotentialFamily family_for(const GridSpec& g) const {
    if (cfg_.family.empty()) throw InvalidArgument("--family is required");
    PotentialFamily fam = load_family(cfg_.family, g);
    if (cfg_.budget) fam.budget = *cfg_.budget;
    if (cfg_.seed) fam.seed = cfg_.seed;
    return fam;
  }

  void legendre() {
    DensityPair p;
    if (!load_valid_pair(0, 1, p)) return;
    const PotentialFamily fam = family_for(p.grid());
    const LegendreResult r = f_legendre_sampled(p, fam);
    const double q = q_exact_n1(p, vopt_);
    results["legendre"] = to_json(r);
    add_functional(functional(FunctionalName::Qn1, q));
    add_audit(make_audit("F_sampled<=Q", r.f_lower, q, 1e-10 * std::max(1.0, std::abs(q))));
    results["q_minus_f"] = {{"value", q - r.f_lower}, {"tolerance", tol("search") * std::max(1.0, std::abs(q))}};
  }

  void envelope() {
    if (cfg_.inputs.empty()) throw InvalidArgument("envelope needs at least one --input pair");
    std::vector<DensityPair> pairs;
    for (std::size_t k = 0; k < cfg_.inputs.size(); ++k) {
      DensityPair p;
      if (!load_valid_pair(k, 1, p, ("validation_" + std::to_string(k)).c_str())) return;
      pairs.push_back(std::move(p));
    }
    const PotentialFamily fam = family_for(pairs.front().grid());
    const EnvelopeResult r = envelope_audit(pairs, fam, tol("search"), {}, vopt_);
    results["f_sampled"] = r.f_sampled;
    results["q_exact"] = r.q_exact;
    add_audits(r.audits);
  }

  void euler() {
    const Scenario s = scenario(0);
    const SpectrumResult r = solve(s);
    bool ground = false;
    const DensityPair p = pair_for(s, r, ground);
    const EulerLagrangeResidual el = euler_lagrange_residual(p, s.potentials, vopt_);
    const double h = s.grid.max_spacing();
    const double t = tol("el") * h * h * std::max(1.0, std::abs(el.mu_star));
    results["euler_lagrange"] = to_json(el, t);
    if (ground) {
      add_audit(make_audit("r_rho<=10h^2*scale", el.r_rho, t, 0.0));
      add_audit(make_audit("r_jp<=10h^2*scale", el.r_jp, t, 0.0));
    }
  }

  void probe() {
    const DensityPair p1 = read_pair(input(0, "the first pair"));
    const DensityPair p2 = read_pair(input(1, "the second pair"));
    std::function<double(const DensityPair&)> q;
    bool convex_expected = true;
    const int n = cfg_.n;
    const double lam = cfg_.lambda;
    if (cfg_.evaluator == "q_n1") {
      q = [this](const DensityPair& p) { return q_exact_n1(p, vopt_); };
    } else if (cfg_.evaluator == "j_lambda") {
      q = [this, lam](const DensityPair& p) { return j_lambda(p, lam, vopt_).get(); };
    } else if (cfg_.evaluator == "q_upper") {
      q = [this, n](const DensityPair& p) { return q_upper_bound_curlfree(p, n, std::nullopt, vopt_); };
      convex_expected = false;
    } else {
      throw InvalidArgument("unknown --evaluator '" + cfg_.evaluator + "' (q_n1, j_lambda, q_upper)");
    }
    const ConvexityProbe r =
        convexity_probe(p1, p2, q, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}, vopt_);
    const double t = 1e-10 * std::max(1.0, std::abs(q(p1)) + std::abs(q(p2)));
    results["probe"] = to_json(r, t);
    results["probe"]["evaluator"] = cfg_.evaluator;
    results["probe"]["asserted"] = convex_expected;
    if (convex_expected) add_audit(make_audit("convexity_margin>=0", 0.0, r.min_margin, t));
  }
};

ojson config_json(const RunConfig& c) {
  ojson j;
  j["inputs"] = c.inputs;
  j["output"] = c.output;
  j["n"] = c.n;
  j["lambda"] = c.lambda;
  j["seed"] = c.seed;
  j["grid"] = c.grid;
  j["family"] = c.family;
  j["budget"] = c.budget ? ojson(*c.budget) : ojson(nullptr);
  j["evaluator"] = c.evaluator;
  ojson t;
  for (const auto& [name, def] : kTolerances) t[name] = c.tol.at(name);
  j["tolerances"] = t;
  j["tolerance_override"] = c.tolerance ? ojson(*c.tolerance) : ojson(nullptr);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  CLI::App app{"Current-density functional toolkit: validation, determinant construction, bounds, "
               "lattice ground states and sampled Legendre transforms."};
  app.set_version_flag("--version", cdft::version);
  app.require_subcommand(1, 1);
  app.add_option("--input,-i", cfg.inputs, "Input file (repeatable)");
  app.add_option("--output,-o", cfg.output, "Report path (default: stdout)");
  app.add_option("--seed", cfg.seed, "Seed for randomized searches")->capture_default_str();
  app.add_option("--grid", cfg.grid, "Scenario grid override: cells or cells,lo,hi");
  app.add_option("--n", cfg.n, "Particle number")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--lambda", cfg.lambda, "Weight of J1 in J_lambda")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  app.add_option("--family", cfg.family, "Potential family JSON");
  app.add_option("--budget", cfg.budget, "Evaluation budget of the Legendre search");
  app.add_option("--plot", cfg.plot, "Directory for SVG plots");
  app.add_option("--evaluator", cfg.evaluator, "probe: q_n1, j_lambda or q_upper")->capture_default_str();
  app.add_option("--export", cfg.export_dir, "Directory for exported fields");
  app.add_option("--tolerance", cfg.tolerance, "Relative tolerance for every inequality audit")
      ->check(CLI::PositiveNumber);
  std::map<std::string, std::optional<double>> tol_flags;
  for (const auto& [name, def] : kTolerances) {
    app.add_option("--tol." + name, tol_flags[name], "Tolerance '" + name + "' (default " + CLI::detail::to_string(def) + ")")
        ->check(CLI::PositiveNumber);
  }
  const char* commands[][2] = {
      {"validate", "Check a density pair against the N-representability proxy"},
      {"vorticity", "Vorticity curl(j/rho) of a 3D pair"},
      {"build-det", "Build determinant orbitals and compare kinetic energies"},
      {"bounds", "Evaluate functionals and audit every inequality"},
      {"groundstate", "Solve a lattice scenario"},
      {"variational", "Audit e0 <= Q + pairing"},
      {"legendre", "Sampled Legendre transform of a pair"},
      {"envelope", "Convex-envelope audits over pairs"},
      {"euler", "Euler-Lagrange residuals"},
      {"probe", "Convexity probe along a segment"}};
  for (const auto& c : commands) app.add_subcommand(c[0], c[1])->fallthrough();

  auto finish = [&](int status, const Runner* r, const std::optional<Failure>& f) {
    ojson rep;
    rep["tool"] = "cdft";
    rep["version"] = cdft::version;
    rep["schema"] = cdft::report_schema;
    rep["command"] = cfg.command;
    try {
      rep["config"] = config_json(cfg);
    } catch (...) {
      rep["config"] = nullptr;
    }
    ojson inputs = ojson::array();
    for (const auto& p : cfg.inputs) {
      ojson e;
      e["path"] = p;
      try {
        e["digest"] = fnv1a_digest(p);
      } catch (const std::exception&) {
        e["digest"] = nullptr;
      }
      inputs.push_back(e);
    }
    if (!cfg.family.empty()) {
      ojson e;
      e["path"] = cfg.family;
      try {
        e["digest"] = fnv1a_digest(cfg.family);
      } catch (const std::exception&) {
        e["digest"] = nullptr;
      }
      inputs.push_back(e);
    }
    rep["inputs"] = inputs;
    rep["results"] = r ? r->results : ojson::object();
    rep["functionals"] = r ? r->functionals : ojson::array();
    rep["audits"] = r ? r->audits : ojson::array();
    if (r && !r->series.empty()) rep["series"] = r->series;
    rep["verdict"] = status == 0;
    rep["exit_status"] = status;
    rep["error"] = f ? ojson{{"type", f->type}, {"message", f->message}} : ojson(nullptr);
    rep["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string text = rep.dump(2) + "\n";
    try {
      if (cfg.output.empty())
        std::cout << text;
      else
        write_atomic(cfg.output, text);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    }
    if (r && !cfg.plot.empty()) {
      std::vector<std::string> names;
      std::vector<double> scaled;
      std::vector<bool> pass;
      for (const auto& a : r->audits) {
        names.push_back(a["name"].get<std::string>());
        const double m = a["margin"].is_number() ? a["margin"].get<double>() : 0.0;
        const double s = std::max({a["tolerance"].get<double>(), std::abs(a["rhs"].is_number() ? a["rhs"].get<double>() : 0.0), 1e-300});
        scaled.push_back(m / s);
        pass.push_back(a["pass"].get<bool>());
      }
      if (!names.empty()) svg::margin_plot(fs::path(cfg.plot) / "margins.svg", names, scaled, pass);
    }
    if (f) std::cerr << "error (" << f->type << "): " << f->message << "\n";
    return status;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    for (const auto& [name, def] : kTolerances) cfg.tol[name] = def;
    return finish(3, nullptr, Failure{3, "ConfigError", e.what()});
  }
  cfg.command = app.get_subcommands().front()->get_name();
  for (const auto& [name, def] : kTolerances) {
    cfg.tol[name] = tol_flags[name].value_or(def);
    if (tol_flags[name]) cfg.tol[name + "_set"] = 1.0;
  }

  Runner runner(cfg);
  try {
    runner.run();
  } catch (const ValidationFailed& e) {
    return finish(1, &runner, Failure{1, "ValidationFailed", e.what()});
  } catch (const CurlTooLarge& e) {
    return finish(2, &runner, Failure{2, "CurlTooLarge", e.what()});
  } catch (const PathMismatch& e) {
    return finish(2, &runner, Failure{2, "PathMismatch", e.what()});
  } catch (const NonConvergence& e) {
    return finish(2, &runner, Failure{2, "NonConvergence", e.what()});
  } catch (const DegenerateGroundState& e) {
    return finish(2, &runner, Failure{2, "DegenerateGroundState", e.what()});
  } catch (const NumericalError& e) {
    return finish(2, &runner, Failure{2, "NumericalError", e.what()});
  } catch (const IoError& e) {
    return finish(3, &runner, Failure{3, "IoError", e.what()});
  } catch (const Error& e) {
    return finish(3, &runner, Failure{3, "ConfigError", e.what()});
  } catch (const std::filesystem::filesystem_error& e) {
    return finish(3, &runner, Failure{3, "IoError", e.what()});
  }
  return finish(runner.verdict ? 0 : 1, &runner, std::nullopt);
}
