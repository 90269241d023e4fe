// Writes a small set of input files for the command-line driver:
//   gauss_pair.fld      3D Gaussian pair, N = 1, gradient current
//   gauss_manifest.json the same pair as separate rho/jp files
//   rotational_pair.fld 3D Gaussian pair with a rigid-rotation current
//   invalid_pair.fld    1D pair with a negative density cell
//   ground_pair.fld     1D harmonic ground pair (256 cells on [-8, 8])
//   shifted_pair.fld    the ground pair displaced by one cell
//   harmonic.json, magnetic.json, box.json, family.json

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cdft/cdft.hpp"

namespace fs = std::filesystem;
using namespace cdft;

namespace {

/// Zero the current where the density is below the floor, as the solver does.
DensityPair floored(const ScalarField& rho, VectorField j) {
  DensityPair p(rho, std::move(j));
  const FloorRule fl = FloorRule::of(p);
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (fl.below(rho.values[i]))
      for (int a = 0; a < rho.grid.dim; ++a) p.jp.comp[a][i] = 0.0;
  return p;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

nlohmann::ordered_json line_grid(std::size_t cells, double lo, double hi) {
  return {{"cells", cells}, {"lo", lo}, {"hi", hi}};
}

}  // namespace

int main(int argc, char** argv) {
  std::string dir = "fixtures";
  std::size_t cube = 20;
  CLI::App app{"Generate fixture inputs for cdft"};
  app.add_option("dir", dir, "Output directory")->capture_default_str();
  app.add_option("--cube", cube, "Cells per axis of the 3D fixtures")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(dir);
    const fs::path d(dir);

    const GridSpec g3 = GridSpec::cube(cube, -8.0, 8.0);
    const ScalarField rho = gaussian_density(g3, 1.0, 1.0);
    write_pair(d / "gauss_pair.fld", floored(rho, gradient_current(rho, CubicPhase::linear({0.4, -0.3, 0.2}))));
    write_pair_manifest(d / "gauss_manifest.json",
                        floored(rho, gradient_current(rho, CubicPhase::linear({0.4, -0.3, 0.2}))), 1);
    write_pair(d / "rotational_pair.fld", floored(rho, rotational_current(rho, 1.0)));

    const GridSpec g1 = GridSpec::line(64, -8.0, 8.0);
    ScalarField bad = gaussian_density(g1, 1.0, 1.0);
    bad.values[10] = -1e-3;
    write_pair(d / "invalid_pair.fld", DensityPair(bad, VectorField(g1)));

    nlohmann::ordered_json harmonic;
    harmonic["grid"] = line_grid(256, -8.0, 8.0);
    harmonic["boundary"] = "dirichlet";
    harmonic["v"] = {{{"kind", "poly"}, {"power", 2}, {"coefficient", 1.0}}};
    write_json(d / "harmonic.json", harmonic);

    nlohmann::ordered_json magnetic = harmonic;
    magnetic["a"] = {{{"kind", "poly"}, {"power", 0}, {"coefficient", 0.3}},
                     {{"kind", "poly"}, {"power", 1}, {"coefficient", 0.1}}};
    write_json(d / "magnetic.json", magnetic);

    nlohmann::ordered_json box;
    box["grid"] = {{"cells", 255}, {"lo", 0.0}, {"hi", 1.0}, {"walls", true}};
    box["boundary"] = "dirichlet";
    write_json(d / "box.json", box);

    nlohmann::ordered_json family;
    family["basis"] = {
        {{"name", "x2"}, {"target", "v"}, {"kind", "poly"}, {"power", 2}, {"lo", 0.0}, {"hi", 2.0}},
        {{"name", "x1"}, {"target", "v"}, {"kind", "poly"}, {"power", 1}, {"lo", -1.0}, {"hi", 1.0}},
        {{"name", "bump"}, {"target", "v"}, {"kind", "gauss"}, {"center", 0.5}, {"width", 1.0}, {"lo", -2.0}, {"hi", 2.0}},
        {{"name", "a0"}, {"target", "a"}, {"kind", "poly"}, {"power", 0}, {"lo", -1.0}, {"hi", 1.0}},
        {{"name", "a1"}, {"target", "a"}, {"kind", "poly"}, {"power", 1}, {"lo", -0.5}, {"hi", 0.5}}};
    family["budget"] = 600;
    family["seed"] = 0;
    family["restarts"] = 3;
    family["boundary"] = "dirichlet";
    write_json(d / "family.json", family);

    const Scenario s = load_scenario(d / "harmonic.json");
    const SpectrumResult r = ground_state(discretize(s.potentials.v, s.potentials.a, s.boundary));
    const DensityPair ground = densities_from_state(r);
    write_pair(d / "ground_pair.fld", ground);
    DensityPair shifted = ground;
    for (std::size_t i = 0; i < shifted.rho.size(); ++i)
      shifted.rho.values[i] = ground.rho.values[i == 0 ? 0 : i - 1];
    shifted.provenance = Provenance::raw;
    write_pair(d / "shifted_pair.fld", shifted);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
