#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace cdft;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("cdft_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

bool same_pair(const DensityPair& a, const DensityPair& b) {
  if (!(a.grid() == b.grid()) || a.provenance != b.provenance) return false;
  if (a.rho.values != b.rho.values) return false;
  for (int k = 0; k < a.grid().dim; ++k)
    if (a.jp.comp[k] != b.jp.comp[k]) return false;
  return true;
}

}  // namespace

TEST_CASE("pair field round trips bit-exactly in both encodings") {
  const fs::path d = scratch_dir("pair");
  DensityPair p = fixtures::random_pair(3, GridSpec::box({6, 5, 4}, {-3, -2, -1}, {3, 2, 1.5}), 1);
  p.provenance = Provenance::validated_YN;
  for (FieldEncoding enc : {FieldEncoding::text, FieldEncoding::binary}) {
    const fs::path f = d / (enc == FieldEncoding::text ? "p.txt.fld" : "p.bin.fld");
    write_pair(f, p, enc);
    CHECK(same_pair(read_pair(f), p));
  }
  const DensityPair line = fixtures::ground_pair(Potentials(fixtures::harmonic(GridSpec::line(40, -6, 6)), fixtures::affine_a(GridSpec::line(40, -6, 6), 0.2, 0.0)));
  write_pair(d / "line.fld", line);
  CHECK(same_pair(read_pair(d / "line.fld"), line));
}

TEST_CASE("scalar, vector and complex fields round trip") {
  const fs::path d = scratch_dir("kinds");
  const GridSpec g = GridSpec::cube(4, 0.0, 1.0);
  const ScalarField s = sample(g, [](const Point3& x) { return std::sin(7.0 * x[0]) / 3.0 + x[1]; });
  write_field_file(d / "s.fld", to_field_file(s), FieldEncoding::binary);
  CHECK(scalar_from_field_file(read_field_file(d / "s.fld")).values == s.values);

  const VectorField u = sample_vector(g, [](const Point3& x) { return Point3{x[0], -x[1] * 1e-300, 1e300 * x[2]}; });
  write_field_file(d / "u.fld", to_field_file(u));
  const FieldFile fu = read_field_file(d / "u.fld");
  CHECK(fu.kind == "vector");
  CHECK(fu.components == 3);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (int a = 0; a < 3; ++a) CHECK(fu.data[i * 3 + a] == u.comp[a][i]);

  ComplexField z(g);
  for (std::size_t i = 0; i < g.size(); ++i) z.values[i] = {0.1 * i, -1.0 / (i + 1.0)};
  write_field_file(d / "z.fld", to_field_file(z));
  const FieldFile fz = read_field_file(d / "z.fld");
  CHECK(fz.kind == "complex");
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(fz.data[2 * i] == z.values[i].real());
    CHECK(fz.data[2 * i + 1] == z.values[i].imag());
  }
}

TEST_CASE("pair manifest round trip") {
  const fs::path d = scratch_dir("manifest");
  DensityPair p = fixtures::random_pair(4, GridSpec::cube(6, -4.0, 4.0), 1);
  p.provenance = Provenance::validated_YN;
  write_pair_manifest(d / "m.json", p, 1, FieldEncoding::binary);
  CHECK(fs::exists(d / "m.rho.fld"));
  CHECK(fs::exists(d / "m.jp.fld"));
  CHECK(same_pair(read_pair(d / "m.json"), p));

  write_text(d / "bad.json", R"({"n": 1, "rho": "m.rho.fld"})");
  CHECK_THROWS_AS(read_pair(d / "bad.json"), IoError);
  write_text(d / "swapped.json", R"({"n": 1, "rho": "m.jp.fld", "jp": "m.rho.fld"})");
  CHECK_THROWS_AS(read_pair(d / "swapped.json"), IoError);
}

TEST_CASE("malformed field files are rejected") {
  const fs::path d = scratch_dir("bad");
  CHECK_THROWS_AS(read_field_file(d / "missing.fld"), IoError);
  write_text(d / "magic.fld", "CDFT-FLD v2\n{}\n");
  CHECK_THROWS_AS(read_field_file(d / "magic.fld"), IoError);
  write_text(d / "header.fld", "CDFT-FLD v1\n{not json\n");
  CHECK_THROWS_AS(read_field_file(d / "header.fld"), IoError);
  const std::string hdr = R"({"kind":"scalar","dim":1,"shape":[3],"spacing":[0.5],"origin":[0.0],"components":1,"encoding":"text"})";
  write_text(d / "short.fld", "CDFT-FLD v1\n" + hdr + "\n1\n2\n");
  CHECK_THROWS_AS(read_field_file(d / "short.fld"), IoError);
  write_text(d / "long.fld", "CDFT-FLD v1\n" + hdr + "\n1\n2\n3,4\n");
  CHECK_THROWS_AS(read_field_file(d / "long.fld"), IoError);
  write_text(d / "word.fld", "CDFT-FLD v1\n" + hdr + "\n1\nx\n3\n");
  CHECK_THROWS_AS(read_field_file(d / "word.fld"), IoError);
  write_text(d / "ok.fld", "CDFT-FLD v1\n" + hdr + "\n1\n2\n3\n");
  CHECK(read_field_file(d / "ok.fld").data == std::vector<double>{1, 2, 3});

  const std::string kind = R"({"kind":"tensor","dim":1,"shape":[3],"spacing":[0.5],"origin":[0.0],"components":1,"encoding":"text"})";
  write_text(d / "kind.fld", "CDFT-FLD v1\n" + kind + "\n1\n2\n3\n");
  CHECK_THROWS_AS(read_field_file(d / "kind.fld"), IoError);
  const std::string comps = R"({"kind":"pair","dim":1,"shape":[3],"spacing":[0.5],"origin":[0.0],"components":1,"encoding":"text"})";
  write_text(d / "comps.fld", "CDFT-FLD v1\n" + comps + "\n1\n2\n3\n");
  CHECK_THROWS_AS(read_field_file(d / "comps.fld"), IoError);
  const std::string dim = R"({"kind":"scalar","dim":2,"shape":[3,3],"spacing":[0.5,0.5],"origin":[0.0,0.0],"components":1,"encoding":"text"})";
  write_text(d / "dim.fld", "CDFT-FLD v1\n" + dim + "\n1\n");
  CHECK_THROWS(read_field_file(d / "dim.fld"));
  const std::string bin = R"({"kind":"scalar","dim":1,"shape":[3],"spacing":[0.5],"origin":[0.0],"components":1,"encoding":"binary"})";
  write_text(d / "bin.fld", "CDFT-FLD v1\n" + bin + "\nabc");
  CHECK_THROWS_AS(read_field_file(d / "bin.fld"), IoError);

  CHECK_THROWS_AS(pair_from_field_file(read_field_file(d / "ok.fld")), IoError);
}

TEST_CASE("scenario files") {
  const fs::path d = scratch_dir("scenario");
  write_text(d / "h.json", R"({"grid": {"cells": 128, "lo": -8, "hi": 8},
    "v": [{"kind": "poly", "power": 2}],
    "a": [{"kind": "poly", "power": 0, "coefficient": 0.3}],
    "tolerances": {"eig": 1e-11}})");
  const Scenario s = load_scenario(d / "h.json");
  CHECK(s.grid.size() == 128);
  CHECK(s.boundary == Boundary::dirichlet);
  CHECK(s.solver.tol_eig_rel == 1e-11);
  CHECK(s.potentials.a.comp[0][5] == 0.3);
  const double x = s.grid.coord(0, 9);
  CHECK(s.potentials.v.values[9] == x * x);

  const Scenario o = load_scenario(d / "h.json", parse_grid_override("64,-6,6"));
  CHECK(o.grid.size() == 64);
  CHECK(o.grid.coord(0, 0) == Catch::Approx(-6.0 + 6.0 / 64));
  CHECK(load_scenario(d / "h.json", parse_grid_override("32")).grid.size() == 32);

  write_field_file(d / "bump.fld", to_field_file(gauss_shape(s.grid, 0.0, 1.0)));
  write_text(d / "f.json", R"({"grid": {"cells": 128, "lo": -8, "hi": 8}, "boundary": "periodic",
    "v": [{"kind": "field", "path": "bump.fld", "coefficient": -2}]})");
  const Scenario f = load_scenario(d / "f.json");
  CHECK(f.boundary == Boundary::periodic);
  CHECK(f.potentials.v.values[64] < -1.9);

  write_text(d / "w.json", R"({"grid": {"cells": 15, "lo": 0, "hi": 1, "walls": true}})");
  CHECK(load_scenario(d / "w.json").grid.spacing[0] == Catch::Approx(1.0 / 16));

  write_text(d / "neg.json", R"({"grid": {"cells": 16, "lo": 0, "hi": 1}, "tolerances": {"eig": -1}})");
  CHECK_THROWS_AS(load_scenario(d / "neg.json"), InvalidArgument);
  write_text(d / "nogrid.json", R"({"v": []})");
  CHECK_THROWS_AS(load_scenario(d / "nogrid.json"), IoError);
  write_text(d / "kind.json", R"({"grid": {"cells": 16, "lo": 0, "hi": 1}, "v": [{"kind": "spline"}]})");
  CHECK_THROWS_AS(load_scenario(d / "kind.json"), InvalidArgument);
  write_text(d / "junk.json", "{");
  CHECK_THROWS_AS(load_scenario(d / "junk.json"), IoError);
  CHECK_THROWS_AS(load_scenario(d / "absent.json"), IoError);
}

TEST_CASE("grid override parsing") {
  const GridOverride a = parse_grid_override("100");
  CHECK(a.cells == 100);
  CHECK_FALSE(a.lo.has_value());
  const GridOverride b = parse_grid_override("50,-2.5,3");
  CHECK(*b.lo == -2.5);
  CHECK(*b.hi == 3.0);
  for (const char* bad : {"", "2", "abc", "10,1", "10,a,b"}) CHECK_THROWS_AS(parse_grid_override(bad), InvalidArgument);
}

TEST_CASE("family files") {
  const fs::path d = scratch_dir("family");
  const GridSpec g = GridSpec::line(64, -8.0, 8.0);
  write_text(d / "fam.json", R"({"budget": 123, "seed": 9, "basis": [
    {"name": "x2", "kind": "poly", "power": 2, "lo": 0, "hi": 2},
    {"kind": "gauss", "center": 0.5, "width": 1, "lo": -1, "hi": 1},
    {"name": "a0", "kind": "poly", "power": 0, "target": "a", "lo": -1, "hi": 1}]})");
  const PotentialFamily fam = load_family(d / "fam.json", g);
  CHECK(fam.budget == 123);
  CHECK(fam.seed == 9);
  REQUIRE(fam.size() == 3);
  CHECK(fam.basis[1].name == "gauss");
  CHECK(fam.basis[2].target == PotentialTarget::a);

  write_text(d / "target.json", R"({"basis": [{"kind": "poly", "power": 1, "target": "b", "lo": 0, "hi": 1}]})");
  CHECK_THROWS_AS(load_family(d / "target.json", g), InvalidArgument);
  write_text(d / "box.json", R"({"basis": [{"kind": "poly", "power": 1, "lo": 1, "hi": 0}]})");
  CHECK_THROWS_AS(load_family(d / "box.json", g), InvalidArgument);
  write_text(d / "empty.json", R"({"basis": []})");
  CHECK_THROWS_AS(load_family(d / "empty.json", g), InvalidArgument);
  write_text(d / "nolo.json", R"({"basis": [{"kind": "poly", "power": 1}]})");
  CHECK_THROWS_AS(load_family(d / "nolo.json", g), IoError);
}

TEST_CASE("report serialization") {
  const InequalityAudit a = make_audit("x<=y", 1.0, 2.0, 1e-9);
  const ojson j = to_json(a);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"name", "lhs", "rhs", "margin", "tolerance", "pass"});
  CHECK(j["margin"] == 1.0);
  CHECK(j["pass"] == true);

  const ojson inf = to_json(FunctionalValue{FunctionalName::J0, std::nullopt, std::nullopt});
  CHECK(inf["value"].is_null());
  CHECK(inf["infinite"] == true);
  const ojson jl = to_json(FunctionalValue{FunctionalName::Jlambda, 2.5, 0.5}, 1e-6);
  CHECK(jl["lambda"] == 0.5);
  CHECK(jl["tolerance"] == 1e-6);

  DensityPair p = fixtures::random_pair(1, GridSpec::cube(8, -8.0, 8.0), 1);
  const ValidationReport r = validate_pair(p, 1);
  const ojson vr = to_json(r, ValidationOptions{});
  CHECK(vr["verdict"] == true);
  CHECK(vr.contains("floor_flagged_cells"));
}
