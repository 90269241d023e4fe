#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace cdft;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

bool has_reason(const ValidationReport& r, const std::string& code) {
  return std::find(r.reasons.begin(), r.reasons.end(), code) != r.reasons.end();
}

GridSpec cube16() { return GridSpec::cube(16, -8.0, 8.0); }

}  // namespace

TEST_CASE("validate_pair accepts a Gaussian without current") {
  const GridSpec g = cube16();
  DensityPair p(gaussian_density(g), VectorField(g));
  const ValidationReport r = validate_pair(p, 1);
  CHECK(r.verdict);
  CHECK(r.reasons.empty());
  CHECK(p.provenance == Provenance::validated_YN);
  CHECK_THAT(r.mass, WithinAbs(1.0, 1e-12));
  REQUIRE(r.j0_value);
  CHECK(*r.j0_value == 0.0);
  CHECK(r.jp_l1_norm == 0.0);
}

TEST_CASE("validate_pair flags a negative lobe") {
  const GridSpec g = GridSpec::line(200, -10.0, 10.0);
  ScalarField rho = gaussian_density(g);
  const ScalarField lobe = gaussian_mixture(g, {{{4.0, 0.0, 0.0}, {0.5, 1.0, 1.0}, 1.0}}, 0.01);
  for (std::size_t i = 0; i < g.size(); ++i) rho.values[i] = 1.01 * rho.values[i] - lobe.values[i];
  DensityPair p(rho, VectorField(g));
  const ValidationReport r = validate_pair(p, 1);
  CHECK_FALSE(r.verdict);
  CHECK(has_reason(r, "negativity"));
  CHECK(r.negativity_fraction > 0.0);
  CHECK(p.provenance == Provenance::raw);
}

TEST_CASE("validate_pair rejects current outside the support") {
  const GridSpec g = cube16();
  ScalarField rho = sample(g, [](const Point3& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    return r2 < 9.0 ? (9.0 - r2) * (9.0 - r2) : 0.0;
  });
  const double m = integrate(rho);
  for (double& v : rho.values) v /= m;
  const VectorField j = sample_vector(g, [](const Point3&) { return Point3{1.0, 0.0, 0.0}; });
  DensityPair p(rho, j);
  const ValidationReport r = validate_pair(p, 1);
  CHECK_FALSE(r.verdict);
  CHECK(has_reason(r, "J0 infinite"));
  CHECK_FALSE(r.j0_value);
}

TEST_CASE("validate_pair: mass, boundary mass, non-finite") {
  const GridSpec g = cube16();
  DensityPair p(gaussian_density(g, 2.0), VectorField(g));
  CHECK(has_reason(validate_pair(p, 1), "mass"));
  CHECK(validate_pair(p, 2).verdict);

  const GridSpec tight = GridSpec::cube(12, -2.0, 2.0);
  DensityPair q(gaussian_density(tight), VectorField(tight));
  CHECK(has_reason(validate_pair(q, 1), "boundary mass"));

  DensityPair bad(gaussian_density(g), VectorField(g));
  bad.rho.values[5] = std::nan("");
  CHECK(has_reason(validate_pair(bad, 1), "non-finite"));
}

TEST_CASE("validate_pair is idempotent") {
  DensityPair p = fixtures::random_pair(3, cube16(), 1);
  DensityPair q = p;
  const ValidationReport a = validate_pair(p, 1);
  const ValidationReport b = validate_pair(q, 1);
  const ValidationReport c = validate_pair(q, 1);
  CHECK(a.verdict == c.verdict);
  CHECK(a.mass == c.mass);
  CHECK(a.j1_value == c.j1_value);
  CHECK(*a.j0_value == *c.j0_value);
  CHECK(b.jp_l1_norm == c.jp_l1_norm);
  CHECK(a.boundary_mass_fraction == c.boundary_mass_fraction);
}

TEST_CASE("validate_pair J0 equals functionals::j0") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DensityPair p = fixtures::random_pair(seed, cube16(), 1);
    const ValidationReport r = validate_pair(p, 1);
    REQUIRE(r.verdict);
    CHECK(*r.j0_value == j0(p).get());
  }
}

TEST_CASE("vorticity of gradient, rotational and zero currents") {
  const GridSpec g = cube16();
  const ScalarField rho = gaussian_density(g);
  CubicPhase xy;
  xy.terms.push_back({{1, 1, 0}, 1.0});
  const Vorticity wg = vorticity(fixtures::floored(rho, gradient_current(rho, xy)));
  CHECK(wg.max_norm < 1e-12);

  const DensityPair rot = fixtures::floored(rho, rotational_current(rho, 1.0));
  const Vorticity wr = vorticity(rot);
  const Mask mask = support_mask(rot);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (wr.flagged[i]) {
      for (int a = 0; a < 3; ++a) CHECK(wr.omega[a][i] == 0.0);
      continue;
    }
    CHECK(mask[i]);
    CHECK_THAT(wr.omega[2][i], WithinAbs(2.0, 1e-10));
    ++checked;
  }
  CHECK(checked > 0);

  const Vorticity wz = vorticity(DensityPair(rho, VectorField(g)));
  CHECK(wz.max_norm == 0.0);
}

TEST_CASE("vorticity rejects current where the density vanishes") {
  const GridSpec g = cube16();
  ScalarField rho = gaussian_density(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.position(i)[0] > 2.0) rho.values[i] = 0.0;
  const VectorField j = sample_vector(g, [](const Point3&) { return Point3{0.0, 1.0, 0.0}; });
  CHECK_THROWS_AS(vorticity(DensityPair(rho, j)), UnsupportedCurrent);
  CHECK_THROWS_AS(vorticity(DensityPair(gaussian_density(GridSpec::line(8, -4, 4)), VectorField(GridSpec::line(8, -4, 4)))),
                  DimensionMismatch);
}

TEST_CASE("vorticity is unchanged by combining a pair with itself") {
  const DensityPair p = fixtures::random_pair(9, cube16(), 1, 1.0);
  const Vorticity w = vorticity(p);
  const Vorticity half = vorticity(convex_combine({p, p}, {0.5, 0.5}));
  CHECK(half.omega.comp == w.omega.comp);
  CHECK(half.flagged == w.flagged);
  for (double lam : {0.1, 0.3, 0.7}) {
    const Vorticity wl = vorticity(convex_combine({p, p}, {lam, 1.0 - lam}));
    for (int a = 0; a < 3; ++a)
      for (std::size_t i = 0; i < p.rho.size(); ++i) CHECK_THAT(wl.omega[a][i], WithinAbs(w.omega[a][i], 1e-12));
  }
}

TEST_CASE("convex_combine: identity, validated midpoint, bad weights") {
  const DensityPair a = fixtures::random_pair(1, cube16(), 1);
  const DensityPair b = fixtures::random_pair(2, cube16(), 1);
  const DensityPair same = convex_combine({a}, {1.0});
  CHECK(same.rho.values == a.rho.values);
  CHECK(same.jp.comp == a.jp.comp);

  const DensityPair mid = convex_combine({a, b}, {0.5, 0.5});
  CHECK(mid.provenance == Provenance::validated_YN);
  DensityPair check = mid;
  CHECK(validate_pair(check, 1).verdict);

  CHECK_THROWS_AS(convex_combine({a, b}, {0.7, 0.4}), InvalidArgument);
  CHECK_THROWS_AS(convex_combine({a, b}, {1.2, -0.2}), InvalidArgument);
  CHECK_THROWS_AS(convex_combine({a, b}, {1.0}), InvalidArgument);
  const DensityPair other(gaussian_density(GridSpec::cube(8, -8.0, 8.0)), VectorField(GridSpec::cube(8, -8.0, 8.0)));
  CHECK_THROWS_AS(convex_combine({a, other}, {0.5, 0.5}), GridMismatch);
}

TEST_CASE("pairing_energy: zero A, constant A, brute force") {
  const GridSpec g = cube16();
  const ScalarField rho = gaussian_density(g);
  const ScalarField v = sample(g, [](const Point3& x) { return x[0] * x[0] + 0.5 * x[2]; });
  const DensityPair p(rho, VectorField(g));
  double rv = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) rv += rho.values[i] * v.values[i];
  CHECK_THAT(pairing_energy(p, Potentials(v, VectorField(g))), WithinRel(rv * g.cell_volume(), 1e-13));

  const VectorField a0 = sample_vector(g, [](const Point3&) { return Point3{0.3, -0.4, 1.2}; });
  CHECK_THAT(pairing_energy(p, Potentials(ScalarField(g), a0)), WithinRel(0.09 + 0.16 + 1.44, 1e-12));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const GridSpec s = GridSpec::box({3, 3, 4}, {0, 0, 0}, {1, 1, 2});
  DensityPair q{ScalarField(s), VectorField(s)};
  Potentials pot = Potentials::zero(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    q.rho.values[i] = 0.5 * (u(rng) + 1.0);
    pot.v.values[i] = u(rng);
    for (int a = 0; a < 3; ++a) {
      q.jp.comp[a][i] = u(rng);
      pot.a.comp[a][i] = u(rng);
    }
  }
  double brute = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double ja = 0.0, a2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      ja += q.jp.comp[a][i] * pot.a.comp[a][i];
      a2 += pot.a.comp[a][i] * pot.a.comp[a][i];
    }
    brute += (2.0 * ja + q.rho.values[i] * (pot.v.values[i] + a2)) * s.cell_volume();
  }
  CHECK_THAT(pairing_energy(q, pot), WithinRel(brute, 1e-13));
}

TEST_CASE("pairing_energy is linear in v at fixed A") {
  const DensityPair p = fixtures::random_pair(4, cube16(), 1);
  const GridSpec& g = p.grid();
  const ScalarField v1 = sample(g, [](const Point3& x) { return x[0] * x[0]; });
  const ScalarField v2 = sample(g, [](const Point3& x) { return std::sin(x[1]) - 0.3 * x[2]; });
  ScalarField v12(g);
  for (std::size_t i = 0; i < g.size(); ++i) v12.values[i] = v1.values[i] + v2.values[i];
  const VectorField a = sample_vector(g, [](const Point3& x) { return Point3{0.2, 0.1 * x[0], -0.3}; });
  const double base = pairing_energy(p, Potentials(ScalarField(g), a));
  const double e1 = pairing_energy(p, Potentials(v1, a)) - base;
  const double e2 = pairing_energy(p, Potentials(v2, a)) - base;
  const double e12 = pairing_energy(p, Potentials(v12, a)) - base;
  CHECK_THAT(e12, WithinRel(e1 + e2, 1e-12));
}

TEST_CASE("potentials must be finite") {
  const GridSpec g = GridSpec::line(8, 0.0, 1.0);
  VectorField a(g);
  a.comp[0][3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Potentials(ScalarField(g), a), InvalidArgument);
}

TEST_CASE("schwarz_audit: equality case, zero current, random pairs") {
  const GridSpec g = GridSpec::line(200, -8.0, 8.0);
  const ScalarField rho = gaussian_density(g);
  const VectorField a = sample_vector(g, [](const Point3& x) { return Point3{0.5 + 0.2 * x[0], 0.0, 0.0}; });
  VectorField j(g);
  for (std::size_t i = 0; i < g.size(); ++i) j.comp[0][i] = -0.7 * rho.values[i] * a.comp[0][i];
  const auto eq = schwarz_audit(DensityPair(rho, j), Potentials(ScalarField(g), a));
  REQUIRE(eq.size() == 1);
  CHECK(eq[0].pass);
  CHECK_THAT(eq[0].lhs / eq[0].rhs, WithinAbs(1.0, 1e-12));

  const auto zero = schwarz_audit(DensityPair(rho, VectorField(g)), Potentials(ScalarField(g), a));
  CHECK(zero[0].lhs == 0.0);
  CHECK(zero[0].pass);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DensityPair p = fixtures::random_pair(seed, cube16(), 1, 1.0);
    const VectorField b = sample_vector(p.grid(), [&](const Point3& x) {
      return Point3{std::cos(x[0] + seed), 0.5 * std::sin(x[1]), 0.3};
    });
    for (const auto& audit : schwarz_audit(p, Potentials(ScalarField(p.grid()), b))) CHECK(audit.pass);
  }
}
