#include <catch_amalgamated.hpp>

#include <random>

#include "support.hpp"

using namespace cdft;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

bool interior(const GridSpec& g, std::size_t idx) {
  const Index3 c = g.unravel(idx);
  for (int a = 0; a < g.dim; ++a)
    if (c[a] == 0 || c[a] + 1 == g.shape[a]) return false;
  return true;
}

}  // namespace

TEST_CASE("integrate: unit box, Gaussian, zero") {
  const GridSpec unit = GridSpec::cube(8, 0.0, 1.0);
  CHECK_THAT(integrate(ScalarField(unit, 1.0)), WithinAbs(1.0, 1e-14));
  CHECK(integrate(ScalarField(unit)) == 0.0);

  const GridSpec g = GridSpec::cube(48, -6.0, 6.0);
  const ScalarField rho =
      sample(g, [](const Point3& x) { return std::pow(fixtures::pi, -1.5) * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); });
  CHECK_THAT(integrate(rho), WithinAbs(1.0, 1e-6));
}

TEST_CASE("integrate of a constant scales with the domain volume") {
  const double v1 = integrate(ScalarField(GridSpec::cube(6, 0.0, 1.0), 1.0));
  const double v2 = integrate(ScalarField(GridSpec::cube(6, 0.0, 2.0), 1.0));
  const double v3 = integrate(ScalarField(GridSpec::box({4, 6, 8}, {0, 0, 0}, {1, 2, 3}), 1.0));
  CHECK_THAT(v2, WithinRel(8.0 * v1, 1e-14));
  CHECK_THAT(v3, WithinRel(6.0, 1e-14));
}

TEST_CASE("grid validation rejects bad specs") {
  CHECK_THROWS_AS(GridSpec::line(1, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(GridSpec::line(4, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(ScalarField(GridSpec::line(4, 0.0, 1.0), std::vector<double>(3)), InvalidArgument);
}

TEST_CASE("gradient is exact on polynomials of degree two") {
  const GridSpec g = GridSpec::box({7, 6, 5}, {-1.0, -0.5, 0.0}, {1.0, 1.5, 2.0});
  const ScalarField lin = sample(g, [](const Point3& x) { return x[0]; });
  const ScalarField sq = sample(g, [](const Point3& x) { return x[0] * x[0]; });
  const ScalarField quad = sample(g, [](const Point3& x) { return 1.0 + x[0] * x[1] - 2.0 * x[2] * x[2] + 0.5 * x[1] * x[1]; });
  const VectorField gl = gradient(lin), gs = gradient(sq), gq = gradient(quad), gc = gradient(ScalarField(g, 3.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point3 x = g.position(i);
    // one-sided stencils are second order, so exact for quadratics everywhere
    CHECK_THAT(gl[0][i], WithinAbs(1.0, 1e-12));
    CHECK_THAT(gl[1][i], WithinAbs(0.0, 1e-12));
    CHECK_THAT(gs[0][i], WithinAbs(2.0 * x[0], 1e-12));
    CHECK_THAT(gq[0][i], WithinAbs(x[1], 1e-12));
    CHECK_THAT(gq[1][i], WithinAbs(x[0] + x[1], 1e-12));
    CHECK_THAT(gq[2][i], WithinAbs(-4.0 * x[2], 1e-12));
    for (int a = 0; a < 3; ++a) CHECK(std::abs(gc[a][i]) < 1e-13);
  }
}

TEST_CASE("gradient needs three cells") {
  CHECK_THROWS_AS(gradient(ScalarField(GridSpec::line(2, 0.0, 1.0))), InvalidArgument);
}

TEST_CASE("curl of rotation, gradient and zero fields") {
  const GridSpec g = GridSpec::cube(9, -2.0, 2.0);
  const VectorField rot = sample_vector(g, [](const Point3& x) { return Point3{-x[1], x[0], 0.0}; });
  const VectorField grad = sample_vector(g, [](const Point3& x) { return Point3{x[1], x[0], 0.0}; });
  const VectorField cr = curl(rot), cg = curl(grad), cz = curl(VectorField(g));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!interior(g, i)) continue;
    CHECK_THAT(cr[2][i], WithinAbs(2.0, 1e-12));
    CHECK_THAT(cr[0][i], WithinAbs(0.0, 1e-12));
    for (int a = 0; a < 3; ++a) {
      CHECK(std::abs(cg[a][i]) < 1e-12);
      CHECK(cz[a][i] == 0.0);
    }
  }
  CHECK_THROWS_AS(curl(VectorField(GridSpec::line(8, 0.0, 1.0))), DimensionMismatch);
}

TEST_CASE("curl of gradient vanishes for random quadratics") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const GridSpec g = GridSpec::cube(8, -1.5, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    double c[10];
    for (double& x : c) x = u(rng);
    const ScalarField f = sample(g, [&](const Point3& x) {
      return c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[2] + c[4] * x[0] * x[0] + c[5] * x[1] * x[1] +
             c[6] * x[2] * x[2] + c[7] * x[0] * x[1] + c[8] * x[1] * x[2] + c[9] * x[0] * x[2];
    });
    const VectorField w = curl(gradient(f));
    const double scale = std::sqrt(max_norm(gradient(f)));
    for (std::size_t i = 0; i < g.size(); ++i)
      if (interior(g, i))
        for (int a = 0; a < 3; ++a) CHECK(std::abs(w[a][i]) <= 1e-12 * scale);
  }
}

TEST_CASE("marginal_x1: separable, zero, constant") {
  const GridSpec g = GridSpec::box({24, 32, 32}, {-4.0, -6.0, -6.0}, {4.0, 6.0, 6.0});
  const double pi = fixtures::pi;
  const ScalarField f = sample(g, [&](const Point3& x) {
    return (1.0 + x[0] * x[0]) * std::exp(-x[1] * x[1] - x[2] * x[2]) / pi;
  });
  const ScalarField m = marginal_x1(f);
  REQUIRE(m.grid.dim == 1);
  REQUIRE(m.size() == 24);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double x = m.grid.coord(0, i);
    CHECK_THAT(m.values[i], WithinRel(1.0 + x * x, 1e-8));
  }
  for (double v : marginal_x1(ScalarField(g)).values) CHECK(v == 0.0);
  const ScalarField one = marginal_x1(ScalarField(GridSpec::cube(5, 0.0, 1.0), 1.0));
  for (double v : one.values) CHECK_THAT(v, WithinAbs(1.0, 1e-14));
}

TEST_CASE("line_integrate recovers exact potentials") {
  const GridSpec g = GridSpec::cube(10, -1.0, 1.0);
  const Index3 ref{2, 3, 4};
  const Point3 xr = g.position(g.index(ref));

  const VectorField u = sample_vector(g, [](const Point3& x) { return Point3{x[1], x[0], 0.0}; });
  const ScalarField s = line_integrate(u, ref);
  const VectorField c = sample_vector(g, [](const Point3&) { return Point3{0.3, -0.7, 1.1}; });
  const ScalarField sc = line_integrate(c, ref);
  CHECK(s.values[g.index(ref)] == 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point3 x = g.position(i);
    // trapezoid is exact for x1 x2 along axis paths
    CHECK_THAT(s.values[i], WithinAbs(x[0] * x[1] - xr[0] * xr[1], 1e-12));
    CHECK_THAT(sc.values[i], WithinAbs(0.3 * (x[0] - xr[0]) - 0.7 * (x[1] - xr[1]) + 1.1 * (x[2] - xr[2]), 1e-12));
  }
}

TEST_CASE("line_integrate rejects rotational fields") {
  const GridSpec g = GridSpec::cube(10, -1.0, 1.0);
  const VectorField rot = sample_vector(g, [](const Point3& x) { return Point3{-x[1], x[0], 0.0}; });
  CHECK_THROWS_AS(line_integrate(rot, {0, 0, 0}), CurlTooLarge);
  CHECK_THROWS_AS(line_integrate(rot, {10, 0, 0}), InvalidArgument);
}

TEST_CASE("line_integrate then gradient converges at second order") {
  auto err = [](std::size_t n) {
    const GridSpec g = GridSpec::cube(n, -1.0, 1.0);
    const VectorField u = sample_vector(g, [](const Point3& x) {
      return Point3{std::cos(x[0]) * std::exp(0.5 * x[1]), 0.5 * std::sin(x[0]) * std::exp(0.5 * x[1]), 0.0};
    });
    // sampled gradients are only curl-free up to O(h^2), so relax the curl gate
    LineIntegralOptions opt;
    opt.tol_curl = 0.1;
    const VectorField back = gradient(line_integrate(u, {0, 0, 0}, opt));
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (interior(g, i))
        for (int a = 0; a < 3; ++a) e = std::max(e, std::abs(back[a][i] - u[a][i]));
    return e;
  };
  const double e1 = err(12), e2 = err(24), e3 = err(48);
  CHECK(e1 / e2 == Catch::Approx(4.0).margin(1.0));
  CHECK(e2 / e3 == Catch::Approx(4.0).margin(1.0));
}

TEST_CASE("inner_product: normalized, disjoint slabs, brute force") {
  const GridSpec g = GridSpec::cube(6, 0.0, 1.0);
  ComplexField a(g), b(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Index3 c = g.unravel(i);
    a.values[i] = c[0] < 3 ? std::complex<double>(1.0, 1.0) : 0.0;
    b.values[i] = c[0] >= 3 ? std::complex<double>(0.5, -2.0) : 0.0;
  }
  const double na = std::sqrt(inner_product(a, a).real());
  for (auto& z : a.values) z /= na;
  CHECK_THAT(inner_product(a, a).real(), WithinAbs(1.0, 1e-14));
  CHECK(std::abs(inner_product(a, b)) == 0.0);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  const GridSpec s = GridSpec::box({3, 4, 5}, {0, 0, 0}, {0.3, 0.8, 1.5});
  ComplexField x(s), y(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    x.values[i] = {n01(rng), n01(rng)};
    y.values[i] = {n01(rng), n01(rng)};
  }
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double xr = x.values[i].real(), xi = x.values[i].imag(), yr = y.values[i].real(), yi = y.values[i].imag();
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  const double dv = 0.1 * 0.2 * 0.3;
  const auto z = inner_product(x, y);
  CHECK_THAT(z.real(), WithinAbs(re * dv, 1e-13));
  CHECK_THAT(z.imag(), WithinAbs(im * dv, 1e-13));
  CHECK_THROWS_AS(inner_product(x, a), GridMismatch);
}

TEST_CASE("non-finite complex values are rejected") {
  const GridSpec g = GridSpec::line(4, 0.0, 1.0);
  std::vector<std::complex<double>> v(4);
  v[2] = {std::nan(""), 0.0};
  CHECK_THROWS_AS(ComplexField(g, v), InvalidArgument);
}
