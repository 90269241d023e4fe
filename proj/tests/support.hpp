#pragma once

// Shared fixtures for the test suites.

#include <cmath>
#include <numbers>
#include <vector>

#include "cdft/cdft.hpp"

namespace fixtures {

using namespace cdft;

inline constexpr double pi = std::numbers::pi;

/// Zero the current below the density floor, as solver output does.
inline DensityPair floored(const ScalarField& rho, VectorField j) {
  DensityPair p(rho, std::move(j));
  const FloorRule fl = FloorRule::of(p);
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (fl.below(rho.values[i]))
      for (int a = 0; a < rho.grid.dim; ++a) p.jp.comp[a][i] = 0.0;
  return p;
}

/// Seeded curl-free pair with mass n, already validated.
inline DensityPair random_pair(std::uint64_t seed, const GridSpec& g, int n, double phase_scale = 0.5) {
  PairSamplerOptions opt;
  opt.phase_scale = phase_scale;
  DensityPair raw = random_curl_free_pair(seed, g, n, opt);
  DensityPair p = floored(raw.rho, raw.jp);
  validate_pair(p, n);
  return p;
}

/// Smooth anisotropic Gaussian with a linear phase: used for grid-refinement
/// studies. Three variants k = 0, 1, 2 on [-8, 8]^3.
inline DensityPair designated(int k, std::size_t cells, int n) {
  static const GaussianComponent comps[3] = {
      {{0.3, -0.2, 0.1}, {1.08, 0.9, 0.81}, 1.0},
      {{-0.4, 0.3, 0.0}, {1.0, 0.85, 0.8}, 1.0},
      {{0.0, 0.2, -0.3}, {0.85, 0.95, 1.0}, 1.0}};
  static const Point3 k_vec[3] = {{0.4, -0.3, 0.2}, {-0.2, 0.5, 0.1}, {0.3, 0.3, -0.4}};
  const GridSpec g = GridSpec::cube(cells, -8.0, 8.0);
  const ScalarField rho = gaussian_mixture(g, {comps[k]}, n);
  DensityPair p = floored(rho, gradient_current(rho, CubicPhase::linear(k_vec[k])));
  validate_pair(p, n);
  return p;
}

inline ScalarField harmonic(const GridSpec& g, double w = 1.0) {
  return sample(g, [w](const Point3& x) { return w * x[0] * x[0]; });
}

inline VectorField affine_a(const GridSpec& g, double a0, double a1) {
  return sample_vector(g, [=](const Point3& x) { return Point3{a0 + a1 * x[0], 0.0, 0.0}; });
}

inline DensityPair ground_pair(const Potentials& pot, const SolverOptions& opt = {}) {
  return densities_from_state(ground_state(discretize(pot.v, pot.a), opt));
}

/// Five-parameter family used by the Legendre tests, on [-8, 8].
inline PotentialFamily legendre_family(const GridSpec& g, std::size_t budget = 2000) {
  PotentialFamily fam;
  fam.grid = g;
  fam.budget = budget;
  fam.basis.push_back({"x2", PotentialTarget::v, poly_shape(g, 2), 0.0, 2.0});
  fam.basis.push_back({"x1", PotentialTarget::v, poly_shape(g, 1), -1.0, 1.0});
  fam.basis.push_back({"bump", PotentialTarget::v, gauss_shape(g, 0.5, 1.0), -2.0, 2.0});
  fam.basis.push_back({"a0", PotentialTarget::a, poly_shape(g, 0), -1.0, 1.0});
  fam.basis.push_back({"a1", PotentialTarget::a, poly_shape(g, 1), -0.5, 0.5});
  return fam;
}

/// Coefficients of the potentials whose ground pairs are the v-representable
/// Legendre fixtures.
inline const std::vector<std::vector<double>>& legendre_truths() {
  static const std::vector<std::vector<double>> t = {{1.0, 0.0, 0.0, 0.0, 0.0},
                                                     {0.7, 0.2, -0.5, 0.3, 0.1},
                                                     {1.3, -0.3, 1.0, -0.4, 0.0},
                                                     {0.5, 0.1, 0.8, 0.2, -0.2},
                                                     {1.6, 0.0, -1.2, 0.0, 0.25}};
  return t;
}

/// Hartree self-energy of the unit Gaussian pi^{-3/2} w^{-3} e^{-r^2/w^2}
/// from its potential erf(r/w)/r, by radial Simpson quadrature.
inline double gaussian_self_energy(double w) {
  const int m = 20000;
  const double rmax = 12.0 * w, dr = rmax / m;
  double s = 0.0;
  for (int i = 1; i <= m; ++i) {
    const double r = i * dr;
    const double rho = std::pow(pi, -1.5) / (w * w * w) * std::exp(-r * r / (w * w));
    const double f = 4.0 * pi * r * rho * std::erf(r / w);
    s += (i == m ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f;
  }
  return 0.5 * s * dr / 3.0;
}

}  // namespace fixtures
