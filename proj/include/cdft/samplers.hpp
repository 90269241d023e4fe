#pragma once

// Seeded test-density generators: Gaussian mixtures normalized to N on the
// grid, currents j = rho grad(chi) with chi a cubic polynomial (so the
// discrete curl of j/rho vanishes to rounding), and a rotational current.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "cdft/density.hpp"
#include "cdft/grid.hpp"

namespace cdft {

struct GaussianComponent {
  Point3 center{0.0, 0.0, 0.0};
  Point3 width{1.0, 1.0, 1.0};
  double weight = 1.0;
};

/// Sum of anisotropic Gaussians rescaled so that the grid integral is `mass`.
inline ScalarField gaussian_mixture(const GridSpec& g, const std::vector<GaussianComponent>& comps, double mass) {
  ScalarField rho = sample(g, [&](const Point3& x) {
    double s = 0.0;
    for (const auto& c : comps) {
      double e = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        const double d = (x[a] - c.center[a]) / c.width[a];
        e += d * d;
      }
      s += c.weight * std::exp(-0.5 * e);
    }
    return s;
  });
  const double m = integrate(rho);
  if (!(m > 0.0)) throw InvalidArgument("gaussian_mixture: mixture vanishes on the grid");
  for (double& v : rho.values) v *= mass / m;
  return rho;
}

struct MixtureOptions {
  int components_min = 1;
  int components_max = 3;
  double center_spread = 1.0;  // centres uniform in [-spread, spread] per axis
  double width_min = 0.6;
  double width_max = 0.9;
};

inline std::vector<GaussianComponent> random_mixture(std::mt19937_64& rng, int dim, const MixtureOptions& opt = {}) {
  std::uniform_int_distribution<int> count(opt.components_min, opt.components_max);
  std::uniform_real_distribution<double> centre(-opt.center_spread, opt.center_spread);
  std::uniform_real_distribution<double> width(opt.width_min, opt.width_max);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::vector<GaussianComponent> out(count(rng));
  for (auto& c : out) {
    for (int a = 0; a < dim; ++a) {
      c.center[a] = centre(rng);
      c.width[a] = width(rng);
    }
    c.weight = weight(rng);
  }
  return out;
}

/// chi(x) = sum over monomials x^i y^j z^k with i + j + k <= 3.
struct CubicPhase {
  struct Term {
    std::array<int, 3> power{0, 0, 0};
    double coefficient = 0.0;
  };
  std::vector<Term> terms;

  double value(const Point3& x) const {
    double s = 0.0;
    for (const auto& t : terms)
      s += t.coefficient * std::pow(x[0], t.power[0]) * std::pow(x[1], t.power[1]) * std::pow(x[2], t.power[2]);
    return s;
  }

  Point3 gradient(const Point3& x) const {
    Point3 g{0.0, 0.0, 0.0};
    for (const auto& t : terms)
      for (int a = 0; a < 3; ++a) {
        if (t.power[a] == 0) continue;
        double m = t.coefficient * t.power[a];
        for (int b = 0; b < 3; ++b) m *= std::pow(x[b], b == a ? t.power[b] - 1 : t.power[b]);
        g[a] += m;
      }
    return g;
  }

  static CubicPhase linear(Point3 k) {
    CubicPhase c;
    for (int a = 0; a < 3; ++a) {
      std::array<int, 3> p{0, 0, 0};
      p[a] = 1;
      c.terms.push_back({p, k[a]});
    }
    return c;
  }

  /// Random coefficients of size `scale` / (degree + 1)^2 on the monomials
  /// that involve only the first `dim` axes.
  static CubicPhase random(std::mt19937_64& rng, int dim, double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CubicPhase c;
    for (int i = 0; i <= 3; ++i)
      for (int j = 0; j <= 3 - i; ++j)
        for (int k = 0; k <= 3 - i - j; ++k) {
          const int deg = i + j + k;
          if (deg == 0) continue;
          if (dim == 1 && (j || k)) continue;
          c.terms.push_back({{i, j, k}, scale * u(rng) / double((deg + 1) * (deg + 1))});
        }
    return c;
  }
};

inline VectorField gradient_current(const ScalarField& rho, const CubicPhase& chi) {
  VectorField j(rho.grid);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const Point3 gr = chi.gradient(rho.grid.position(i));
    for (int a = 0; a < rho.grid.dim; ++a) j.comp[a][i] = rho.values[i] * gr[a];
  }
  return j;
}

/// j = omega * rho * (-x2, x1, 0): j/rho has curl (0, 0, 2 omega).
inline VectorField rotational_current(const ScalarField& rho, double omega = 1.0) {
  if (rho.grid.dim != 3) throw DimensionMismatch("rotational current needs a 3D grid");
  VectorField j(rho.grid);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const Point3 x = rho.grid.position(i);
    j.comp[0][i] = -omega * rho.values[i] * x[1];
    j.comp[1][i] = omega * rho.values[i] * x[0];
  }
  return j;
}

struct PairSamplerOptions {
  MixtureOptions mixture;
  double phase_scale = 0.5;
};

/// Seeded curl-free pair of mass n (provenance raw).
inline DensityPair random_curl_free_pair(std::uint64_t seed, const GridSpec& g, int n,
                                         const PairSamplerOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  const ScalarField rho = gaussian_mixture(g, random_mixture(rng, g.dim, opt.mixture), n);
  const CubicPhase chi = CubicPhase::random(rng, g.dim, opt.phase_scale);
  return DensityPair(rho, gradient_current(rho, chi));
}

/// Standard isotropic Gaussian pi^{-d/2} w^{-d} e^{-|x|^2/w^2} times n,
/// renormalized on the grid.
inline ScalarField gaussian_density(const GridSpec& g, double n = 1.0, double w = 1.0) {
  const double s = w / std::sqrt(2.0);
  return gaussian_mixture(g, {{{0.0, 0.0, 0.0}, {s, s, s}, 1.0}}, n);
}

}  // namespace cdft
