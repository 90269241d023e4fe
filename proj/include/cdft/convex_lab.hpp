#pragma once

// Sampled Legendre transform over finite potential families,
//   F(rho, j) >= sup_c  e0(v_c, A_c) - 2 int j.A_c - int rho (v_c + |A_c|^2),
// plus the envelope, Euler-Lagrange and convexity checks built on it.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cdft/audit.hpp"
#include "cdft/density.hpp"
#include "cdft/functionals.hpp"
#include "cdft/grid.hpp"
#include "cdft/toy_solver.hpp"

namespace cdft {

enum class PotentialTarget { v, a };

/// One basis direction: a shape on the grid, the potential it feeds and the
/// admissible coefficient interval.
struct BasisShape {
  std::string name;
  PotentialTarget target = PotentialTarget::v;
  ScalarField shape;
  double lo = -1.0;
  double hi = 1.0;
};

/// x^power on axis 0.
inline ScalarField poly_shape(const GridSpec& g, int power) {
  return sample(g, [&](const Point3& x) { return std::pow(x[0], power); });
}

/// exp(-(x - center)^2 / (2 width^2)) on axis 0.
inline ScalarField gauss_shape(const GridSpec& g, double center, double width) {
  if (!(width > 0.0)) throw InvalidArgument("gauss shape needs a positive width");
  return sample(g, [&](const Point3& x) {
    const double d = (x[0] - center) / width;
    return std::exp(-0.5 * d * d);
  });
}

struct PotentialFamily {
  GridSpec grid;
  std::vector<BasisShape> basis;
  std::size_t budget = 2000;
  std::uint64_t seed = 0;
  int restarts = 3;
  Boundary boundary = Boundary::dirichlet;

  std::size_t size() const { return basis.size(); }

  void check() const {
    if (basis.empty()) throw InvalidArgument("potential family has no basis shapes");
    for (const auto& b : basis) {
      require_same_grid(grid, b.shape.grid, "potential family");
      if (!(b.lo <= b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
        throw InvalidArgument("basis '" + b.name + "' has an invalid coefficient box");
    }
  }

  Potentials realize(const std::vector<double>& c) const {
    if (c.size() != basis.size()) throw InvalidArgument("coefficient count does not match family");
    Potentials pot = Potentials::zero(grid);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      std::vector<double>& dst = basis[k].target == PotentialTarget::v ? pot.v.values : pot.a.comp[0];
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += c[k] * basis[k].shape.values[i];
    }
    return pot;
  }
};

struct LegendreTraceEntry {
  int restart = 0;
  std::vector<double> coefficients;
  double value = 0.0;  // -inf when the solve failed
};

struct LegendreResult {
  double f_lower = -std::numeric_limits<double>::infinity();
  std::vector<double> argmax;
  std::size_t evaluations = 0;
  std::size_t failures = 0;
  std::vector<LegendreTraceEntry> trace;
};

/// e0(v_c, A_c) - pairing(p; v_c, A_c): the affine minorant of Q with slope c
/// evaluated at p.
inline double legendre_objective(const DensityPair& p, const PotentialFamily& fam, const std::vector<double>& c) {
  const Potentials pot = fam.realize(c);
  return e0_of(pot.v, pot.a, fam.boundary) - pairing_energy(p, pot);
}

struct LegendreOptions {
  std::optional<std::vector<double>> warm_start;  // first point of restart 0
  int line_evaluations = 10;                      // golden-section points per coordinate
  int sweeps = 24;                                // per restart; bracket halves after each
};

/// Coordinate ascent with golden-section line searches on shrinking brackets,
/// `restarts` starts (restart 0 at the warm start or the box centre, later
/// ones uniform in the box from mt19937_64(seed + r)). The sequence of
/// evaluated points does not depend on the budget, which only truncates it.
inline LegendreResult f_legendre_sampled(const DensityPair& p, const PotentialFamily& fam,
                                         const LegendreOptions& opt = {}) {
  fam.check();
  require_same_grid(p.grid(), fam.grid, "f_legendre_sampled");
  if (p.grid().dim != 1) throw DimensionMismatch("the Legendre search uses the 1D lattice solver");
  const std::size_t K = fam.size();
  LegendreResult res;

  struct Stop {};
  auto eval = [&](int restart, const std::vector<double>& c) {
    if (res.evaluations >= fam.budget) throw Stop{};
    ++res.evaluations;
    double val = -std::numeric_limits<double>::infinity();
    try {
      val = legendre_objective(p, fam, c);
    } catch (const NumericalError&) {
      ++res.failures;
    }
    res.trace.push_back({restart, c, val});
    if (val > res.f_lower) {
      res.f_lower = val;
      res.argmax = c;
    }
    return val;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  try {
    for (int r = 0; r < fam.restarts; ++r) {
      std::mt19937_64 rng(fam.seed + static_cast<std::uint64_t>(r));
      std::vector<double> x(K);
      for (std::size_t k = 0; k < K; ++k) {
        const auto& b = fam.basis[k];
        if (r == 0) {
          x[k] = opt.warm_start ? std::clamp((*opt.warm_start)[k], b.lo, b.hi) : 0.5 * (b.lo + b.hi);
        } else {
          x[k] = std::uniform_real_distribution<double>(b.lo, b.hi)(rng);
        }
      }
      if (r == 0 && opt.warm_start && opt.warm_start->size() != K)
        throw InvalidArgument("warm start has the wrong number of coefficients");
      double fx = eval(r, x);
      std::vector<double> width(K);
      for (std::size_t k = 0; k < K; ++k) width[k] = fam.basis[k].hi - fam.basis[k].lo;

      for (int s = 0; s < opt.sweeps; ++s) {
        for (std::size_t k = 0; k < K; ++k) {
          const auto& b = fam.basis[k];
          double a = std::max(b.lo, x[k] - 0.5 * width[k]);
          double d = std::min(b.hi, x[k] + 0.5 * width[k]);
          if (!(d > a)) continue;
          auto at = [&](double t) {
            std::vector<double> y = x;
            y[k] = t;
            return eval(r, y);
          };
          double c1 = d - inv_phi * (d - a), c2 = a + inv_phi * (d - a);
          double f1 = at(c1), f2 = at(c2);
          double best_t = x[k], best_f = fx;
          auto keep = [&](double t, double f) {
            if (f > best_f) {
              best_f = f;
              best_t = t;
            }
          };
          keep(c1, f1);
          keep(c2, f2);
          for (int it = 2; it < opt.line_evaluations; ++it) {
            if (f1 >= f2) {
              d = c2;
              c2 = c1;
              f2 = f1;
              c1 = d - inv_phi * (d - a);
              f1 = at(c1);
              keep(c1, f1);
            } else {
              a = c1;
              c1 = c2;
              f1 = f2;
              c2 = a + inv_phi * (d - a);
              f2 = at(c2);
              keep(c2, f2);
            }
          }
          x[k] = best_t;
          fx = best_f;
        }
        for (double& w : width) w *= 0.5;
      }
    }
  } catch (const Stop&) {
  }
  return res;
}

struct EnvelopeResult {
  std::vector<double> f_sampled;
  std::vector<double> q_exact;
  std::vector<InequalityAudit> audits;
};

/// (a) F_sampled <= Q at every pair; (b) midpoint convexity of F_sampled on
/// each consecutive segment within eps_search; (c) F_sampled(p) >= every
/// affine minorant of Q whose slope was found by any of the searches.
/// Every pair's sampled F is the max of its own search and all pooled slopes.
inline EnvelopeResult envelope_audit(const std::vector<DensityPair>& pairs, const PotentialFamily& fam,
                                     double eps_search_rel = 1e-3, const LegendreOptions& opt = {},
                                     const ValidationOptions& vopt = {}) {
  if (pairs.empty()) throw InvalidArgument("envelope_audit needs at least one pair");
  std::vector<DensityPair> pts = pairs;
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    segments.emplace_back(i, pts.size());
    pts.push_back(convex_combine({pairs[i], pairs[i + 1]}, {0.5, 0.5}, vopt));
  }

  std::vector<double> own(pts.size());
  std::vector<std::vector<double>> slopes;
  for (const auto& p : pts) {
    const LegendreResult r = f_legendre_sampled(p, fam, opt);
    own[&p - pts.data()] = r.f_lower;
    if (!r.argmax.empty()) slopes.push_back(r.argmax);
  }
  std::vector<std::vector<double>> minorant(pts.size(), std::vector<double>(slopes.size()));
  std::vector<double> F(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    F[i] = own[i];
    for (std::size_t s = 0; s < slopes.size(); ++s) {
      minorant[i][s] = legendre_objective(pts[i], fam, slopes[s]);
      F[i] = std::max(F[i], minorant[i][s]);
    }
  }

  EnvelopeResult out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double q = q_exact_n1(pts[i], vopt);
    if (i < pairs.size()) {
      out.f_sampled.push_back(F[i]);
      out.q_exact.push_back(q);
    }
    out.audits.push_back(make_audit("F_sampled<=Q[" + std::to_string(i) + "]", F[i], q,
                                    1e-10 * std::max(1.0, std::abs(q))));
  }
  for (const auto& [i, m] : segments) {
    const double avg = 0.5 * (F[i] + F[i + 1]);
    out.audits.push_back(make_audit("F_mid<=F_avg[" + std::to_string(i) + "]", F[m], avg,
                                    eps_search_rel * std::max(1.0, std::abs(avg))));
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double worst = -std::numeric_limits<double>::infinity();
    for (double v : minorant[i]) worst = std::max(worst, v);
    if (slopes.empty()) continue;
    out.audits.push_back(make_audit("minorant<=F_sampled[" + std::to_string(i) + "]", worst, F[i],
                                    1e-12 * std::max(1.0, std::abs(F[i]))));
  }
  return out;
}

struct EulerLagrangeResidual {
  double r_rho = 0.0;
  double r_jp = 0.0;
  double mu_star = 0.0;
};

/// Residuals of F'_rho + v + |A|^2 + mu = 0 and F'_j + 2A = 0 for the
/// one-particle derivatives F'_rho = -lap(sqrt rho)/sqrt rho - |j|^2/rho^2,
/// F'_j = 2 j / rho, in rho-weighted L2 norms over the support; mu is the
/// weighted least-squares choice.
inline EulerLagrangeResidual euler_lagrange_residual(const DensityPair& p, const Potentials& pot,
                                                     const ValidationOptions& opt = {}) {
  require_same_grid(p.grid(), pot.grid(), "euler_lagrange_residual");
  const Mask mask = support_mask(p, opt);
  const VectorField u = velocity(p, opt);
  ScalarField amp(p.grid());
  for (std::size_t i = 0; i < amp.size(); ++i) amp.values[i] = std::sqrt(std::max(p.rho.values[i], 0.0));
  const ScalarField lap = laplacian(amp);
  const GridSpec& g = p.grid();

  std::vector<double> base(g.size(), 0.0);
  double w = 0.0, wb = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!mask[i]) continue;
    base[i] = -lap.values[i] / amp.values[i] - u.norm2_at(i) + pot.v.values[i] + pot.a.norm2_at(i);
    w += p.rho.values[i];
    wb += p.rho.values[i] * base[i];
  }
  if (!(w > 0.0)) throw InvalidArgument("euler_lagrange_residual: empty support");
  EulerLagrangeResidual r;
  r.mu_star = -wb / w;
  double sr = 0.0, sj = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!mask[i]) continue;
    const double e = base[i] + r.mu_star;
    sr += p.rho.values[i] * e * e;
    double d2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const double d = 2.0 * u.comp[a][i] + 2.0 * pot.a.comp[a][i];
      d2 += d * d;
    }
    sj += p.rho.values[i] * d2;
  }
  r.r_rho = std::sqrt(sr / w);
  r.r_jp = std::sqrt(sj / w);
  return r;
}

struct ConvexityProbe {
  double min_margin = std::numeric_limits<double>::infinity();
  std::vector<double> lambdas;
  std::vector<double> margins;
};

/// min over lambda of lambda Q(p1) + (1 - lambda) Q(p2) - Q(lambda p1 + (1 - lambda) p2).
/// A negative value witnesses non-convexity of the evaluator.
inline ConvexityProbe convexity_probe(const DensityPair& p1, const DensityPair& p2,
                                      const std::function<double(const DensityPair&)>& q_evaluator,
                                      const std::vector<double>& lambda_grid,
                                      const ValidationOptions& opt = {}) {
  ConvexityProbe out;
  const double q1 = q_evaluator(p1), q2 = q_evaluator(p2);
  for (double l : lambda_grid) {
    if (!(l >= 0.0 && l <= 1.0)) throw InvalidArgument("convexity_probe: lambda must lie in [0,1]");
    const DensityPair mid = convex_combine({p1, p2}, {l, 1.0 - l}, opt);
    const double m = l * q1 + (1.0 - l) * q2 - q_evaluator(mid);
    out.lambdas.push_back(l);
    out.margins.push_back(m);
    out.min_margin = std::min(out.min_margin, m);
  }
  return out;
}

}  // namespace cdft
