#pragma once

// Softened Coulomb double sum over all cell pairs,
//   S = sum_x sum_y rho(x) rho(y) w(x1, y1) / sqrt(|x - y|^2 + eta^2) * dV^2,
// with an optional weight depending only on the x1 indices of both cells.
// Work is split over x1 slabs; per-slab partial sums are reduced in slab
// order, so the result does not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "cdft/errors.hpp"
#include "cdft/grid.hpp"

namespace cdft {

/// Worker count: CDFT_THREADS if set and positive, else the hardware count.
inline unsigned thread_budget() {
  if (const char* env = std::getenv("CDFT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Softening length used for every Coulomb sum on grid g.
inline double coulomb_softening(const GridSpec& g) { return 0.5 * g.max_spacing(); }

/// x1_weight, when non-empty, is an n1 x n1 row-major table.
inline double softened_pair_sum(const ScalarField& rho, std::span<const double> x1_weight = {}) {
  const GridSpec& g = rho.grid;
  if (g.dim != 3) throw DimensionMismatch("Coulomb sums need a 3D density");
  const std::size_t n0 = g.shape[0], n1 = g.shape[1], n2 = g.shape[2];
  if (!x1_weight.empty() && x1_weight.size() != n0 * n0)
    throw InvalidArgument("x1 weight table must be n1 x n1");
  const double eta2 = coulomb_softening(g) * coulomb_softening(g);

  std::vector<double> kernel(n0 * n1 * n2);
  for (std::size_t a = 0; a < n0; ++a)
    for (std::size_t b = 0; b < n1; ++b)
      for (std::size_t c = 0; c < n2; ++c) {
        const double dx = a * g.spacing[0], dy = b * g.spacing[1], dz = c * g.spacing[2];
        kernel[(a * n1 + b) * n2 + c] = 1.0 / std::sqrt(dx * dx + dy * dy + dz * dz + eta2);
      }

  const std::vector<double>& r = rho.values;
  std::vector<double> slab_sum(n0, 0.0);
  auto slab = [&](std::size_t i0) {
    std::vector<double> pot(n1 * n2, 0.0);  // potential on slab i0 from all y
    for (std::size_t p0 = 0; p0 < n0; ++p0) {
      const double w = x1_weight.empty() ? 1.0 : x1_weight[i0 * n0 + p0];
      if (w == 0.0) continue;
      const std::size_t d0 = i0 > p0 ? i0 - p0 : p0 - i0;
      for (std::size_t i1 = 0; i1 < n1; ++i1)
        for (std::size_t p1 = 0; p1 < n1; ++p1) {
          const std::size_t d1 = i1 > p1 ? i1 - p1 : p1 - i1;
          const double* krow = kernel.data() + (d0 * n1 + d1) * n2;
          const double* ry = r.data() + (p0 * n1 + p1) * n2;
          double* out = pot.data() + i1 * n2;
          for (std::size_t i2 = 0; i2 < n2; ++i2) {
            double acc = 0.0;
            for (std::size_t p2 = 0; p2 < i2; ++p2) acc += ry[p2] * krow[i2 - p2];
            for (std::size_t p2 = i2; p2 < n2; ++p2) acc += ry[p2] * krow[p2 - i2];
            out[i2] += w * acc;
          }
        }
    }
    double s = 0.0;
    const double* rx = r.data() + i0 * n1 * n2;
    for (std::size_t k = 0; k < n1 * n2; ++k) s += rx[k] * pot[k];
    slab_sum[i0] = s;
  };

  const unsigned workers = std::min<unsigned>(thread_budget(), static_cast<unsigned>(n0));
  if (workers <= 1) {
    for (std::size_t i0 = 0; i0 < n0; ++i0) slab(i0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i0 = t; i0 < n0; i0 += workers) slab(i0);
      });
    for (auto& th : pool) th.join();
  }
  double total = 0.0;
  for (double s : slab_sum) total += s;
  const double dv = g.cell_volume();
  return total * dv * dv;
}

}  // namespace cdft
