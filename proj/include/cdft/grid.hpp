#pragma once

// Uniform cell-centred grids in one or three dimensions and the discrete
// calculus used by every other module: midpoint quadrature, second-order
// finite differences, curl, x1-marginals, potentials of curl-free fields and
// L2 pairings.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdft/errors.hpp"

namespace cdft {

using Index3 = std::array<std::size_t, 3>;
using Point3 = std::array<double, 3>;
using Mask = std::vector<std::uint8_t>;

/// Cell-centred uniform grid. Cell i on axis a covers
/// [origin[a] + i*spacing[a], origin[a] + (i+1)*spacing[a]) and is sampled at
/// its centre. Unused axes of a 1D grid have shape 1 and spacing 1.
struct GridSpec {
  int dim = 3;
  Index3 shape{1, 1, 1};
  Point3 spacing{1.0, 1.0, 1.0};
  Point3 origin{0.0, 0.0, 0.0};

  static GridSpec line(std::size_t n, double lo, double hi) {
    GridSpec g;
    g.dim = 1;
    g.shape = {n, 1, 1};
    g.spacing = {(hi - lo) / static_cast<double>(n), 1.0, 1.0};
    g.origin = {lo, 0.0, 0.0};
    g.validate();
    return g;
  }

  static GridSpec cube(std::size_t n, double lo, double hi) {
    return box({n, n, n}, {lo, lo, lo}, {hi, hi, hi});
  }

  static GridSpec box(Index3 shape, Point3 lo, Point3 hi) {
    GridSpec g;
    g.dim = 3;
    g.shape = shape;
    for (int a = 0; a < 3; ++a) {
      g.spacing[a] = (hi[a] - lo[a]) / static_cast<double>(shape[a]);
      g.origin[a] = lo[a];
    }
    g.validate();
    return g;
  }

  std::size_t size() const { return shape[0] * shape[1] * shape[2]; }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= spacing[a];
    return v;
  }

  double coord(int axis, std::size_t i) const {
    return origin[axis] + (static_cast<double>(i) + 0.5) * spacing[axis];
  }

  Point3 position(std::size_t idx) const {
    const Index3 c = unravel(idx);
    Point3 x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) x[a] = coord(a, c[a]);
    return x;
  }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * shape[1] + j) * shape[2] + k;
  }
  std::size_t index(const Index3& c) const { return index(c[0], c[1], c[2]); }

  Index3 unravel(std::size_t idx) const {
    const std::size_t k = idx % shape[2];
    const std::size_t rest = idx / shape[2];
    return {rest / shape[1], rest % shape[1], k};
  }

  std::size_t stride(int axis) const {
    if (axis == 0) return shape[1] * shape[2];
    if (axis == 1) return shape[2];
    return 1;
  }

  double max_spacing() const {
    double h = 0.0;
    for (int a = 0; a < dim; ++a) h = std::max(h, spacing[a]);
    return h;
  }

  /// Sum of the box extents; bounds the length of any axis-ordered path.
  double path_length() const {
    double l = 0.0;
    for (int a = 0; a < dim; ++a) l += spacing[a] * static_cast<double>(shape[a]);
    return l;
  }

  void validate() const {
    if (dim != 1 && dim != 3) throw InvalidArgument("grid dim must be 1 or 3");
    for (int a = 0; a < 3; ++a) {
      if (a < dim) {
        if (shape[a] < 2) throw InvalidArgument("grid needs at least 2 cells per axis");
        if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
          throw InvalidArgument("grid spacing must be positive and finite");
        if (!std::isfinite(origin[a])) throw InvalidArgument("grid origin must be finite");
      } else if (shape[a] != 1) {
        throw InvalidArgument("unused grid axes must have shape 1");
      }
    }
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw GridMismatch(std::string(what) + ": fields live on different grids");
}

struct ScalarField {
  GridSpec grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(GridSpec g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  ScalarField(GridSpec g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw InvalidArgument("scalar field size does not match grid");
  }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// One component per active axis, each stored as a separate array.
struct VectorField {
  GridSpec grid;
  std::array<std::vector<double>, 3> comp;

  VectorField() = default;
  explicit VectorField(GridSpec g) : grid(g) {
    for (int a = 0; a < g.dim; ++a) comp[a].assign(g.size(), 0.0);
  }

  int dim() const { return grid.dim; }
  std::size_t size() const { return grid.size(); }
  std::vector<double>& operator[](int axis) { return comp[axis]; }
  const std::vector<double>& operator[](int axis) const { return comp[axis]; }

  double norm2_at(std::size_t i) const {
    double s = 0.0;
    for (int a = 0; a < dim(); ++a) s += comp[a][i] * comp[a][i];
    return s;
  }
};

struct ComplexField {
  GridSpec grid;
  std::vector<std::complex<double>> values;

  ComplexField() = default;
  explicit ComplexField(GridSpec g) : grid(g), values(g.size()) {}
  ComplexField(GridSpec g, std::vector<std::complex<double>> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw InvalidArgument("complex field size does not match grid");
    for (const auto& z : values)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw InvalidArgument("complex field holds non-finite values");
  }
};

template <class Fn>
ScalarField sample(const GridSpec& g, Fn&& fn) {
  ScalarField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f.values[i] = fn(g.position(i));
  return f;
}

/// fn(x) returns a Point3; only the first g.dim entries are stored.
template <class Fn>
VectorField sample_vector(const GridSpec& g, Fn&& fn) {
  VectorField u(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point3 val = fn(g.position(i));
    for (int a = 0; a < g.dim; ++a) u.comp[a][i] = val[a];
  }
  return u;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_norm(const VectorField& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, u.norm2_at(i));
  return std::sqrt(m);
}

// ---------------------------------------------------------------------------
// Quadrature

inline double integrate_values(std::span<const double> v, const GridSpec& g) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * g.cell_volume();
}

inline double integrate(const ScalarField& f) { return integrate_values(f.values, f.grid); }

// ---------------------------------------------------------------------------
// Differences

namespace detail {

/// d/dx_axis with central differences inside and second-order one-sided
/// stencils on the first and last cell of each line.
template <class T>
void axis_derivative(std::span<const T> f, const GridSpec& g, int axis, std::span<T> out) {
  const std::size_t n = g.shape[axis];
  const std::size_t s = g.stride(axis);
  const double h = g.spacing[axis];
  if (n < 3) throw InvalidArgument("finite differences need at least 3 cells per axis");
  const double inv2h = 1.0 / (2.0 * h);
  for (std::size_t base = 0; base < g.size(); ++base) {
    if ((base / s) % n != 0) continue;  // visit each line once, from its first cell
    const T* p = f.data() + base;
    T* q = out.data() + base;
    q[0] = (-3.0 * p[0] + 4.0 * p[s] - p[2 * s]) * inv2h;
    for (std::size_t i = 1; i + 1 < n; ++i) q[i * s] = (p[(i + 1) * s] - p[(i - 1) * s]) * inv2h;
    q[(n - 1) * s] = (3.0 * p[(n - 1) * s] - 4.0 * p[(n - 2) * s] + p[(n - 3) * s]) * inv2h;
  }
}

}  // namespace detail

inline VectorField gradient(const ScalarField& f) {
  VectorField u(f.grid);
  for (int a = 0; a < f.grid.dim; ++a)
    detail::axis_derivative<double>(f.values, f.grid, a, u.comp[a]);
  return u;
}

inline VectorField curl(const VectorField& u) {
  if (u.dim() != 3) throw DimensionMismatch("curl needs a 3D vector field");
  const GridSpec& g = u.grid;
  std::vector<double> d(g.size());
  VectorField w(g);
  auto partial = [&](int comp, int axis) {
    detail::axis_derivative<double>(u.comp[comp], g, axis, d);
    return d;
  };
  // w0 = d1 u2 - d2 u1, w1 = d2 u0 - d0 u2, w2 = d0 u1 - d1 u0
  for (int c = 0; c < 3; ++c) {
    const int p = (c + 1) % 3;
    const int q = (c + 2) % 3;
    const std::vector<double> a = partial(q, p);
    const std::vector<double> b = partial(p, q);
    for (std::size_t i = 0; i < g.size(); ++i) w.comp[c][i] = a[i] - b[i];
  }
  return w;
}

/// Dirichlet (gradient-squared) energy sum_links |f(i+1) - f(i)|^2 / h^2 * dV
/// with the field extended by zero outside the box, so the first and last
/// cell of every line also couple to a vanishing ghost cell.
template <class T>
double dirichlet_energy(std::span<const T> f, const GridSpec& g) {
  double total = 0.0;
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::size_t n = g.shape[axis];
    const std::size_t s = g.stride(axis);
    double acc = 0.0;
    for (std::size_t base = 0; base < g.size(); ++base) {
      if ((base / s) % n != 0) continue;
      const T* p = f.data() + base;
      acc += std::norm(p[0]);
      for (std::size_t i = 0; i + 1 < n; ++i) acc += std::norm(p[(i + 1) * s] - p[i * s]);
      acc += std::norm(p[(n - 1) * s]);
    }
    total += acc / (g.spacing[axis] * g.spacing[axis]);
  }
  return total * g.cell_volume();
}

/// Nearest-neighbour Laplacian with zero exterior; the operator whose
/// quadratic form is dirichlet_energy.
inline ScalarField laplacian(const ScalarField& f) {
  const GridSpec& g = f.grid;
  ScalarField out(g);
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::size_t n = g.shape[axis];
    const std::size_t s = g.stride(axis);
    const double inv = 1.0 / (g.spacing[axis] * g.spacing[axis]);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const std::size_t i = (idx / s) % n;
      const double left = i > 0 ? f.values[idx - s] : 0.0;
      const double right = i + 1 < n ? f.values[idx + s] : 0.0;
      out.values[idx] += (left - 2.0 * f.values[idx] + right) * inv;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Marginals, pairings

/// g(x1)^2 = integral over x2, x3. A 1D field is returned unchanged.
inline ScalarField marginal_x1(const ScalarField& f) {
  const GridSpec& g = f.grid;
  if (g.dim == 1) return f;
  GridSpec line;
  line.dim = 1;
  line.shape = {g.shape[0], 1, 1};
  line.spacing = {g.spacing[0], 1.0, 1.0};
  line.origin = {g.origin[0], 0.0, 0.0};
  ScalarField m(line);
  const double area = g.spacing[1] * g.spacing[2];
  const std::size_t slab = g.shape[1] * g.shape[2];
  for (std::size_t i = 0; i < g.shape[0]; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < slab; ++j) s += f.values[i * slab + j];
    m.values[i] = s * area;
  }
  return m;
}

inline std::complex<double> inner_product(const ComplexField& a, const ComplexField& b) {
  require_same_grid(a.grid, b.grid, "inner_product");
  std::complex<double> s{0.0, 0.0};
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::conj(a.values[i]) * b.values[i];
  return s * a.grid.cell_volume();
}

// ---------------------------------------------------------------------------
// Potentials of curl-free fields

/// True when the cell and every neighbour touched by its difference stencil
/// are inside the mask. An empty mask means "everything".
inline bool stencil_inside(std::span<const std::uint8_t> mask, const GridSpec& g, std::size_t idx) {
  if (mask.empty()) return true;
  if (!mask[idx]) return false;
  const Index3 c = g.unravel(idx);
  for (int a = 0; a < g.dim; ++a) {
    const std::size_t n = g.shape[a];
    const std::size_t s = g.stride(a);
    if (c[a] == 0) {
      if (!mask[idx + s] || !mask[idx + 2 * s]) return false;
    } else if (c[a] + 1 == n) {
      if (!mask[idx - s] || !mask[idx - 2 * s]) return false;
    } else if (!mask[idx - s] || !mask[idx + s]) {
      return false;
    }
  }
  return true;
}

struct LineIntegralOptions {
  /// Maximum admissible curl; defaults to tol_curl_rel * max|u|.
  std::optional<double> tol_curl;
  double tol_curl_rel = 1e-6;
  /// Cells where u carries information. Outside it u is treated as zero and
  /// neither the curl check nor the path cross-check looks there.
  std::span<const std::uint8_t> mask{};
};

namespace detail {

struct PathIntegral {
  std::vector<double> s;
  Mask inside;  // path from the reference cell stayed in the mask
};

inline PathIntegral integrate_ordered(const VectorField& u, const Index3& ref,
                                      const std::array<int, 3>& order,
                                      std::span<const std::uint8_t> mask) {
  const GridSpec& g = u.grid;
  PathIntegral r{std::vector<double>(g.size(), 0.0), Mask(g.size(), 0)};
  Mask set(g.size(), 0);
  const std::size_t r0 = g.index(ref);
  set[r0] = 1;
  r.inside[r0] = mask.empty() ? 1 : mask[r0];
  for (int k = 0; k < g.dim; ++k) {
    const int axis = order[k];
    const std::size_t n = g.shape[axis];
    const std::size_t s = g.stride(axis);
    const double h = g.spacing[axis];
    const std::vector<double>& ua = u.comp[axis];
    for (std::size_t base = 0; base < g.size(); ++base) {
      if ((base / s) % n != 0) continue;
      const std::size_t start = base + ref[axis] * s;
      if (!set[start]) continue;
      auto step = [&](std::size_t from, std::size_t to, double sign) {
        r.s[to] = r.s[from] + sign * 0.5 * h * (ua[from] + ua[to]);
        r.inside[to] = r.inside[from] && (mask.empty() || mask[to]);
        set[to] = 1;
      };
      for (std::size_t i = ref[axis] + 1; i < n; ++i) step(base + (i - 1) * s, base + i * s, 1.0);
      for (std::size_t i = ref[axis]; i-- > 0;) step(base + (i + 1) * s, base + i * s, -1.0);
    }
  }
  return r;
}

}  // namespace detail

/// Potential S of a curl-free field u with S(ref) = 0, by trapezoidal
/// integration along x1, then x2, then x3. The result is cross-checked
/// against the reverse order x3, x2, x1 on every cell whose two paths stay
/// inside the mask; the admissible discrepancy is the trapezoid error bound
/// of both paths plus the curl tolerance integrated over the path length.
inline ScalarField line_integrate(const VectorField& u, const Index3& ref,
                                  const LineIntegralOptions& opt = {}) {
  const GridSpec& g = u.grid;
  for (int a = 0; a < g.dim; ++a)
    if (ref[a] >= g.shape[a]) throw InvalidArgument("line_integrate: reference cell outside grid");
  if (!opt.mask.empty() && opt.mask.size() != g.size())
    throw InvalidArgument("line_integrate: mask size does not match grid");

  double umax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (opt.mask.empty() || opt.mask[i]) umax = std::max(umax, u.norm2_at(i));
  umax = std::sqrt(umax);
  const double tol_curl = opt.tol_curl.value_or(opt.tol_curl_rel * umax);

  if (g.dim == 3) {
    const VectorField w = curl(u);
    double wmax = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (stencil_inside(opt.mask, g, i)) wmax = std::max(wmax, w.norm2_at(i));
    wmax = std::sqrt(wmax);
    if (wmax > tol_curl) throw CurlTooLarge(wmax, tol_curl);
  }

  detail::PathIntegral fwd = detail::integrate_ordered(u, ref, {0, 1, 2}, opt.mask);
  if (g.dim == 3) {
    const detail::PathIntegral rev = detail::integrate_ordered(u, ref, {2, 1, 0}, opt.mask);
    double d2max = 0.0;
    for (int a = 0; a < 3; ++a) {
      const std::size_t s = g.stride(a);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t c = (i / s) % g.shape[a];
        if (c == 0 || c + 1 == g.shape[a]) continue;
        if (!opt.mask.empty() && !(opt.mask[i - s] && opt.mask[i] && opt.mask[i + s])) continue;
        d2max = std::max(d2max, std::abs(u.comp[a][i + s] - 2.0 * u.comp[a][i] + u.comp[a][i - s]));
      }
    }
    const double len = g.path_length();
    const double tol_path = len * (tol_curl * len + d2max / 6.0) +
                            64.0 * std::numeric_limits<double>::epsilon() * len * umax;
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (fwd.inside[i] && rev.inside[i]) worst = std::max(worst, std::abs(fwd.s[i] - rev.s[i]));
    if (worst > tol_path) throw PathMismatch(worst, tol_path);
  }
  return ScalarField(g, std::move(fwd.s));
}

}  // namespace cdft
