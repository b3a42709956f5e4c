#include "smectic/grid_field.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace smectic {

namespace {

struct StencilRow {
  int len = 0;
  std::array<int, 4> offset{};
  std::array<double, 4> coeff{};
};

struct Stencil1D {
  StencilRow left;
  StencilRow interior;
  StencilRow right;
  int order = 1;  // power of h in the denominator
};

Stencil1D first_stencil() {
  return {{3, {0, 1, 2, 0}, {-1.5, 2.0, -0.5, 0.0}},
          {2, {-1, 1, 0, 0}, {-0.5, 0.5, 0.0, 0.0}},
          {3, {0, -1, -2, 0}, {1.5, -2.0, 0.5, 0.0}},
          1};
}

Stencil1D second_stencil(int n) {
  const StencilRow interior{3, {-1, 0, 1, 0}, {1.0, -2.0, 1.0, 0.0}};
  if (n >= 4)
    return {{4, {0, 1, 2, 3}, {2.0, -5.0, 4.0, -1.0}},
            interior,
            {4, {0, -1, -2, -3}, {2.0, -5.0, 4.0, -1.0}},
            2};
  return {{3, {0, 1, 2, 0}, {1.0, -2.0, 1.0, 0.0}},
          interior,
          {3, {0, -1, -2, 0}, {1.0, -2.0, 1.0, 0.0}},
          2};
}

// Splits [0, count) into contiguous chunks, one per worker. Each chunk
// writes a disjoint set of lines so no synchronization is needed.
template <class Fn>
void for_each_chunk(std::size_t count, std::size_t work_per_item, Fn&& fn) {
  const unsigned workers = worker_count();
  if (workers <= 1 || count * work_per_item < (1u << 16) || count < 2) {
    fn(std::size_t{0}, count);
    return;
  }
  const std::size_t nchunks = std::min<std::size_t>(workers, count);
  std::vector<std::jthread> pool;
  pool.reserve(nchunks - 1);
  const std::size_t per = (count + nchunks - 1) / nchunks;
  for (std::size_t c = 1; c < nchunks; ++c) {
    const std::size_t b = c * per;
    const std::size_t e = std::min(count, b + per);
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(std::size_t{0}, std::min(count, per));
}

std::size_t line_base(const Grid3& g, Axis a, std::size_t line) {
  const std::size_t nx = g.nx();
  const std::size_t ny = g.ny();
  switch (a) {
    case Axis::x: return line * nx;
    case Axis::y: return (line % nx) + nx * ny * (line / nx);
    case Axis::z: break;
  }
  return line;
}

const StencilRow& row_for(const Stencil1D& s, int i, int n) {
  if (i == 0) return s.left;
  if (i == n - 1) return s.right;
  return s.interior;
}

Eigen::ArrayXd apply_stencil(const Eigen::ArrayXd& u, const Grid3& g, Axis a,
                             const Stencil1D& st) {
  const int n = g.count(a);
  const std::size_t s = g.stride(a);
  const double scale = 1.0 / std::pow(g.h(a), st.order);
  const std::size_t lines = g.size() / n;
  Eigen::ArrayXd out(g.size());
  for_each_chunk(lines, n, [&](std::size_t l0, std::size_t l1) {
    for (std::size_t l = l0; l < l1; ++l) {
      const std::size_t base = line_base(g, a, l);
      for (int i = 0; i < n; ++i) {
        const StencilRow& r = row_for(st, i, n);
        double acc = 0.0;
        for (int c = 0; c < r.len; ++c) acc += r.coeff[c] * u[base + (i + r.offset[c]) * s];
        out[base + i * s] = acc * scale;
      }
    }
  });
  return out;
}

Eigen::ArrayXd apply_stencil_transpose(const Eigen::ArrayXd& v, const Grid3& g, Axis a,
                                       const Stencil1D& st) {
  const int n = g.count(a);
  const std::size_t s = g.stride(a);
  const double scale = 1.0 / std::pow(g.h(a), st.order);
  const std::size_t lines = g.size() / n;
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(g.size());
  for_each_chunk(lines, n, [&](std::size_t l0, std::size_t l1) {
    for (std::size_t l = l0; l < l1; ++l) {
      const std::size_t base = line_base(g, a, l);
      for (int i = 0; i < n; ++i) {
        const StencilRow& r = row_for(st, i, n);
        const double vi = v[base + i * s] * scale;
        for (int c = 0; c < r.len; ++c) out[base + (i + r.offset[c]) * s] += r.coeff[c] * vi;
      }
    }
  });
  return out;
}

Eigen::ArrayXd trapezoid_1d(int n, double h, int first, int last) {
  Eigen::ArrayXd w = Eigen::ArrayXd::Zero(n);
  for (int i = first; i <= last; ++i) w[i] = h;
  w[first] *= 0.5;
  w[last] *= 0.5;
  return w;
}

void check_all_finite(const double* data, std::size_t n, const char* what) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(data[i]))
      throw std::domain_error(std::string(what) + ": non-finite entry at storage index " +
                              std::to_string(i));
}

}  // namespace

Grid3::Grid3(int nx, int ny, int nz, const Box& box) : counts_{nx, ny, nz}, box_(box) {
  for (int c = 0; c < 3; ++c) {
    if (counts_[c] < 3)
      throw std::invalid_argument("Grid3: node count along axis " + std::to_string(c) +
                                  " is " + std::to_string(counts_[c]) +
                                  "; stencils need at least 3 nodes");
    if (!(box.hi[c] > box.lo[c]) || !std::isfinite(box.lo[c]) || !std::isfinite(box.hi[c]))
      throw std::invalid_argument("Grid3: box is inverted or degenerate along axis " +
                                  std::to_string(c));
  }
  h_ = box_.extent().array() /
       Eigen::Array3d(counts_[0] - 1, counts_[1] - 1, counts_[2] - 1);
}

Grid3 make_grid(int nx, int ny, int nz, const Box& box) { return Grid3(nx, ny, nz, box); }

ScalarField::ScalarField(Grid3 g, Eigen::ArrayXd v) : grid(std::move(g)), values(std::move(v)) {
  if (static_cast<std::size_t>(values.size()) != grid.size())
    throw std::invalid_argument("ScalarField: value count does not match grid");
  check_all_finite(values.data(), values.size(), "ScalarField");
}

VectorField3::VectorField3(Grid3 g, Eigen::ArrayX3d v) : grid(std::move(g)), values(std::move(v)) {
  if (static_cast<std::size_t>(values.rows()) != grid.size())
    throw std::invalid_argument("VectorField3: value count does not match grid");
  check_all_finite(values.data(), values.size(), "VectorField3");
}

std::array<int, 2> Window::node_range(const Grid3& grid, Axis a) const {
  const int c = static_cast<int>(a);
  const auto [f0, f1] = fraction[c];
  if (!(f0 >= 0.0 && f1 <= 1.0 && f0 < f1))
    throw std::invalid_argument("Window: fractions along axis " + std::to_string(c) +
                                " must satisfy 0 <= lo < hi <= 1");
  const int n = grid.count(a);
  const double cells = n - 1;
  const int first = static_cast<int>(std::ceil(f0 * cells - 1e-9));
  const int last = static_cast<int>(std::floor(f1 * cells + 1e-9));
  if (last <= first)
    throw std::invalid_argument("Window: empty node range along axis " + std::to_string(c));
  return {std::max(first, 0), std::min(last, n - 1)};
}

Eigen::ArrayXd first_difference(const Eigen::ArrayXd& u, const Grid3& grid, Axis a) {
  return apply_stencil(u, grid, a, first_stencil());
}
Eigen::ArrayXd first_difference_adjoint(const Eigen::ArrayXd& v, const Grid3& grid, Axis a) {
  return apply_stencil_transpose(v, grid, a, first_stencil());
}
Eigen::ArrayXd second_difference(const Eigen::ArrayXd& u, const Grid3& grid, Axis a) {
  return apply_stencil(u, grid, a, second_stencil(grid.count(a)));
}
Eigen::ArrayXd second_difference_adjoint(const Eigen::ArrayXd& v, const Grid3& grid, Axis a) {
  return apply_stencil_transpose(v, grid, a, second_stencil(grid.count(a)));
}

VectorField3 gradient(const ScalarField& u) {
  Eigen::ArrayX3d g(u.grid.size(), 3);
  g.col(0) = first_difference(u.values, u.grid, Axis::x);
  g.col(1) = first_difference(u.values, u.grid, Axis::y);
  g.col(2) = first_difference(u.values, u.grid, Axis::z);
  return {u.grid, std::move(g)};
}

ScalarField perp_laplacian(const ScalarField& u) {
  return {u.grid, second_difference(u.values, u.grid, Axis::x) +
                      second_difference(u.values, u.grid, Axis::y)};
}

HessianPerp perp_hessian(const ScalarField& u) {
  const Eigen::ArrayXd ux = first_difference(u.values, u.grid, Axis::x);
  return {u.grid, second_difference(u.values, u.grid, Axis::x),
          first_difference(ux, u.grid, Axis::y), second_difference(u.values, u.grid, Axis::y)};
}

ScalarField divergence(const VectorField3& f) {
  Eigen::ArrayXd d = first_difference(f.values.col(0), f.grid, Axis::x);
  d += first_difference(f.values.col(1), f.grid, Axis::y);
  d += first_difference(f.values.col(2), f.grid, Axis::z);
  return {f.grid, std::move(d)};
}

Eigen::ArrayXd quadrature_weights(const Grid3& grid, const Window& region) {
  std::array<Eigen::ArrayXd, 3> w;
  for (int c = 0; c < 3; ++c) {
    const auto a = static_cast<Axis>(c);
    const auto [first, last] = region.node_range(grid, a);
    w[c] = trapezoid_1d(grid.count(a), grid.h(a), first, last);
  }
  Eigen::ArrayXd out(grid.size());
  for (int k = 0; k < grid.nz(); ++k)
    for (int j = 0; j < grid.ny(); ++j) {
      const double wyz = w[1][j] * w[2][k];
      const std::size_t base = grid.index(0, j, k);
      out.segment(base, grid.nx()) = w[0] * wyz;
    }
  return out;
}

double integrate(const ScalarField& f, const Window& region) {
  return weighted_sum(quadrature_weights(f.grid, region), f.values);
}

double boundary_flux(const VectorField3& f) {
  const Grid3& g = f.grid;
  std::array<Eigen::ArrayXd, 3> w;
  for (int c = 0; c < 3; ++c) {
    const int n = g.count(static_cast<Axis>(c));
    w[c] = trapezoid_1d(n, g.h(static_cast<Axis>(c)), 0, n - 1);
  }
  std::vector<double> terms;
  terms.reserve(2 * (g.nx() * g.ny() + g.ny() * g.nz() + g.nx() * g.nz()));
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j) {
      const double a = w[1][j] * w[2][k];
      terms.push_back(-a * f.values(g.index(0, j, k), 0));
      terms.push_back(a * f.values(g.index(nx - 1, j, k), 0));
    }
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i) {
      const double a = w[0][i] * w[2][k];
      terms.push_back(-a * f.values(g.index(i, 0, k), 1));
      terms.push_back(a * f.values(g.index(i, ny - 1, k), 1));
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double a = w[0][i] * w[1][j];
      terms.push_back(-a * f.values(g.index(i, j, 0), 2));
      terms.push_back(a * f.values(g.index(i, j, nz - 1), 2));
    }
  return pairwise_sum(terms);
}

double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t block = 128;
  if (xs.size() <= block) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SMECTIC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return std::min<unsigned>(hw, static_cast<unsigned>(v));
  }
  return hw;
}

}  // namespace smectic
