#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>

namespace smectic {

enum class Axis : int { x = 0, y = 1, z = 2 };

/// Axis-aligned box [lo, hi] in dimensionless length units.
struct Box {
  Eigen::Vector3d lo{-0.5, -0.5, -0.5};
  Eigen::Vector3d hi{0.5, 0.5, 0.5};

  static Box cube(double lo, double hi) {
    return {Eigen::Vector3d::Constant(lo), Eigen::Vector3d::Constant(hi)};
  }
  static Box unit_centered() { return cube(-0.5, 0.5); }

  Eigen::Vector3d extent() const { return hi - lo; }
  Eigen::Vector3d center() const { return 0.5 * (lo + hi); }
  double volume() const { return extent().prod(); }
};

/// Uniform node-centered grid. Storage order is x-fastest, then y, then z.
class Grid3 {
 public:
  Grid3(int nx, int ny, int nz, const Box& box);

  int nx() const { return counts_[0]; }
  int ny() const { return counts_[1]; }
  int nz() const { return counts_[2]; }
  int count(Axis a) const { return counts_[static_cast<int>(a)]; }
  const std::array<int, 3>& counts() const { return counts_; }
  std::size_t size() const {
    return static_cast<std::size_t>(counts_[0]) * counts_[1] * counts_[2];
  }

  const Box& box() const { return box_; }
  const Eigen::Vector3d& spacing() const { return h_; }
  double h(Axis a) const { return h_[static_cast<int>(a)]; }
  double hx() const { return h_[0]; }
  double hy() const { return h_[1]; }
  double hz() const { return h_[2]; }

  std::size_t stride(Axis a) const {
    switch (a) {
      case Axis::x: return 1;
      case Axis::y: return static_cast<std::size_t>(counts_[0]);
      case Axis::z: break;
    }
    return static_cast<std::size_t>(counts_[0]) * counts_[1];
  }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(counts_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(counts_[1]) * k);
  }
  std::array<int, 3> ijk(std::size_t n) const {
    const int i = static_cast<int>(n % counts_[0]);
    const std::size_t rest = n / counts_[0];
    return {i, static_cast<int>(rest % counts_[1]), static_cast<int>(rest / counts_[1])};
  }
  Eigen::Vector3d coord(int i, int j, int k) const {
    return box_.lo + Eigen::Vector3d(i * h_[0], j * h_[1], k * h_[2]);
  }
  Eigen::Vector3d coord(std::size_t n) const {
    const auto [i, j, k] = ijk(n);
    return coord(i, j, k);
  }

  bool operator==(const Grid3& other) const {
    return counts_ == other.counts_ && box_.lo == other.box_.lo && box_.hi == other.box_.hi;
  }

 private:
  std::array<int, 3> counts_;
  Box box_;
  Eigen::Vector3d h_;
};

Grid3 make_grid(int nx, int ny, int nz, const Box& box);

inline Grid3 make_cubic_grid(int n, const Box& box = Box::unit_centered()) {
  return make_grid(n, n, n, box);
}

struct ScalarField {
  Grid3 grid;
  Eigen::ArrayXd values;

  ScalarField(Grid3 g, Eigen::ArrayXd v);
  explicit ScalarField(Grid3 g) : ScalarField(g, Eigen::ArrayXd::Zero(g.size())) {}

  double operator()(int i, int j, int k) const { return values[grid.index(i, j, k)]; }
  double& operator()(int i, int j, int k) { return values[grid.index(i, j, k)]; }
};

/// One 3-vector per node; column c holds component c for every node.
struct VectorField3 {
  Grid3 grid;
  Eigen::ArrayX3d values;

  VectorField3(Grid3 g, Eigen::ArrayX3d v);
  explicit VectorField3(Grid3 g) : VectorField3(g, Eigen::ArrayX3d::Zero(g.size(), 3)) {}

  auto component(Axis a) const { return values.col(static_cast<int>(a)); }
  auto component(Axis a) { return values.col(static_cast<int>(a)); }
  Eigen::Vector3d at(std::size_t n) const { return values.row(n).transpose().matrix(); }
};

/// Horizontal Hessian (u_xx, u_xy; u_xy, u_yy) with the off-diagonal stored once.
struct HessianPerp {
  Grid3 grid;
  Eigen::ArrayXd xx;
  Eigen::ArrayXd xy;
  Eigen::ArrayXd yy;

  Eigen::Matrix2d at(std::size_t n) const {
    Eigen::Matrix2d m;
    m << xx[n], xy[n], xy[n], yy[n];
    return m;
  }
};

/// Sub-box given as per-axis fractions of the grid box. Nodes inside the
/// fractional interval (snapped inward) take part in quadrature.
struct Window {
  std::array<std::array<double, 2>, 3> fraction{{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};

  static Window full() { return {}; }
  static Window along(Axis a, double lo, double hi) {
    Window w;
    w.fraction[static_cast<int>(a)] = {lo, hi};
    return w;
  }
  static Window interior(double margin) {
    Window w;
    for (auto& f : w.fraction) f = {margin, 1.0 - margin};
    return w;
  }
  bool is_full() const {
    for (const auto& f : fraction)
      if (f[0] != 0.0 || f[1] != 1.0) return false;
    return true;
  }
  /// Inclusive node index range [first, last] along an axis.
  std::array<int, 2> node_range(const Grid3& grid, Axis a) const;
};

template <class F>
ScalarField sample_field(const Grid3& grid, F&& f) {
  Eigen::ArrayXd v(grid.size());
  for (int k = 0; k < grid.nz(); ++k)
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i) {
        const Eigen::Vector3d p = grid.coord(i, j, k);
        const double value = f(p.x(), p.y(), p.z());
        if (!std::isfinite(value)) {
          std::ostringstream msg;
          msg << "sample_field: non-finite value at node (" << i << ',' << j << ',' << k
              << ") = (" << p.x() << ',' << p.y() << ',' << p.z() << ')';
          throw std::domain_error(msg.str());
        }
        v[grid.index(i, j, k)] = value;
      }
  return {grid, std::move(v)};
}

VectorField3 gradient(const ScalarField& u);
ScalarField perp_laplacian(const ScalarField& u);
HessianPerp perp_hessian(const ScalarField& u);
ScalarField divergence(const VectorField3& f);

double integrate(const ScalarField& f, const Window& region = Window::full());
double boundary_flux(const VectorField3& f);

/// Trapezoidal node weights restricted to a window (zero outside).
Eigen::ArrayXd quadrature_weights(const Grid3& grid, const Window& region = Window::full());

// Raw stencil operators and their transposes. The transposes are what the
// exact discrete-energy gradient is assembled from.
Eigen::ArrayXd first_difference(const Eigen::ArrayXd& u, const Grid3& grid, Axis a);
Eigen::ArrayXd first_difference_adjoint(const Eigen::ArrayXd& v, const Grid3& grid, Axis a);
Eigen::ArrayXd second_difference(const Eigen::ArrayXd& u, const Grid3& grid, Axis a);
Eigen::ArrayXd second_difference_adjoint(const Eigen::ArrayXd& v, const Grid3& grid, Axis a);

/// Deterministic pairwise (cascade) summation.
double pairwise_sum(std::span<const double> xs);

inline double weighted_sum(const Eigen::ArrayXd& weights, const Eigen::ArrayXd& values) {
  const Eigen::ArrayXd prod = weights * values;
  return pairwise_sum({prod.data(), static_cast<std::size_t>(prod.size())});
}

/// Worker cap taken from SMECTIC_THREADS (default: hardware concurrency).
unsigned worker_count();

}  // namespace smectic
