#include <doctest.h>

#include "oracles.hpp"
#include "smectic/grid_field.hpp"

#include <cstdlib>
#include <cstring>

using namespace smectic;

namespace {

template <class A>
double max_abs(const Eigen::ArrayBase<A>& a) {
  return a.abs().maxCoeff();
}

}  // namespace

TEST_CASE("grid construction") {
  const Grid3 g = make_cubic_grid(17);
  CHECK(g.hx() == doctest::Approx(1.0 / 16));
  CHECK(g.size() == 17u * 17u * 17u);
  CHECK(g.coord(0, 0, 0).isApprox(Eigen::Vector3d::Constant(-0.5)));
  CHECK(g.coord(16, 16, 16).isApprox(Eigen::Vector3d::Constant(0.5)));

  const Grid3 a = make_grid(5, 9, 3, Box::cube(0.0, 2.0));
  CHECK(a.hx() == doctest::Approx(0.5));
  CHECK(a.hy() == doctest::Approx(0.25));
  CHECK(a.hz() == doctest::Approx(1.0));

  CHECK_THROWS_AS(make_grid(3, 3, 2, Box::unit_centered()), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(3, 3, 3, Box{{0, 0, 0}, {1, -1, 1}}), std::invalid_argument);

  for (std::size_t n : {std::size_t{0}, std::size_t{7}, g.size() - 1}) {
    const auto [i, j, k] = g.ijk(n);
    CHECK(g.index(i, j, k) == n);
  }
}

TEST_CASE("sample_field") {
  const Grid3 g = make_cubic_grid(5);
  const ScalarField zero = sample_field(g, [](double, double, double) { return 0.0; });
  CHECK(max_abs(zero.values) == 0.0);

  const ScalarField saddle = sample_field(g, [](double x, double y, double) { return x * x - y * y; });
  CHECK(saddle(3, 1, 2) == doctest::Approx(0.0));  // node (¼, −¼, 0)
  CHECK(saddle(4, 2, 0) == doctest::Approx(0.25));

  try {
    sample_field(g, [](double x, double, double) { return 1.0 / (x - 0.25); });
    FAIL("expected domain_error");
  } catch (const std::domain_error& e) {
    CHECK(std::strstr(e.what(), "(3,") != nullptr);
  }
}

TEST_CASE("gradient examples") {
  const Grid3 g = make_cubic_grid(5, Box::cube(-1.0, 1.0));
  const ScalarField aff = sample_field(g, [](double x, double y, double z) { return 2 * x - y + 3 * z + 1; });
  const VectorField3 ga = gradient(aff);
  CHECK(max_abs(ga.values.col(0) - 2.0) < 1e-12);
  CHECK(max_abs(ga.values.col(1) + 1.0) < 1e-12);
  CHECK(max_abs(ga.values.col(2) - 3.0) < 1e-12);

  const ScalarField s = sample_field(g, [](double x, double y, double) { return 0.5 * (x * x - y * y); });
  const Eigen::Vector3d at = gradient(s).at(g.index(4, 4, 2));
  CHECK(at.isApprox(Eigen::Vector3d(1.0, -1.0, 0.0), 1e-12));

  // sin x: error ratio ≈ 4 under halving.
  std::vector<double> err;
  for (int n : {17, 33, 65}) {
    const Grid3 gn = make_grid(n, 3, 3, Box::unit_centered());
    const ScalarField f = sample_field(gn, [](double x, double, double) { return std::sin(3 * x); });
    const Eigen::ArrayXd dx = gradient(f).values.col(0);
    double e = 0.0;
    for (std::size_t i = 0; i < gn.size(); ++i)
      e = std::max(e, std::abs(dx[i] - 3 * std::cos(3 * gn.coord(i).x())));
    err.push_back(e);
  }
  for (double p : oracle::orders(err)) CHECK(p > 1.9);
}

TEST_CASE("laplacian and hessian examples") {
  const Grid3 g = make_cubic_grid(9);
  const auto lap_of = [&](auto f) { return perp_laplacian(sample_field(g, f)).values; };
  CHECK(max_abs(lap_of([](double x, double y, double) { return x * y; })) < 1e-10);
  CHECK(max_abs(lap_of([](double x, double y, double) { return 0.5 * (x * x + y * y); }) - 2.0) < 1e-10);
  CHECK(max_abs(lap_of([](double x, double y, double) { return 0.5 * (x * x - y * y); })) < 1e-10);

  const HessianPerp h = perp_hessian(sample_field(g, [](double x, double y, double) { return x * y; }));
  CHECK(max_abs(h.xx) < 1e-10);
  CHECK(max_abs(h.yy) < 1e-10);
  CHECK(max_abs(h.xy - 1.0) < 1e-10);

  const HessianPerp ha = perp_hessian(sample_field(g, [](double x, double y, double z) { return x - 4 * y + z; }));
  CHECK(max_abs(ha.xx) + max_abs(ha.xy) + max_abs(ha.yy) < 1e-10);

  const HessianPerp hs = perp_hessian(sample_field(g, [](double x, double y, double) { return 0.5 * (x * x - y * y); }));
  CHECK(max_abs(hs.xx - 1.0) < 1e-10);
  CHECK(max_abs(hs.yy + 1.0) < 1e-10);
  CHECK(max_abs(hs.xy) < 1e-10);
}

TEST_CASE("integration examples") {
  const Grid3 g = make_cubic_grid(17);
  CHECK(integrate(sample_field(g, [](double, double, double) { return 1.0; })) == doctest::Approx(1.0).epsilon(1e-14));
  const ScalarField odd = sample_field(g, [](double x, double y, double z) { return x * y * z + x; });
  CHECK(std::abs(integrate(odd)) < 1e-15);

  std::vector<double> err;
  for (int n : {9, 17, 33}) {
    const ScalarField f = sample_field(make_cubic_grid(n), [](double x, double, double) { return x * x; });
    err.push_back(std::abs(integrate(f) - 1.0 / 12.0));
  }
  for (double p : oracle::orders(err)) CHECK(p == doctest::Approx(2.0).epsilon(0.02));

  // A window between two grid lines snaps inward.
  const ScalarField one = sample_field(g, [](double, double, double) { return 1.0; });
  CHECK(integrate(one, Window::along(Axis::x, 0.25, 0.75)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(integrate(one, Window::along(Axis::x, 0.51, 0.52)), std::invalid_argument);
}

TEST_CASE("boundary flux examples") {
  const Grid3 g = make_cubic_grid(9);
  auto vec = [&](auto f) {
    Eigen::ArrayX3d v(g.size(), 3);
    for (std::size_t n = 0; n < g.size(); ++n) v.row(n) = f(g.coord(n)).transpose().array();
    return VectorField3(g, v);
  };
  CHECK(boundary_flux(vec([](const Eigen::Vector3d& p) { return p; })) == doctest::Approx(3.0));
  CHECK(std::abs(boundary_flux(vec([](const Eigen::Vector3d&) { return Eigen::Vector3d(1, 2, 3); }))) < 1e-14);
  CHECK(boundary_flux(vec([](const Eigen::Vector3d& p) { return Eigen::Vector3d(2 * p.x(), 0, 0); })) ==
        doctest::Approx(2.0));
}

TEST_CASE("property: discrete divergence theorem converges at second order") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    const oracle::Trig fx = oracle::random_trig(rng), fy = oracle::random_trig(rng),
                       fz = oracle::random_trig(rng);
    std::vector<double> err;
    for (int n : {9, 17, 33}) {
      const Grid3 g = make_cubic_grid(n);
      Eigen::ArrayX3d v(g.size(), 3);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Eigen::Vector3d p = g.coord(i);
        v(i, 0) = fx.value(p.x(), p.y(), p.z());
        v(i, 1) = fy.value(p.x(), p.y(), p.z());
        v(i, 2) = fz.value(p.x(), p.y(), p.z());
      }
      const VectorField3 f(g, v);
      err.push_back(std::abs(integrate(divergence(f)) - boundary_flux(f)));
    }
    for (double p : oracle::orders(err)) CHECK(p >= 1.8);
  }
}

TEST_CASE("property: operators are linear") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  const Grid3 g = make_grid(7, 6, 5, Box::cube(-1.0, 0.5));
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::ArrayXd a(g.size()), b(g.size());
    for (auto& x : a) x = nd(rng);
    for (auto& x : b) x = nd(rng);
    const double s = nd(rng), t = nd(rng);
    const ScalarField fa(g, a), fb(g, b), fab(g, s * a + t * b);
    CHECK(max_abs(gradient(fab).values - (s * gradient(fa).values + t * gradient(fb).values)) < 1e-9);
    CHECK(max_abs(perp_laplacian(fab).values -
                  (s * perp_laplacian(fa).values + t * perp_laplacian(fb).values)) < 1e-8);
    CHECK(std::abs(integrate(fab) - (s * integrate(fa) + t * integrate(fb))) < 1e-12);
  }
}

TEST_CASE("property: stencils exact on per-axis quadratics") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  const Grid3 g = make_cubic_grid(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::array<double, 27> coef;
    for (auto& x : coef) x = c(rng);
    // u = Σ c_abc x^a y^b z^c with a, b, c ≤ 2
    auto eval = [&](const Eigen::Vector3d& p, int dx, int dy) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int cc = 0; cc < 3; ++cc) {
            if (a < dx || b < dy) continue;
            auto fall = [](int k, int d) { return d == 0 ? 1.0 : d == 1 ? k : k * (k - 1); };
            s += coef[a + 3 * b + 9 * cc] * fall(a, dx) * fall(b, dy) * std::pow(p.x(), a - dx) *
                 std::pow(p.y(), b - dy) * std::pow(p.z(), cc);
          }
      return s;
    };
    const ScalarField u = sample_field(g, [&](double x, double y, double z) {
      return eval({x, y, z}, 0, 0);
    });
    const VectorField3 gr = gradient(u);
    const HessianPerp h = perp_hessian(u);
    double e = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      const Eigen::Vector3d p = g.coord(n);
      e = std::max({e, std::abs(gr.values(n, 0) - eval(p, 1, 0)),
                    std::abs(gr.values(n, 1) - eval(p, 0, 1)), std::abs(h.xx[n] - eval(p, 2, 0)),
                    std::abs(h.yy[n] - eval(p, 0, 2)), std::abs(h.xy[n] - eval(p, 1, 1))});
    }
    CHECK(e < 1e-10);
  }
}

TEST_CASE("adjoint stencils are transposes") {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> nd;
  const Grid3 g = make_grid(6, 5, 7, Box::unit_centered());
  for (Axis a : {Axis::x, Axis::y, Axis::z}) {
    Eigen::ArrayXd u(g.size()), v(g.size());
    for (auto& x : u) x = nd(rng);
    for (auto& x : v) x = nd(rng);
    CHECK((first_difference(u, g, a) * v).sum() ==
          doctest::Approx((u * first_difference_adjoint(v, g, a)).sum()).epsilon(1e-12));
    CHECK((second_difference(u, g, a) * v).sum() ==
          doctest::Approx((u * second_difference_adjoint(v, g, a)).sum()).epsilon(1e-12));
  }
}

TEST_CASE("reductions are reproducible across thread counts") {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> nd;
  const Grid3 g = make_cubic_grid(41);
  Eigen::ArrayXd v(g.size());
  for (auto& x : v) x = nd(rng);
  const ScalarField f(g, v);

  ::setenv("SMECTIC_THREADS", "1", 1);
  const double serial = integrate(f);
  const Eigen::ArrayXd lap1 = perp_laplacian(f).values;
  ::setenv("SMECTIC_THREADS", "4", 1);
  const double parallel = integrate(f);
  const Eigen::ArrayXd lap4 = perp_laplacian(f).values;
  ::unsetenv("SMECTIC_THREADS");

  CHECK(serial == parallel);
  CHECK((lap1 == lap4).all());
  CHECK(integrate(f) == serial);
}
