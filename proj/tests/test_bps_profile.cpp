#include <doctest.h>

#include "oracles.hpp"
#include "smectic/bps_profile.hpp"
#include "smectic/errors.hpp"

using namespace smectic;

namespace {

const JumpStates& tilted_jump() {
  static const JumpStates j({1, 0, 0.5}, {0, 0, 0});
  return j;
}

const JumpStates& symmetric_jump() {
  static const JumpStates j({1, 0, 0.5}, {-1, 0, 0.5});
  return j;
}

const double logistic_rate = std::sqrt(5.0) / 4.0;

}  // namespace

TEST_CASE("profile rhs examples") {
  CHECK(profile_rhs(0.0, tilted_jump()) == 0.0);
  CHECK(std::abs(profile_rhs(1.0, tilted_jump())) < 1e-16);
  CHECK(profile_rhs(0.5, tilted_jump()) == doctest::Approx(std::sqrt(5.0) / 16.0).epsilon(1e-15));
  for (double g : {0.1, 0.3, 0.77})
    CHECK(profile_rhs(g, tilted_jump()) == doctest::Approx(logistic_rate * g * (1 - g)).epsilon(1e-14));
}

TEST_CASE("logistic oracle") {
  const ProfileSolution sol = solve_profile(tilted_jump(), 40.0, 1e-10);
  double worst = 0.0;
  for (std::size_t i = 0; i < sol.ts.size(); ++i)
    worst = std::max(worst, std::abs(sol.gs[i] - oracle::logistic(sol.ts[i], logistic_rate)));
  CHECK(worst < 1e-8);
  // between samples too
  for (double t = -39.9; t < 39.9; t += 0.173)
    CHECK(std::abs(sol.g_at(t) - oracle::logistic(t, logistic_rate)) < 1e-8);
  CHECK(sol.decay_plus == doctest::Approx(logistic_rate).epsilon(0.02));
  CHECK(sol.decay_minus == doctest::Approx(logistic_rate).epsilon(0.02));
  CHECK(sol.fit_r2_plus > 0.999);
  CHECK(sol.fit_r2_minus > 0.999);
  CHECK(sol.g_at(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  // G(t) = (ln(1 + e^{rt}) − ln 2)/r
  for (double t : {-20.0, -3.0, 0.5, 7.0, 30.0})
    CHECK(sol.antiderivative_at(t) ==
          doctest::Approx((std::log1p(std::exp(logistic_rate * t)) - std::log(2.0)) / logistic_rate)
              .epsilon(1e-8));
}

TEST_CASE("solution invariants") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 10; ++t) {
    const auto [mp, mm] = oracle::random_compatible(rng);
    const ProfileSolution sol = solve_profile(JumpStates(mp, mm), 60.0, 1e-10);
    for (std::size_t i = 0; i < sol.ts.size(); ++i) {
      // g itself rounds to 1 deep in the upper tail; the stored distance to
      // the nearer limit stays strictly positive
      CHECK(sol.tails[i] > 0.0);
      CHECK(sol.gs[i] > 0.0);
      CHECK(sol.gs[i] <= 1.0);
      if (i > 0) {
        CHECK(sol.ts[i] > sol.ts[i - 1]);
        CHECK(sol.gs[i] >= sol.gs[i - 1]);
      }
    }
    CHECK(sol.g_at(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sol.fit_r2_plus > 0.999);
    CHECK(sol.fit_r2_minus > 0.999);
    // the rate is |p|/2 for every compatible pair
    CHECK(sol.decay_plus == doctest::Approx((mp - mm).norm() / 2).epsilon(0.02));
    CHECK(sol.decay_minus == doctest::Approx((mp - mm).norm() / 2).epsilon(0.02));
  }
}

TEST_CASE("solver errors") {
  CHECK_THROWS_AS(solve_profile(tilted_jump(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_profile(tilted_jump(), 10.0, -1.0), std::invalid_argument);
  ProfileOptions tight;
  tight.min_step = 0.5;
  tight.initial_step = 0.5;
  CHECK_THROWS_AS(solve_profile(tilted_jump(), 40.0, 1e-14, tight), NumericalError);
  ProfileOptions few;
  few.max_steps = 10;
  CHECK_THROWS_AS(solve_profile(tilted_jump(), 40.0, 1e-10, few), NumericalError);
}

TEST_CASE("tail extension") {
  const ProfileSolution sol = solve_profile(tilted_jump(), 30.0, 1e-10);
  CHECK_THROWS_AS(sol.g_at(31.0), std::out_of_range);
  CHECK(sol.g_at(31.0, true) == doctest::Approx(oracle::logistic(31.0, logistic_rate)).epsilon(1e-6));
  CHECK(sol.g_at(-45.0, true) == doctest::Approx(oracle::logistic(-45.0, logistic_rate)).epsilon(1e-3));
  CHECK(sol.tail_extension_error() < 1e-9);
  // continuity across the span edge
  CHECK(std::abs(sol.g_at(30.0, true) - sol.g_at(30.0)) < 1e-14);
  CHECK(std::abs(sol.antiderivative_at(30.0 + 1e-9, true) - sol.antiderivative_at(30.0)) < 1e-8);
}

TEST_CASE("profile energy examples") {
  const ProfileSolution sol = solve_profile(tilted_jump(), 40.0, 1e-10);
  const double jc = 1.0 / (6.0 * std::sqrt(5.0));
  CHECK(std::abs(profile_energy(sol, 1.0) - jc) < 1e-6);
  const double e1 = profile_energy(sol, 1.0);
  for (double eps : {0.5, 2.0, 0.01}) CHECK(std::abs(profile_energy(sol, eps) - e1) < 1e-9);

  const ProfileSolution cube = solve_profile(JumpStates({1, 1, 1}, {0, 0, 0}), 40.0, 1e-10);
  CHECK(std::abs(profile_energy(cube, 1.0) - 1.0 / (3.0 * std::sqrt(3.0))) < 1e-6);

  CHECK_THROWS_AS(profile_energy(solve_profile(tilted_jump(), 5.0), 1.0), std::domain_error);
  CHECK_THROWS_AS(profile_energy(sol, 0.0), std::invalid_argument);
}

TEST_CASE("property: profile energy equals the layer cost") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 25; ++t) {
    const auto [mp, mm] = oracle::random_compatible(rng);
    const ProfileSolution sol = solve_profile(JumpStates(mp, mm), 100.0, 1e-10);
    const double expected = oracle::layer_cost_by_quadrature(mp, mm);
    CHECK(std::abs(profile_energy(sol, 1.0) - expected) < 1e-6);
    CHECK(std::abs(profile_energy(sol, 0.37) - profile_energy(sol, 1.0)) < 1e-9);
  }
}

TEST_CASE("ansatz gradient tends to the limiting states") {
  const ProfileSolution sol = solve_profile(tilted_jump(), 40.0, 1e-10);
  const Grid3 g = make_cubic_grid(33);
  const double eps = 0.02;
  const ScalarField u = ansatz_field(sol, g, eps);
  const VectorField3 grad = gradient(u);
  const Eigen::Vector3d nu = tilted_jump().nu();
  int below = 0, above = 0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double s = g.coord(n).dot(nu);
    if (s < -0.5) {
      CHECK((grad.at(n) - tilted_jump().m_minus()).cwiseAbs().maxCoeff() < 1e-4);
      ++below;
    } else if (s > 0.5) {
      CHECK((grad.at(n) - tilted_jump().m_plus()).cwiseAbs().maxCoeff() < 1e-4);
      ++above;
    }
  }
  CHECK(below > 0);
  CHECK(above > 0);

  // span too short for this ε and box
  const ProfileSolution short_sol = solve_profile(tilted_jump(), 5.0);
  CHECK_THROWS(ansatz_field(short_sol, g, eps));
  CHECK_NOTHROW(ansatz_field(short_sol, g, eps, AnsatzOptions{true}));
}

TEST_CASE("ansatz saturates the first-order equation") {
  const ProfileSolution sol = solve_profile(symmetric_jump(), 40.0, 1e-10);
  const double eps = 0.05;
  const Grid3 g = make_grid(1601, 5, 5, Box::unit_centered());
  const ScalarField u = ansatz_field(sol, g, eps);
  const EnergyBreakdown e = energy(u, eps);
  CHECK(std::abs(e.compression - e.bending) < 1e-3 * e.compression);
  const BpsVerification v = bps_verify(u, eps, BpsSign::plus);
  CHECK(v.l2_residual / std::sqrt(g.box().volume()) < 1e-3);
}

TEST_CASE("truncated ansatz excess over the jump cost shrinks with ε") {
  const ProfileSolution sol = solve_profile(symmetric_jump(), 40.0, 1e-10);
  const double jc = jump_cost(symmetric_jump());
  const Grid3 g = make_grid(801, 5, 5, Box::unit_centered());
  std::vector<double> excess;
  for (double eps : {0.2, 0.1, 0.05}) {
    const ScalarField u = truncated_ansatz_field(sol, g, eps, CubeTruncation{0.4, 0.1});
    excess.push_back(energy(u, eps).total - jc);
  }
  CHECK(excess[0] > excess[1]);
  CHECK(excess[1] > excess[2]);
  CHECK(excess[2] > -1e-6);
}

TEST_CASE("truncated ansatz is affine on the clamped slabs") {
  const ProfileSolution sol = solve_profile(symmetric_jump(), 40.0, 1e-10);
  const Grid3 g = make_grid(81, 7, 7, Box::unit_centered());
  const ScalarField u = truncated_ansatz_field(sol, g, 0.1, CubeTruncation{0.4, 0.1});
  const VectorField3 grad = gradient(u);
  const Eigen::ArrayXd lap = perp_laplacian(u).values;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double x = g.coord(n).x();
    if (x <= -0.4 - 1e-12) {
      CHECK((grad.at(n) - symmetric_jump().m_minus()).cwiseAbs().maxCoeff() < 1e-11);
      CHECK(std::abs(lap[n]) < 1e-9);
    } else if (x >= 0.4 + 1e-12) {
      CHECK((grad.at(n) - symmetric_jump().m_plus()).cwiseAbs().maxCoeff() < 1e-11);
      CHECK(std::abs(lap[n]) < 1e-9);
    }
  }
}

TEST_CASE("smooth ramp") {
  CHECK(smooth_ramp(0.0) == 0.0);
  CHECK(smooth_ramp(1.0) == 1.0);
  CHECK(smooth_ramp(0.5) == doctest::Approx(0.5));
  CHECK(smooth_ramp(-0.3) == 0.0);
  CHECK(smooth_ramp(1.3) == 1.0);
  double prev = 0.0;
  for (double t = 0.01; t <= 1.0; t += 0.01) {
    CHECK(smooth_ramp(t) >= prev);
    CHECK(smooth_ramp(t) + smooth_ramp(1 - t) == doctest::Approx(1.0));
    prev = smooth_ramp(t);
  }
  // flat to second order at both ends
  const double d = 1e-3;
  CHECK(smooth_ramp(d) < 20 * d * d * d);
  CHECK(1 - smooth_ramp(1 - d) < 20 * d * d * d);
}

TEST_CASE("dislocation examples") {
  DislocationSpec spec;
  const ScalarField u = dislocation_field(spec);
  const Grid3& g = u.grid;
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j) {
      CHECK(std::abs(u(0, j, k)) < 1e-6);
      CHECK(std::abs(u(g.nx() - 1, j, k) - spec.b / 2) < 1e-6);
    }

  DislocationSpec flat = spec;
  flat.b = 0.0;
  CHECK(dislocation_field(flat).values.abs().maxCoeff() == 0.0);

  DislocationSpec bad = spec;
  bad.z_range = {0.0, 1.0};
  CHECK_THROWS_AS(dislocation_field(bad), std::invalid_argument);
  bad.z_range = {0.5, 1.0};
  bad.epsilon = -0.1;
  CHECK_THROWS_AS(dislocation_field(bad), std::invalid_argument);

  DislocationSpec minus = spec;
  minus.sign = BpsSign::minus;
  const ScalarField um = dislocation_field(minus);
  CHECK(um.grid.box().hi.z() == doctest::Approx(-spec.z_range[0]));
  CHECK(std::abs(um(um.grid.nx() - 1, 0, 0) - spec.b / 2) < 1e-6);
  CHECK(std::abs(um(0, 0, 0)) < 1e-6);
}

TEST_CASE("dislocation solves the diffusion and first-order equations") {
  for (BpsSign sign : {BpsSign::plus, BpsSign::minus}) {
    std::vector<double> heat, bps;
    for (int level = 1; level < 4; ++level) {
      DislocationSpec spec;
      spec.sign = sign;
      spec.x_range = {-2.0, 2.0};
      spec.nx = 40 * (1 << level) + 1;
      spec.nz = 14 * (1 << level) + 1;
      const Window interior = [] {
        Window w = Window::interior(0.0);
        w.fraction[0] = {0.1, 0.9};
        w.fraction[2] = {0.1, 0.9};
        return w;
      }();
      const ScalarField s = dislocation_heat_field(spec);
      const Eigen::ArrayXd res =
          first_difference(s.values, s.grid, Axis::z) - spec.epsilon * second_difference(s.values, s.grid, Axis::x);
      const Eigen::ArrayXd w = quadrature_weights(s.grid, interior);
      heat.push_back((res * (w > 0).cast<double>()).abs().maxCoeff());
      bps.push_back(bps_verify(dislocation_field(spec), spec.epsilon, sign, interior).max_residual);
    }
    for (double p : oracle::orders(heat)) CHECK(p >= 1.8);
    for (double p : oracle::orders(bps)) CHECK(p >= 1.8);
  }

  // the ground state passes for either sign
  const Grid3 g = make_cubic_grid(9);
  const ScalarField ground = sample_field(g, [](double x, double y, double z) { return 0.6 * x - 0.8 * y + 0.5 * z; });
  CHECK(bps_verify(ground, 0.3, BpsSign::plus).max_residual < 1e-13);
  CHECK(bps_verify(ground, 0.3, BpsSign::minus).max_residual < 1e-13);
}
