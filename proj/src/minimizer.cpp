#include "smectic/minimizer.hpp"

#include "smectic/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace smectic {

std::string to_string(StepRule r) {
  return r == StepRule::fixed ? "fixed" : "backtracking";
}

std::string to_string(InitialCondition c) {
  switch (c) {
    case InitialCondition::ansatz: return "ansatz";
    case InitialCondition::affine_blend: return "affine-blend";
    case InitialCondition::provided: return "provided";
  }
  return "unknown";
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::gradient_tolerance: return "gradient_tolerance";
    case Termination::max_iterations: return "max_iterations";
    case Termination::line_search_exhausted: return "line_search_exhausted";
    case Termination::non_descent: return "non_descent";
  }
  return "unknown";
}

double support_half_width(const Box& box, const Eigen::Vector3d& normal) {
  return 0.5 * normal.cwiseAbs().dot(box.extent());
}

namespace {

Eigen::Vector3d unit(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw std::invalid_argument("normal must be nonzero");
  return v / n;
}

double clamp_start(const Box& box, const Eigen::Vector3d& nu, double slab) {
  return (1.0 - 2.0 * slab) * support_half_width(box, nu);
}

std::optional<int> aligned_axis(const Eigen::Vector3d& nu) {
  for (int a = 0; a < 3; ++a)
    if (std::abs(std::abs(nu[a]) - 1.0) < 1e-12) return a;
  return std::nullopt;
}

void check_slab(double slab) {
  if (!(slab > 0.0 && slab < 0.5))
    throw std::invalid_argument("slab fraction must lie in (0, 1/2)");
}

}  // namespace

ClampMask slab_clamp(const Grid3& grid, const Eigen::Vector3d& normal, double slab) {
  check_slab(slab);
  const Eigen::Vector3d nu = unit(normal);
  const double c = clamp_start(grid.box(), nu, slab);
  const Eigen::Vector3d center = grid.box().center();
  ClampMask mask = ClampMask::none(grid);
  for (std::size_t n = 0; n < grid.size(); ++n)
    mask.frozen[n] = std::abs(nu.dot(grid.coord(n) - center)) >= c - 1e-12;
  return mask;
}

ClampMask pin_boundary_layers(const ClampMask& mask, int layers) {
  if (layers < 0) throw std::invalid_argument("pinned face layers must be nonnegative");
  ClampMask out = mask;
  const Grid3& g = mask.grid;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto idx = g.ijk(n);
    for (int a = 0; a < 3; ++a)
      if (idx[a] < layers || idx[a] >= g.counts()[a] - layers) out.frozen[n] = true;
  }
  return out;
}

double jump_plane_area(const Box& box, const Eigen::Vector3d& normal) {
  const Eigen::Vector3d nu = unit(normal);
  const Eigen::Vector3d center = box.center();
  std::array<Eigen::Vector3d, 8> corners;
  for (int c = 0; c < 8; ++c)
    for (int a = 0; a < 3; ++a) corners[c][a] = (c >> a) & 1 ? box.hi[a] : box.lo[a];

  std::vector<Eigen::Vector3d> pts;
  for (int c = 0; c < 8; ++c)
    for (int a = 0; a < 3; ++a) {
      const int d = c | (1 << a);
      if (d == c) continue;
      const double f0 = nu.dot(corners[c] - center);
      const double f1 = nu.dot(corners[d] - center);
      if ((f0 < 0.0) == (f1 < 0.0) && f0 != 0.0 && f1 != 0.0) continue;
      if (f0 == f1) continue;  // edge lies in the plane; its endpoints appear elsewhere
      pts.push_back(corners[c] + (f0 / (f0 - f1)) * (corners[d] - corners[c]));
    }
  if (pts.size() < 3) return 0.0;

  Eigen::Vector3d mid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) mid += p;
  mid /= static_cast<double>(pts.size());
  const Eigen::Vector3d e1 = nu.unitOrthogonal();
  const Eigen::Vector3d e2 = nu.cross(e1);
  std::sort(pts.begin(), pts.end(), [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    return std::atan2((a - mid).dot(e2), (a - mid).dot(e1)) <
           std::atan2((b - mid).dot(e2), (b - mid).dot(e1));
  });
  double area2 = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Eigen::Vector3d& a = pts[i];
    const Eigen::Vector3d& b = pts[(i + 1) % pts.size()];
    area2 += (a - mid).cross(b - mid).dot(nu);
  }
  return 0.5 * std::abs(area2);
}

Window cube_window(const Eigen::Vector3d& normal, double slab) {
  check_slab(slab);
  if (const auto a = aligned_axis(unit(normal)))
    return Window::along(static_cast<Axis>(*a), 0.5 * slab, 1.0 - 0.5 * slab);
  return Window::full();
}

ScalarField energy_gradient(const ScalarField& u, double epsilon, const ClampMask& mask,
                            const Window& region) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("energy_gradient: epsilon must be positive");
  if (!(mask.grid == u.grid)) throw std::invalid_argument("energy_gradient: mask grid mismatch");
  const Grid3& g = u.grid;
  const Eigen::ArrayXd w = quadrature_weights(g, region);
  const Eigen::ArrayXd ux = first_difference(u.values, g, Axis::x);
  const Eigen::ArrayXd uy = first_difference(u.values, g, Axis::y);
  const Eigen::ArrayXd uz = first_difference(u.values, g, Axis::z);
  const Eigen::ArrayXd r = uz - 0.5 * (ux.square() + uy.square());
  const Eigen::ArrayXd lap =
      second_difference(u.values, g, Axis::x) + second_difference(u.values, g, Axis::y);

  const Eigen::ArrayXd a = w * r / epsilon;
  const Eigen::ArrayXd b = epsilon * w * lap;
  Eigen::ArrayXd grad = first_difference_adjoint(a, g, Axis::z) -
                        first_difference_adjoint(a * ux, g, Axis::x) -
                        first_difference_adjoint(a * uy, g, Axis::y) +
                        second_difference_adjoint(b, g, Axis::x) +
                        second_difference_adjoint(b, g, Axis::y);
  grad = mask.frozen.select(0.0, grad);
  return {g, std::move(grad)};
}

DescentResult descend(const ScalarField& u0, const ClampMask& mask, const Window& region,
                      const MinimizeConfig& cfg) {
  if (!(cfg.step > 0.0)) throw std::invalid_argument("minimize: step must be positive");
  if (!(cfg.grad_tol > 0.0)) throw std::invalid_argument("minimize: grad_tol must be positive");
  if (!(cfg.armijo > 0.0 && cfg.armijo < 1.0))
    throw std::invalid_argument("minimize: armijo constant must lie in (0, 1)");

  const Grid3& grid = u0.grid;
  const Eigen::ArrayXd w = quadrature_weights(grid, region);
  // Free nodes outside the window still need a finite metric weight.
  const double w_floor = (w > 0.0).select(w, w.maxCoeff()).minCoeff();
  const Eigen::ArrayXd metric = (w > 0.0).select(w, w_floor);

  auto total = [&](const Eigen::ArrayXd& v) {
    return energy(ScalarField(grid, v), cfg.epsilon, region).total;
  };

  DescentResult out{u0, {}, 0, Termination::max_iterations};
  Eigen::ArrayXd u = u0.values;
  double e = total(u);
  double step = cfg.step;
  double last_step = 0.0;

  for (int it = 0;; ++it) {
    const Eigen::ArrayXd grad =
        energy_gradient(ScalarField(grid, u), cfg.epsilon, mask, region).values;
    const Eigen::ArrayXd dir = -grad / metric;
    const double slope = (grad * dir).sum();
    const double gnorm = std::sqrt(-slope);
    out.trajectory.push_back({it, e, gnorm, last_step});

    if (gnorm <= cfg.grad_tol) {
      out.termination = Termination::gradient_tolerance;
      break;
    }
    if (it >= cfg.max_iters) {
      out.termination = Termination::max_iterations;
      break;
    }

    Eigen::ArrayXd trial;
    double e_trial = e;
    bool accepted = false;
    if (cfg.step_rule == StepRule::fixed) {
      trial = mask.frozen.select(u, u + step * dir);
      e_trial = total(trial);
      accepted = e_trial < e;
      if (!accepted) out.termination = Termination::non_descent;
    } else {
      for (int k = 0; k <= cfg.max_backtracks && !accepted; ++k) {
        trial = mask.frozen.select(u, u + step * dir);
        e_trial = total(trial);
        accepted = e_trial < e && e_trial <= e + cfg.armijo * step * slope;
        if (!accepted) step *= 0.5;
      }
      if (!accepted) out.termination = Termination::line_search_exhausted;
    }
    if (!accepted) break;

    u = std::move(trial);
    e = e_trial;
    last_step = step;
    out.iterations = it + 1;
    if (cfg.step_rule == StepRule::backtracking) step *= 2.0;
  }
  out.field = ScalarField(grid, std::move(u));
  return out;
}

ScalarField cube_ansatz(const JumpStates& j, const Grid3& grid, const MinimizeConfig& cfg) {
  check_slab(cfg.slab);
  const Eigen::Vector3d nu = j.oriented_normal();
  const double width = 2.0 * support_half_width(grid.box(), nu);
  const ProfileSolution sol = solve_profile(j, cfg.profile_t_max, cfg.profile_tol);
  CubeTruncation trunc{clamp_start(grid.box(), nu, cfg.slab), cfg.blend * width};
  // Coordinates relative to the box center so the jump plane sits in the middle.
  const Box centered{grid.box().lo - grid.box().center(), grid.box().hi - grid.box().center()};
  const Grid3 local(grid.nx(), grid.ny(), grid.nz(), centered);
  ScalarField u = truncated_ansatz_field(sol, local, cfg.epsilon, trunc);
  return {grid, std::move(u.values)};
}

namespace {

// ∫ of the quintic smoothstep: t⁶ − 3t⁵ + 5t⁴/2.
double ramp_integral(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * t * (t * (t - 3.0) + 2.5);
}

}  // namespace

ScalarField cube_affine_blend(const JumpStates& j, const Grid3& grid,
                              const MinimizeConfig& cfg) {
  check_slab(cfg.slab);
  const Eigen::Vector3d nu = j.oriented_normal();
  const Eigen::Vector3d p = j.jump();
  const Eigen::Vector3d& mm = j.m_minus();
  const double c = clamp_start(grid.box(), nu, cfg.slab);
  const Eigen::Vector3d center = grid.box().center();
  auto profile_integral = [c](double s) {
    const double t = (s + c) / (2.0 * c);
    const double base = 2.0 * c * (ramp_integral(t) - ramp_integral(0.5));
    return s > c ? base + (s - c) : base;
  };
  const double amp = p.norm();
  Eigen::ArrayXd v(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Eigen::Vector3d x = grid.coord(n) - center;
    v[n] = amp * profile_integral(nu.dot(x)) + mm.dot(x);
  }
  return {grid, std::move(v)};
}

void check_clamp_data(const ScalarField& u0, const ClampMask& mask, const JumpStates& j) {
  const Grid3& grid = u0.grid;
  const Eigen::Vector3d nu = j.oriented_normal();
  const Eigen::Vector3d center = grid.box().center();
  std::array<std::optional<double>, 2> offset;
  const double scale = 1.0 + u0.values.abs().maxCoeff();
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (!mask.frozen[n]) continue;
    const Eigen::Vector3d x = grid.coord(n);
    const bool plus = nu.dot(x - center) > 0.0;
    const double rest = u0.values[n] - (plus ? j.m_plus() : j.m_minus()).dot(x);
    auto& ref = offset[plus ? 1 : 0];
    if (!ref) ref = rest;
    if (std::abs(rest - *ref) > 1e-9 * scale) {
      std::ostringstream msg;
      const auto [i, jj, k] = grid.ijk(n);
      msg << "initial field does not match the affine clamp data on the "
          << (plus ? "m+" : "m-") << " slab at node (" << i << ',' << jj << ',' << k
          << "): offset " << rest << " vs " << *ref;
      throw std::invalid_argument(msg.str());
    }
  }
}

MinimizeReport minimize(const ScalarField& u0, const MinimizeConfig& cfg, const JumpStates& j) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("minimize: epsilon must be positive");
  const Grid3& grid = u0.grid;
  const Eigen::Vector3d nu = j.oriented_normal();
  const ClampMask slabs = slab_clamp(grid, nu, cfg.slab);
  check_clamp_data(u0, slabs, j);
  const ClampMask mask = pin_boundary_layers(slabs, cfg.pinned_face_layers);
  const Window region = cfg.window.value_or(cube_window(nu, cfg.slab));

  DescentResult run = descend(u0, mask, region, cfg);

  const EnergyBreakdown initial = energy(u0, cfg.epsilon, region);
  const EnergyBreakdown final_energy = energy(run.field, cfg.epsilon, region);
  const double area = jump_plane_area(grid.box(), nu);
  const double lower = jump_cost(j) * area;
  MinimizeReport rep{std::move(run.trajectory),
                     initial,
                     final_energy,
                     equipartition_gap(run.field, cfg.epsilon, region),
                     area,
                     lower,
                     energy(cube_ansatz(j, grid, cfg), cfg.epsilon, region).total,
                     final_energy.total - lower,
                     run.iterations,
                     run.termination,
                     std::move(run.field)};
  return rep;
}

CompactnessReport compactness_diagnostics(const ScalarField& u, const std::vector<double>& ps,
                                          const Window& region) {
  for (double p : ps)
    if (!(p >= 1.0)) throw std::invalid_argument("compactness_diagnostics: exponents must be >= 1");
  const Grid3& g = u.grid;
  const Eigen::ArrayXd w = quadrature_weights(g, region);
  const Eigen::ArrayXd ux = first_difference(u.values, g, Axis::x);
  const Eigen::ArrayXd uy = first_difference(u.values, g, Axis::y);
  const Eigen::ArrayXd uz = first_difference(u.values, g, Axis::z);
  const Eigen::ArrayXd half_q = 0.5 * (ux.square() + uy.square());
  const Eigen::ArrayXd grad_mag = (ux.square() + uy.square() + uz.square()).sqrt();

  CompactnessReport rep;
  rep.exponents = ps;
  for (double p : ps) rep.grad_lp.push_back(std::pow(weighted_sum(w, grad_mag.pow(p)), 1.0 / p));

  const Eigen::ArrayXd curl_x =
      first_difference(ux, g, Axis::z) - first_difference(half_q, g, Axis::x);
  const Eigen::ArrayXd curl_y =
      first_difference(uy, g, Axis::z) - first_difference(half_q, g, Axis::y);
  rep.curl_x_l2 = std::sqrt(weighted_sum(w, curl_x.square()));
  rep.curl_y_l2 = std::sqrt(weighted_sum(w, curl_y.square()));

  const Eigen::ArrayXd div_b = -first_difference(half_q * ux, g, Axis::x) -
                               first_difference(half_q * uy, g, Axis::y) +
                               first_difference(half_q, g, Axis::z);
  rep.div_b_l1 = weighted_sum(w, div_b.abs());
  rep.compression_l2 = std::sqrt(weighted_sum(w, (uz - half_q).square()));

  const Eigen::ArrayXd lap = perp_laplacian(u).values;
  std::size_t inside = 0, nonneg = 0;
  for (Eigen::Index n = 0; n < lap.size(); ++n)
    if (w[n] > 0.0) {
      ++inside;
      nonneg += lap[n] >= 0.0;
    }
  rep.laplacian_sign_fraction = inside ? static_cast<double>(nonneg) / inside : 0.0;
  return rep;
}

}  // namespace smectic
