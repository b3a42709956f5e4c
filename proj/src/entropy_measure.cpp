#include "smectic/entropy_measure.hpp"

#include "smectic/smectic_energy.hpp"

#include <Eigen/Geometry>

#include <numbers>
#include <sstream>

namespace smectic {

std::string describe(JumpDefect d) {
  switch (d) {
    case JumpDefect::identical_states: return "m+ equals m-";
    case JumpDefect::plus_state_off_layer_constraint:
      return "m+ violates the layer constraint m3 = |m_perp|^2/2";
    case JumpDefect::minus_state_off_layer_constraint:
      return "m- violates the layer constraint m3 = |m_perp|^2/2";
    case JumpDefect::normal_not_unit: return "nu is not a unit vector";
    case JumpDefect::normal_not_parallel: return "nu is not parallel to m+ - m-";
    case JumpDefect::horizontal_part_vanishes: return "nu has zero horizontal part";
  }
  return "unknown defect";
}

namespace {

double layer_defect(const Eigen::Vector3d& m) { return m.z() - 0.5 * m.head<2>().squaredNorm(); }

std::string vec_str(const Eigen::Vector3d& v) {
  std::ostringstream os;
  os.precision(17);
  os << '(' << v.x() << ", " << v.y() << ", " << v.z() << ')';
  return os.str();
}

}  // namespace

JumpStates::JumpStates(const Eigen::Vector3d& m_plus, const Eigen::Vector3d& m_minus,
                       const Eigen::Vector3d& nu)
    : m_plus_(m_plus), m_minus_(m_minus), nu_(nu) {
  const Eigen::Vector3d p = m_plus - m_minus;
  if (p.norm() == 0.0)
    throw IncompatibleJump(JumpDefect::identical_states, vec_str(m_plus));
  if (const double d = layer_defect(m_plus); std::abs(d) > tolerance)
    throw IncompatibleJump(JumpDefect::plus_state_off_layer_constraint,
                           "residual " + std::to_string(d));
  if (const double d = layer_defect(m_minus); std::abs(d) > tolerance)
    throw IncompatibleJump(JumpDefect::minus_state_off_layer_constraint,
                           "residual " + std::to_string(d));
  if (std::abs(nu.norm() - 1.0) > tolerance)
    throw IncompatibleJump(JumpDefect::normal_not_unit, "|nu| = " + std::to_string(nu.norm()));
  if (const double c = nu.cross(p).norm() / p.norm(); c > tolerance)
    throw IncompatibleJump(JumpDefect::normal_not_parallel, "|nu x p|/|p| = " + std::to_string(c));
  if (nu.head<2>().norm() <= tolerance)
    throw IncompatibleJump(JumpDefect::horizontal_part_vanishes, vec_str(nu));
}

namespace {
Eigen::Vector3d normal_of(const Eigen::Vector3d& m_plus, const Eigen::Vector3d& m_minus) {
  const Eigen::Vector3d p = m_plus - m_minus;
  if (p.norm() == 0.0) throw IncompatibleJump(JumpDefect::identical_states, vec_str(m_plus));
  return p / p.norm();
}
}  // namespace

JumpStates::JumpStates(const Eigen::Vector3d& m_plus, const Eigen::Vector3d& m_minus)
    : JumpStates(m_plus, m_minus, normal_of(m_plus, m_minus)) {}

JumpStates JumpStates::on_layer_constraint(const Eigen::Vector2d& plus_perp,
                                           const Eigen::Vector2d& minus_perp) {
  const Eigen::Vector3d mp(plus_perp.x(), plus_perp.y(), 0.5 * plus_perp.squaredNorm());
  const Eigen::Vector3d mm(minus_perp.x(), minus_perp.y(), 0.5 * minus_perp.squaredNorm());
  return JumpStates(mp, mm);
}

Eigen::Vector3d sigma_frame(const Eigen::Vector3d& m, const Frame& frame) {
  const Eigen::Vector2d xi = frame.xi();
  const Eigen::Vector2d eta = frame.eta();
  const double mx = m.head<2>().dot(xi);
  const double me = m.head<2>().dot(eta);
  const double m3 = m.z();
  const double along_xi = m3 * mx - 0.5 * mx * me * me - mx * mx * mx / 6.0;
  const double along_eta = -m3 * me + 0.5 * me * mx * mx + me * me * me / 6.0;
  Eigen::Vector3d out;
  out.head<2>() = along_xi * xi + along_eta * eta;
  out.z() = 0.5 * (me * me - mx * mx);
  return out;
}

double rotation_combo_check(const Eigen::Vector3d& m, double theta) {
  const Eigen::Vector3d rotated = sigma_frame(m, Frame{theta});
  const Eigen::Vector3d base = sigma_frame(m, Frame{0.0});
  const Eigen::Vector3d diag = sigma_frame(m, Frame{std::numbers::pi / 4.0});
  const Eigen::Vector3d combo = std::cos(2.0 * theta) * base + std::sin(2.0 * theta) * diag;
  return (rotated - combo).cwiseAbs().maxCoeff();
}

namespace {

// ∂²_ξu − ∂²_ηu for ξ = (cosθ, sinθ): (u_xx − u_yy) cos2θ + 2 u_xy sin2θ.
Eigen::ArrayXd rotated_difference(const HessianPerp& h, double theta) {
  return (h.xx - h.yy) * std::cos(2.0 * theta) + 2.0 * h.xy * std::sin(2.0 * theta);
}

}  // namespace

DivSigma div_sigma(const ScalarField& u, const Frame& frame) {
  const VectorField3 grad = gradient(u);
  Eigen::ArrayX3d sigma(u.grid.size(), 3);
  for (std::size_t n = 0; n < u.grid.size(); ++n)
    sigma.row(n) = sigma_frame(grad.at(n), frame).transpose().array();
  ScalarField stencil = divergence(VectorField3(u.grid, std::move(sigma)));

  const Eigen::ArrayXd r = compression_residual(grad).values;
  ScalarField product(u.grid, r * rotated_difference(perp_hessian(u), frame.theta));
  return {std::move(stencil), std::move(product)};
}

ScalarField entropy_density_eig(const ScalarField& u) {
  const HessianPerp h = perp_hessian(u);
  const Eigen::ArrayXd gap = ((h.xx - h.yy).square() + 4.0 * h.xy.square()).sqrt();
  return {u.grid, compression_residual(u).values.abs() * gap};
}

ScalarField entropy_sup_rotations(const ScalarField& u, int n_theta) {
  if (n_theta < 2)
    throw std::invalid_argument("entropy_sup_rotations: n_theta must be at least 2");
  const HessianPerp h = perp_hessian(u);
  const Eigen::ArrayXd r = compression_residual(u).values.abs();
  Eigen::ArrayXd best = Eigen::ArrayXd::Zero(u.grid.size());
  for (int k = 0; k < n_theta; ++k) {
    const double theta = std::numbers::pi * k / n_theta;
    best = best.max(r * rotated_difference(h, theta).abs());
  }
  return {u.grid, std::move(best)};
}

double jump_cost(const JumpStates& j) {
  const Eigen::Vector3d p = j.jump();
  return std::pow(p.head<2>().norm(), 4) / (12.0 * p.norm());
}

double frame_cost(const JumpStates& j, const Frame& frame) {
  const Eigen::Vector3d p = j.jump();
  const double dxi = p.head<2>().dot(frame.xi());
  const double deta = p.head<2>().dot(frame.eta());
  return std::abs(std::pow(dxi, 4) - std::pow(deta, 4)) / (12.0 * p.norm());
}

double frame_cost_direct(const JumpStates& j, const Frame& frame) {
  return std::abs((sigma_frame(j.m_plus(), frame) - sigma_frame(j.m_minus(), frame)).dot(j.nu()));
}

}  // namespace smectic
