#include "smectic/smectic_energy.hpp"

#include <array>

namespace smectic {

namespace {

void require_positive_epsilon(double epsilon, const char* where) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument(std::string(where) + ": epsilon must be positive, got " +
                                std::to_string(epsilon));
}

Eigen::ArrayXd perp_norm2(const VectorField3& grad) {
  return grad.values.col(0).square() + grad.values.col(1).square();
}

// Tangential gradient of |∇⊥u|² by the chain rule through the Hessian.
std::array<Eigen::ArrayXd, 2> perp_grad_of_norm2(const VectorField3& grad,
                                                 const HessianPerp& hess) {
  const auto ux = grad.values.col(0), uy = grad.values.col(1);
  return {2.0 * (ux * hess.xx + uy * hess.xy), 2.0 * (ux * hess.xy + uy * hess.yy)};
}

}  // namespace

ScalarField compression_residual(const VectorField3& grad) {
  return {grad.grid, grad.values.col(2) - 0.5 * perp_norm2(grad)};
}

ScalarField compression_residual(const ScalarField& u) {
  return compression_residual(gradient(u));
}

ScalarField gauss_curvature(const ScalarField& u) {
  const HessianPerp hess = perp_hessian(u);
  return {u.grid, hess.xx * hess.yy - hess.xy.square()};
}

EnergyBreakdown energy(const ScalarField& u, double epsilon, const Window& region) {
  require_positive_epsilon(epsilon, "energy");
  const Eigen::ArrayXd w = quadrature_weights(u.grid, region);
  const Eigen::ArrayXd r = compression_residual(u).values;
  const Eigen::ArrayXd lap = perp_laplacian(u).values;

  EnergyBreakdown out;
  out.epsilon = epsilon;
  out.region = region;
  out.compression = weighted_sum(w, r.square()) / (2.0 * epsilon);
  out.bending = 0.5 * epsilon * weighted_sum(w, lap.square());
  out.total = out.compression + out.bending;
  out.curvature_integral = weighted_sum(w, gauss_curvature(u).values);
  return out;
}

CurvatureFluxCheck curvature_flux_check(const ScalarField& u) {
  const VectorField3 grad = gradient(u);
  const Eigen::ArrayXd lap = perp_laplacian(u).values;
  const auto grad_q = perp_grad_of_norm2(grad, perp_hessian(u));

  Eigen::ArrayX3d flux = Eigen::ArrayX3d::Zero(u.grid.size(), 3);
  for (int c = 0; c < 2; ++c)
    flux.col(c) = 0.5 * (grad.values.col(c) * lap - 0.5 * grad_q[c]);

  CurvatureFluxCheck out;
  out.volume_integral = integrate(gauss_curvature(u));
  out.flux_integral = boundary_flux(VectorField3(u.grid, std::move(flux)));
  out.mismatch = std::abs(out.volume_integral - out.flux_integral);
  return out;
}

ScalarField bps_residual(const ScalarField& u, double epsilon, BpsSign sign) {
  require_positive_epsilon(epsilon, "bps_residual");
  return {u.grid, compression_residual(u).values -
                      to_double(sign) * epsilon * perp_laplacian(u).values};
}

double equipartition_gap(const ScalarField& u, double epsilon, const Window& region) {
  require_positive_epsilon(epsilon, "equipartition_gap");
  const Eigen::ArrayXd w = quadrature_weights(u.grid, region);
  const double comp = weighted_sum(w, compression_residual(u).values.square()) / epsilon;
  const double bend = epsilon * weighted_sum(w, perp_laplacian(u).values.square());
  return std::abs(comp - bend);
}

VectorField3 bps_flux_field(const ScalarField& u) {
  const VectorField3 grad = gradient(u);
  const Eigen::ArrayXd q = perp_norm2(grad);
  const HessianPerp hess = perp_hessian(u);
  const Eigen::ArrayXd lap = hess.xx + hess.yy;
  const auto grad_q = perp_grad_of_norm2(grad, hess);

  const Eigen::ArrayXd coeff = grad.values.col(2) - q / 6.0 - u.values * lap / 3.0;
  Eigen::ArrayX3d xi(u.grid.size(), 3);
  for (int c = 0; c < 2; ++c)
    xi.col(c) = coeff * grad.values.col(c) + u.values * grad_q[c] / 6.0;
  xi.col(2) = -0.5 * q;
  return {u.grid, std::move(xi)};
}

BpsDecomposition bps_decomposition(const ScalarField& u, double epsilon, BpsSign sign) {
  require_positive_epsilon(epsilon, "bps_decomposition");
  const double s = to_double(sign);
  const Eigen::ArrayXd w = quadrature_weights(u.grid);
  const Eigen::ArrayXd residual = bps_residual(u, epsilon, sign).values;

  BpsDecomposition out;
  out.sign = sign;
  out.square_term = weighted_sum(w, residual.square()) / (2.0 * epsilon);
  out.curvature_term = s * (2.0 / 3.0) * weighted_sum(w, gauss_curvature(u).values * u.values);
  out.flux_term = s * boundary_flux(bps_flux_field(u));
  out.reconstructed_total = out.square_term + out.curvature_term + out.flux_term;
  return out;
}

}  // namespace smectic
