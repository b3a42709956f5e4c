#pragma once

#include "smectic/grid_field.hpp"

namespace smectic {

/// Selects the branch of the first-order equation R = ±εΔ⊥u. `plus` picks
/// the upper signs of the square-completion identity.
enum class BpsSign : int { plus = 1, minus = -1 };

inline double to_double(BpsSign s) { return static_cast<int>(s); }

struct EnergyBreakdown {
  double epsilon = 0.0;
  double compression = 0.0;  ///< (1/2ε) ∫ R²
  double bending = 0.0;      ///< (ε/2) ∫ (Δ⊥u)²
  double total = 0.0;
  double curvature_integral = 0.0;  ///< ∫ K̄
  Window region;
};

struct BpsDecomposition {
  BpsSign sign = BpsSign::plus;
  double square_term = 0.0;     ///< (1/2ε) ∫ (R ∓ εΔ⊥u)²
  double curvature_term = 0.0;  ///< ±(2/3) ∫ K̄ u
  double flux_term = 0.0;       ///< ± ∮ Ξ(u)·n
  double reconstructed_total = 0.0;
};

struct CurvatureFluxCheck {
  double volume_integral = 0.0;
  double flux_integral = 0.0;
  double mismatch = 0.0;
};

/// R = ∂_z u − ½|∇⊥u|², nodewise.
ScalarField compression_residual(const ScalarField& u);
ScalarField compression_residual(const VectorField3& grad);

EnergyBreakdown energy(const ScalarField& u, double epsilon,
                       const Window& region = Window::full());

/// Approximate Gaussian curvature K̄ = det ∇²⊥u.
ScalarField gauss_curvature(const ScalarField& u);

/// ∫K̄ against the boundary flux of ½(∇⊥u Δ⊥u − ½∇⊥|∇⊥u|², 0).
CurvatureFluxCheck curvature_flux_check(const ScalarField& u);

ScalarField bps_residual(const ScalarField& u, double epsilon, BpsSign sign);

/// |(1/ε)∫R² − ε∫(Δ⊥u)²|
double equipartition_gap(const ScalarField& u, double epsilon,
                         const Window& region = Window::full());

/// The calibration field Ξ(u) whose divergence carries the cross term.
VectorField3 bps_flux_field(const ScalarField& u);

BpsDecomposition bps_decomposition(const ScalarField& u, double epsilon, BpsSign sign);

}  // namespace smectic
