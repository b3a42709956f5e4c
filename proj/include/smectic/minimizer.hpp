#pragma once

#include "smectic/bps_profile.hpp"
#include "smectic/entropy_measure.hpp"
#include "smectic/grid_field.hpp"
#include "smectic/smectic_energy.hpp"

#include <optional>
#include <string>
#include <vector>

namespace smectic {

/// Nodes frozen during descent.
struct ClampMask {
  Grid3 grid;
  Eigen::Array<bool, Eigen::Dynamic, 1> frozen;

  static ClampMask none(const Grid3& grid) {
    return {grid, Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(grid.size(), false)};
  }
  std::size_t count() const { return static_cast<std::size_t>(frozen.count()); }
};

/// Half-width of `box` measured along the unit vector `normal` from its center.
double support_half_width(const Box& box, const Eigen::Vector3d& normal);

/// Freezes nodes with |ν̂·(x − c)| ≥ (1 − 2·slab)·w, w the support half-width
/// along ν̂: two slabs of thickness `slab` (as a fraction of the width) at the
/// faces the jump normal points to.
ClampMask slab_clamp(const Grid3& grid, const Eigen::Vector3d& normal, double slab);

/// Adds the outermost `layers` node layers of every face to the mask.
ClampMask pin_boundary_layers(const ClampMask& mask, int layers);

/// Area of the plane through the box center with the given normal, clipped to the box.
double jump_plane_area(const Box& box, const Eigen::Vector3d& normal);

/// Reporting window for the cube experiment: along a grid-aligned normal the
/// outer half of each slab is dropped; otherwise the full box.
Window cube_window(const Eigen::Vector3d& normal, double slab);

/// Gradient of the discrete window energy with respect to node values
/// (adjoint of the stencils used by energy()), zeroed on frozen nodes.
ScalarField energy_gradient(const ScalarField& u, double epsilon, const ClampMask& mask,
                            const Window& region = Window::full());

enum class StepRule { fixed, backtracking };
enum class InitialCondition { ansatz, affine_blend, provided };
enum class Termination {
  gradient_tolerance,
  max_iterations,
  line_search_exhausted,
  non_descent,
};

std::string to_string(StepRule r);
std::string to_string(InitialCondition c);
std::string to_string(Termination t);

struct MinimizeConfig {
  double epsilon = 0.1;
  int max_iters = 200;
  StepRule step_rule = StepRule::backtracking;
  /// Fixed step, or the first trial step for backtracking.
  double step = 1e-6;
  double armijo = 1e-4;
  int max_backtracks = 60;
  double grad_tol = 1e-8;
  /// Slab thickness as a fraction of the box width along the jump normal.
  double slab = 0.1;
  /// Width of the ramp that blends the profile into the slabs.
  double blend = 0.1;
  /// Boundary node layers on every face held at their initial values. Four
  /// layers cover the reach of the adjoint stencils, so a tangentially
  /// invariant start keeps a tangentially invariant gradient.
  int pinned_face_layers = 4;
  std::optional<Window> window;
  InitialCondition init = InitialCondition::ansatz;
  double profile_t_max = 40.0;
  double profile_tol = 1e-10;
};

struct TrajectoryPoint {
  int iter = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct DescentResult {
  ScalarField field;
  std::vector<TrajectoryPoint> trajectory;
  int iterations = 0;
  Termination termination = Termination::max_iterations;
};

/// Preconditioned steepest descent on the window energy; frozen nodes are
/// never written.
DescentResult descend(const ScalarField& u0, const ClampMask& mask, const Window& region,
                      const MinimizeConfig& cfg);

struct MinimizeReport {
  std::vector<TrajectoryPoint> trajectory;
  EnergyBreakdown initial;
  EnergyBreakdown final_energy;
  double equipartition_gap = 0.0;
  double jump_area = 0.0;
  double lower_bound = 0.0;  ///< jump_cost × jump-plane area
  double upper_bound = 0.0;  ///< window energy of the ε-matched truncated ansatz
  double lower_bound_slack = 0.0;  ///< final − lower_bound (negative means below)
  int iterations = 0;
  Termination termination = Termination::max_iterations;
  ScalarField field;
};

/// The truncated profile used both as default start and as upper bound.
ScalarField cube_ansatz(const JumpStates& j, const Grid3& grid, const MinimizeConfig& cfg);
/// Profile replaced by a quintic ramp over the free region.
ScalarField cube_affine_blend(const JumpStates& j, const Grid3& grid, const MinimizeConfig& cfg);

/// Throws std::invalid_argument unless u0 is affine with gradient m⁻ / m⁺ on
/// the two slabs.
void check_clamp_data(const ScalarField& u0, const ClampMask& mask, const JumpStates& j);

MinimizeReport minimize(const ScalarField& u0, const MinimizeConfig& cfg, const JumpStates& j);

struct CompactnessReport {
  std::vector<double> exponents;
  std::vector<double> grad_lp;  ///< ‖∇u‖_{L^p} per exponent
  double curl_x_l2 = 0.0;       ///< ‖∂_z∂_x u − ∂_x(½|∇⊥u|²)‖_{L²}
  double curl_y_l2 = 0.0;
  double div_b_l1 = 0.0;
  double compression_l2 = 0.0;  ///< ‖R‖_{L²}, bounds the curl residuals in H⁻¹
  double laplacian_sign_fraction = 0.0;  ///< share of nodes with Δ⊥u ≥ 0
};

CompactnessReport compactness_diagnostics(const ScalarField& u, const std::vector<double>& ps,
                                          const Window& region = Window::full());

}  // namespace smectic
