#pragma once

#include "smectic/entropy_measure.hpp"
#include "smectic/grid_field.hpp"
#include "smectic/smectic_energy.hpp"

#include <array>
#include <optional>
#include <vector>

namespace smectic {

/// g' = |g p₃ + m₃⁻ − (g p₁ + m₁⁻)²/2 − (g p₂ + m₂⁻)²/2| / |p⊥·ν⊥|, p = m⁺ − m⁻.
double profile_rhs(double g, const JumpStates& j);

struct ProfileOptions {
  double max_step = 0.05;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  std::size_t max_steps = 1'000'000;
};

/// Sampled transition profile on [−t_max, t_max] with g(0) = ½.
struct ProfileSolution {
  JumpStates j;
  std::vector<double> ts;
  std::vector<double> gs;
  /// Distance to the nearer limit without cancellation: g for t < 0, 1 − g for t ≥ 0.
  std::vector<double> tails;
  std::vector<double> dgs;
  /// G(t) = ∫₀ᵗ g.
  std::vector<double> antiderivative;
  double decay_plus = 0.0;
  double decay_minus = 0.0;
  double fit_r2_plus = 0.0;
  double fit_r2_minus = 0.0;
  double denom = 0.0;  ///< |p⊥·ν⊥|

  double t_min() const { return ts.front(); }
  double t_max() const { return ts.back(); }

  /// Profile value; outside the sampled span the fitted exponential tails are
  /// used when `extend` is set, otherwise an error is raised.
  double g_at(double t, bool extend = false) const;
  double antiderivative_at(double t, bool extend = false) const;
  /// Largest deviation of the exponential tail extension from the samples
  /// over the fitted windows.
  double tail_extension_error() const;
};

ProfileSolution solve_profile(const JumpStates& j, double t_max = 40.0, double tol = 1e-10,
                              const ProfileOptions& options = {});

/// Energy per unit jump area of the one-dimensional ansatz built from `sol`,
/// integrated in the physical normal coordinate at scale ε.
double profile_energy(const ProfileSolution& sol, double epsilon);

struct AnsatzOptions {
  bool extend_tails = false;
};

/// u(x) = ε|p| G(x·ν̂/ε) + m⁻·x with ν̂ = (m⁺ − m⁻)/|m⁺ − m⁻|.
ScalarField ansatz_field(const ProfileSolution& sol, const Grid3& grid, double epsilon,
                         const AnsatzOptions& options = {});

/// Truncation of the ansatz to exact affine data beyond |x·ν̂| ≥ clamp_start:
/// g is blended to its limits over [clamp_start − blend_width, clamp_start]
/// with a C² quintic ramp.
struct CubeTruncation {
  double clamp_start = 0.4;
  double blend_width = 0.1;
};

ScalarField truncated_ansatz_field(const ProfileSolution& sol, const Grid3& grid,
                                   double epsilon, const CubeTruncation& trunc);

/// Quintic smoothstep, C² on [0, 1].
double smooth_ramp(double tau);

struct DislocationSpec {
  double b = 0.5;
  double epsilon = 0.2;
  BpsSign sign = BpsSign::plus;
  std::array<double, 2> x_range{-8.0, 8.0};
  /// Depth range; must be strictly positive. For `minus` the field lives at z = −depth.
  std::array<double, 2> z_range{0.5, 4.0};
  int nx = 161;
  int nz = 29;
  int ny = 3;
  std::array<double, 2> y_range{-0.5, 0.5};
};

/// Grid carrying the dislocation field (z mirrored for the minus branch).
Grid3 dislocation_grid(const DislocationSpec& spec);

/// Edge-dislocation layer displacement, constant in y.
ScalarField dislocation_field(const DislocationSpec& spec);

/// The diffusion-equation solution S(x, depth) on the depth grid.
ScalarField dislocation_heat_field(const DislocationSpec& spec);

struct BpsVerification {
  double max_residual = 0.0;
  double l2_residual = 0.0;
};

BpsVerification bps_verify(const ScalarField& u, double epsilon, BpsSign sign,
                           const Window& window = Window::full());

}  // namespace smectic
