#pragma once

#include "smectic/grid_field.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace smectic {

/// Positively oriented orthonormal frame {ξ, η} of the horizontal plane.
struct Frame {
  double theta = 0.0;

  Eigen::Vector2d xi() const { return {std::cos(theta), std::sin(theta)}; }
  Eigen::Vector2d eta() const { return {-std::sin(theta), std::cos(theta)}; }
};

enum class JumpDefect {
  identical_states,
  plus_state_off_layer_constraint,   ///< m₃⁺ ≠ ½|m⊥⁺|²
  minus_state_off_layer_constraint,  ///< m₃⁻ ≠ ½|m⊥⁻|²
  normal_not_unit,
  normal_not_parallel,               ///< ν ∦ m⁺ − m⁻
  horizontal_part_vanishes,          ///< ν⊥ = 0
};

std::string describe(JumpDefect d);

class IncompatibleJump : public std::invalid_argument {
 public:
  IncompatibleJump(JumpDefect defect, const std::string& detail)
      : std::invalid_argument("incompatible jump states: " + describe(defect) + " (" +
                              detail + ")"),
        defect_(defect) {}
  JumpDefect defect() const { return defect_; }

 private:
  JumpDefect defect_;
};

/// A compatible pair of limiting gradients across a planar jump with normal ν.
class JumpStates {
 public:
  static constexpr double tolerance = 1e-12;

  JumpStates(const Eigen::Vector3d& m_plus, const Eigen::Vector3d& m_minus,
             const Eigen::Vector3d& nu);
  /// ν taken as (m⁺ − m⁻)/|m⁺ − m⁻|.
  JumpStates(const Eigen::Vector3d& m_plus, const Eigen::Vector3d& m_minus);

  /// Builds states from their horizontal parts, filling m₃ = ½|m⊥|².
  static JumpStates on_layer_constraint(const Eigen::Vector2d& plus_perp,
                                        const Eigen::Vector2d& minus_perp);

  const Eigen::Vector3d& m_plus() const { return m_plus_; }
  const Eigen::Vector3d& m_minus() const { return m_minus_; }
  const Eigen::Vector3d& nu() const { return nu_; }
  Eigen::Vector3d jump() const { return m_plus_ - m_minus_; }
  /// Unit normal oriented from the m⁻ side to the m⁺ side.
  Eigen::Vector3d oriented_normal() const { return jump().normalized(); }

 private:
  Eigen::Vector3d m_plus_;
  Eigen::Vector3d m_minus_;
  Eigen::Vector3d nu_;
};

/// Rotated entropy Σ_ξη(m) in Cartesian components.
Eigen::Vector3d sigma_frame(const Eigen::Vector3d& m, const Frame& frame);

/// Max-norm deviation of Σ_ξη from cos2θ Σ_{e1e2} + sin2θ Σ_{ε1ε2}.
double rotation_combo_check(const Eigen::Vector3d& m, double theta);

struct DivSigma {
  ScalarField stencil_divergence;
  ScalarField product_form;
};

DivSigma div_sigma(const ScalarField& u, const Frame& frame);

/// |R| |λ₁ − λ₂| with the eigenvalue gap of ∇²⊥u in closed form.
ScalarField entropy_density_eig(const ScalarField& u);

/// Nodewise max over θ = kπ/n_theta of |R (∂²_ξu − ∂²_ηu)|.
ScalarField entropy_sup_rotations(const ScalarField& u, int n_theta);

double jump_cost(const JumpStates& j);
double frame_cost(const JumpStates& j, const Frame& frame);
/// |(Σ_ξη(m⁺) − Σ_ξη(m⁻))·ν| evaluated from the entropy itself.
double frame_cost_direct(const JumpStates& j, const Frame& frame);

}  // namespace smectic
