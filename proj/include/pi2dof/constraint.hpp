#pragma once

#include <algorithm>

#include "errors.hpp"
#include "plant.hpp"

namespace pi2dof {

/// Omega = {K : ||K_P||_F <= kp_radius, ||K_I||_F <= ki_radius}.
struct ConstraintBox {
  double kp_radius = 5.0;
  double ki_radius = 5.0;

  void validate() const {
    if (!(kp_radius > 0.0) || !(ki_radius > 0.0))
      throw DomainError("constraint radii must be positive");
  }

  bool contains(const PiGain& K, double slack = 1e-12) const {
    return K.kp.norm() <= kp_radius + slack && K.ki.norm() <= ki_radius + slack;
  }
};

inline Matrix project_onto_ball(const Matrix& m, double radius) {
  const double nrm = m.norm();
  if (nrm <= radius) return m;
  return m * (radius / nrm);
}

/// Euclidean projection onto a product of Frobenius balls: each block is
/// rescaled on its own.
inline PiGain project_onto_omega(const PiGain& K, const ConstraintBox& omega) {
  return PiGain(project_onto_ball(K.kp, omega.kp_radius),
                project_onto_ball(K.ki, omega.ki_radius));
}

}  // namespace pi2dof
