#pragma once

#include "softft/magnetics.hpp"

#include <vector>

namespace softft {

/// Paired point sets: `source` in the center-piece frame {C}, `target` in {0}.
struct Correspondences {
  std::vector<Vec3> source;
  std::vector<Vec3> target;
};

struct RegistrationResult {
  Transform pose;              // maps source onto target
  Vec3 singular_values;        // of the 3x3 cross-covariance, descending
  bool reflection_corrected = false;
  double rms_residual = 0.0;   // mm
};

/// Magnet positions in {C} reconstructed from one ring reading: p_Si + R_Si (M b_i + o).
std::vector<Vec3> magnet_positions_in_center(const SensorGeometry& g, const PositionMap& map,
                                             const FluxSample& sample);

/**
 * Closed-form least-squares rigid fit (Arun's SVD method) with the standard
 * reflection correction. Accepts any n >= 3. Throws InvalidInput for
 * mismatched or too-short lists and DegenerateConfiguration when the
 * cross-covariance has rank < 2.
 */
RegistrationResult arun_register_detailed(const Correspondences& c);
Transform arun_register(const Correspondences& c);

/// log of the center pose; zero iff T is the identity. Propagates AngleAtPi.
Twist deflection_twist(const Transform& t);

/// Flux -> magnet points -> registration -> deflection twist.
Twist twist_from_flux(const SensorGeometry& g, const PositionMap& map, const FluxSample& sample);

}  // namespace softft
