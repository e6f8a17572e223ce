#pragma once

#include "softft/calibration.hpp"

#include <cstdint>
#include <vector>

namespace softft {

/**
 * Which physics generates the ring readings.
 *
 * Dipole: point-dipole field of each shell magnet at its (moving) sensor.
 * Linear: flux is exactly linear in the deflection twist, b = M^-1 * (first-order
 * magnet displacement in the sensor frame), with zero rest flux. The pipeline
 * is closed-form exact on this model.
 */
enum class FluxModelKind { Linear, Dipole };

/// Stiffness of the simulated elastomer: twist [mm, rad] -> wrench [N, Nm]. Symmetric positive definite.
Mat6 default_stiffness();

struct WorldConfig {
  GeometryConfig geometry;
  FluxModelKind model = FluxModelKind::Dipole;
  double magnet_moment = kDefaultMagnetMoment;
  Mat6 stiffness = default_stiffness();
  ChipModel chip;
  SampleNoise noise;
  std::size_t window = 100;  // samples averaged per static pose
};

/// One commanded static pose of the calibration robot.
struct PosePlan {
  Transform flange_pose;
  double mass_g = 0.0;
  Vec3 lever_mm = Vec3::Zero();
};

/// SplitMix64-style mixing so every (record, sample) draw has its own reproducible seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

class World {
 public:
  explicit World(WorldConfig cfg);

  const WorldConfig& config() const { return cfg_; }
  const SensorGeometry& geometry() const { return geometry_; }
  const std::vector<DipoleSource>& sources() const { return sources_; }

  /// Map that inverts the linear model exactly; the dipole's local slopes at the rest gap.
  const PositionMap& linear_map() const { return linear_map_; }

  Twist deflection(const Wrench& w) const;

  /// Noise-free reading with the center piece at `center_pose`.
  FluxSample clean_flux(const Transform& center_pose) const;
  /// One reading with the configured noise and quantisation.
  FluxSample measure(const Transform& center_pose, std::uint64_t seed, double timestamp_ms = 0.0) const;
  /// Mean of `window` independent readings.
  VecX averaged_flux(const Transform& center_pose, std::uint64_t seed) const;
  VecX rest_flux() const { return clean_flux(Transform::identity()).stacked(); }

  /// Ground-truth load, deflection and averaged reading for one pose.
  CalibrationRecord make_record(const PosePlan& plan, std::uint64_t seed) const;
  CalibrationDataset make_dataset(const std::vector<PosePlan>& plans, std::uint64_t seed) const;

 private:
  VecX linear_flux(const Twist& xi) const;

  WorldConfig cfg_;
  SensorGeometry geometry_;
  std::vector<DipoleSource> sources_;
  PositionMap linear_map_;
  Mat6 compliance_;
};

/// Attachment levers (mm, flange frame) used by the synthetic pose sets.
std::vector<Vec3> default_levers();

/**
 * 193 static poses: for each of the 50 g and 200 g masses, two cone angles
 * (30 and 75 deg) x 16 azimuths with roll cycling through 8 values, plus 8 rolls
 * with the tool horizontal; padded with seeded uniformly random orientations.
 * Levers cycle through default_levers().
 */
std::vector<PosePlan> calibration_poses(std::uint64_t seed, std::size_t count = 193);

/// Seeded random orientations carrying a single mass (100 g by default).
std::vector<PosePlan> validation_poses(std::uint64_t seed, std::size_t count = 60, double mass_g = 100.0);

/**
 * Bench characterisation of one sensor/magnet pair: 0.2 mm steps over
 * x, y in [-1, 1] and z in [1, 3] mm of stage displacement from the rest
 * position (0, 0, magnet_offset) of the magnet in the sensor frame.
 */
std::vector<SweepPoint> bench_sweep(const World& world, std::uint64_t seed);

/// Rest position of the magnet in its sensor frame; the reference for fit_position_map.
Vec3 sweep_reference(const World& world);

}  // namespace softft
