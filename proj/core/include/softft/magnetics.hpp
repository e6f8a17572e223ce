#pragma once

#include "softft/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace softft {

/// Diagonal linear map from sensed flux (uT) to magnet position in the sensor frame (mm): p = M b + o.
struct PositionMap {
  Vec3 slope = Vec3::Ones();   // diagonal of M, mm/uT
  Vec3 offset = Vec3::Zero();  // o, mm

  Mat3 matrix() const { return slope.asDiagonal(); }

  /// Slopes and intercepts reported for the bench characterisation (golden constants only).
  static PositionMap reference_fit() { return {{0.4423, 0.3678, -0.0645}, {-22.0, -18.0, 8.0}}; }
};

void validate(const PositionMap& map);

/// Point dipole whose moment points along the +Z axis of `pose`.
struct DipoleSource {
  double moment = 0.0;  // A*mm^2
  Transform pose;
};

/**
 * Moment of a 1/16" x 1/32" N52 disc (remanence ~1.3 T, volume ~1.57 mm^3).
 * Gives ~1.5 mT on axis at the nominal 6 mm gap.
 */
inline constexpr double kDefaultMagnetMoment = 1625.0;  // A*mm^2

/// MLX90393-style digitisation: per-axis resolution and sampling cadence.
struct ChipModel {
  Vec3 resolution_ut{6.009, 6.009, 9.680};
  double sample_period_ms = 10.0;
  double min_period_ms = 3.34;
};

void validate(const ChipModel& chip);

/// One synchronised reading of every sensor on the ring.
struct FluxSample {
  std::vector<Vec3> flux;  // uT, sensor frames
  double timestamp_ms = 0.0;

  std::size_t size() const { return flux.size(); }
  /// b-hat: sensors in order, x/y/z within each.
  VecX stacked() const;
  static FluxSample from_stacked(const VecX& b, double timestamp_ms = 0.0);
};

/// Flux in uT at the origin of `sensor_frame`, expressed in that frame. Both poses share a parent frame.
/// Throws SingularField within 0.1 mm of the source.
Vec3 dipole_flux(const DipoleSource& src, const Transform& sensor_frame);

/// Analytic spatial gradient dB/dr (uT/mm) in the parent frame at `point`.
Mat3 dipole_gradient(const DipoleSource& src, const Vec3& point);

Vec3 position_from_flux(const Vec3& b, const PositionMap& map);

/// Axis along which one sweep segment moves the magnet.
enum class SweepAxis : int { X = 0, Y = 1, Z = 2 };

struct SweepPoint {
  SweepAxis axis = SweepAxis::X;
  double commanded_mm = 0.0;  // stage displacement along `axis` from the reference position
  Vec3 flux_ut = Vec3::Zero();
};

struct PositionMapFit {
  PositionMap map;
  Vec3 r_squared = Vec3::Zero();
};

/**
 * Per-axis least squares of commanded position against the matching flux
 * component. The intercepts are shifted by `reference` (the magnet position in
 * the sensor frame at zero stage displacement) so the map returns positions in
 * the sensor frame. Throws DegenerateSweep when an axis has < 2 distinct
 * positions or constant flux.
 */
PositionMapFit fit_position_map(std::span<const SweepPoint> sweep, const Vec3& reference = Vec3::Zero());

/// Rounds each axis to the nearest LSB multiple, halves away from zero.
Vec3 quantize(const Vec3& b, const ChipModel& chip);

struct SampleNoise {
  double sigma_ut = 0.0;
  bool quantize = false;
};

/// One source per magnet, fixed to the outer shell at the nominal magnet frames.
std::vector<DipoleSource> default_magnet_sources(const SensorGeometry& g, double moment = kDefaultMagnetMoment);

/**
 * Simulated ring reading with the center piece at `center_pose` ({C} in {0}).
 * Sensors ride the center piece, magnets stay with the shell. Each sensor sees
 * only its own magnet. Noise is added before quantisation; deterministic in `seed`.
 */
FluxSample synthesize_sample(const SensorGeometry& g, const Transform& center_pose,
                             std::span<const DipoleSource> sources, const ChipModel& chip,
                             const SampleNoise& noise, std::uint64_t seed, double timestamp_ms = 0.0);

}  // namespace softft
