#pragma once

#include "softft/liegroup.hpp"

#include <string>
#include <vector>

namespace softft {

/**
 * Parametric layout of the sensor ring.
 *
 * Sensors sit on a ring of radius `ring_radius_mm` in the z = 0 plane of the
 * base frame {0} (z along the tool shaft), at azimuths k * 360 / sensor_count.
 * Each chip normal (+Z of the sensor frame) is tilted `tilt_deg` away from the
 * tool axis towards the outside of the ring. With `axial_split` the normals
 * alternate between +z (even k) and -z (odd k), giving a top and a bottom shell.
 */
struct GeometryConfig {
  int sensor_count = 8;
  double tilt_deg = 25.0;
  double magnet_offset_mm = 6.0;
  double ring_radius_mm = 15.0;
  bool axial_split = true;

  friend bool operator==(const GeometryConfig&, const GeometryConfig&) = default;
};

/// Throws InvalidConfig. A tilt of exactly 0 is accepted as a limiting case.
void validate(const GeometryConfig& cfg);

struct SensorGeometry {
  GeometryConfig config;
  std::vector<Transform> sensor_frames;   // {S_i} in {0}
  std::vector<Vec3> magnet_positions;     // nominal magnet origins in {0}
  std::vector<Vec3> sensor_positions_center;  // {S_i} origins in {C}; equal to {0} values at rest

  std::size_t size() const { return sensor_frames.size(); }

  /// Magnet frame {M_i}: the sensor frame shifted by the offset along its +Z.
  Transform magnet_frame(std::size_t i) const;
};

SensorGeometry build_geometry(const GeometryConfig& cfg);

const std::vector<Vec3>& nominal_magnet_positions(const SensorGeometry& g);

GeometryConfig geometry_config_from_json(const std::string& text);
std::string geometry_config_to_json(const GeometryConfig& cfg);
GeometryConfig load_geometry_config(const std::string& path);
void save_geometry_config(const std::string& path, const GeometryConfig& cfg);

}  // namespace softft
