#include "softft/geometry.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace softft {

void validate(const GeometryConfig& cfg) {
  if (cfg.sensor_count < 3) {
    throw Error(ErrorCode::InvalidConfig, "sensor_count must be >= 3");
  }
  if (!(cfg.tilt_deg >= 0.0 && cfg.tilt_deg < 90.0)) {
    throw Error(ErrorCode::InvalidConfig, "tilt_deg must lie in [0, 90)");
  }
  if (!(cfg.magnet_offset_mm > 0.0) || !std::isfinite(cfg.magnet_offset_mm)) {
    throw Error(ErrorCode::InvalidConfig, "magnet_offset_mm must be positive");
  }
  if (!(cfg.ring_radius_mm > 0.0) || !std::isfinite(cfg.ring_radius_mm)) {
    throw Error(ErrorCode::InvalidConfig, "ring_radius_mm must be positive");
  }
}

Transform SensorGeometry::magnet_frame(std::size_t i) const {
  const Transform& s = sensor_frames.at(i);
  return {s.rotation, magnet_positions.at(i)};
}

SensorGeometry build_geometry(const GeometryConfig& cfg) {
  validate(cfg);

  SensorGeometry g;
  g.config = cfg;
  const auto n = static_cast<std::size_t>(cfg.sensor_count);
  g.sensor_frames.reserve(n);
  g.magnet_positions.reserve(n);
  g.sensor_positions_center.reserve(n);

  const double tilt = cfg.tilt_deg * std::numbers::pi / 180.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double az = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    const Vec3 radial(std::cos(az), std::sin(az), 0.0);
    const Vec3 tangent(-std::sin(az), std::cos(az), 0.0);
    const double side = (cfg.axial_split && k % 2 == 1) ? -1.0 : 1.0;

    // x tangential, z outward-tilted normal, y = z x x keeps a +z (shaft) component.
    const Vec3 z = std::cos(tilt) * side * Vec3::UnitZ() + std::sin(tilt) * radial;
    const Vec3 x = tangent;
    const Vec3 y = z.cross(x);

    Transform s;
    s.rotation.col(0) = x;
    s.rotation.col(1) = y;
    s.rotation.col(2) = z;
    s.translation = cfg.ring_radius_mm * radial;

    g.sensor_frames.push_back(s);
    g.magnet_positions.push_back(s.translation + cfg.magnet_offset_mm * z);
    g.sensor_positions_center.push_back(s.translation);
  }
  return g;
}

const std::vector<Vec3>& nominal_magnet_positions(const SensorGeometry& g) { return g.magnet_positions; }

GeometryConfig geometry_config_from_json(const std::string& text) {
  GeometryConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    cfg.sensor_count = j.value("sensor_count", cfg.sensor_count);
    cfg.tilt_deg = j.value("tilt_deg", cfg.tilt_deg);
    cfg.magnet_offset_mm = j.value("magnet_offset_mm", cfg.magnet_offset_mm);
    cfg.ring_radius_mm = j.value("ring_radius_mm", cfg.ring_radius_mm);
    cfg.axial_split = j.value("axial_split", cfg.axial_split);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("geometry config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

std::string geometry_config_to_json(const GeometryConfig& cfg) {
  nlohmann::ordered_json j;
  j["sensor_count"] = cfg.sensor_count;
  j["tilt_deg"] = cfg.tilt_deg;
  j["magnet_offset_mm"] = cfg.magnet_offset_mm;
  j["ring_radius_mm"] = cfg.ring_radius_mm;
  j["axial_split"] = cfg.axial_split;
  return j.dump(2) + "\n";
}

GeometryConfig load_geometry_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open geometry config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return geometry_config_from_json(ss.str());
}

void save_geometry_config(const std::string& path, const GeometryConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write geometry config: " + path);
  out << geometry_config_to_json(cfg);
}

}  // namespace softft
