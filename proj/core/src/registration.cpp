#include "softft/registration.hpp"

#include <Eigen/SVD>

namespace softft {

std::vector<Vec3> magnet_positions_in_center(const SensorGeometry& g, const PositionMap& map,
                                             const FluxSample& sample) {
  if (sample.size() != g.size()) {
    throw Error(ErrorCode::InvalidInput, "flux sample has " + std::to_string(sample.size()) +
                                             " sensors, geometry has " + std::to_string(g.size()));
  }
  std::vector<Vec3> points;
  points.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 local = position_from_flux(sample.flux[i], map);
    points.push_back(g.sensor_positions_center[i] + g.sensor_frames[i].rotation * local);
  }
  return points;
}

RegistrationResult arun_register_detailed(const Correspondences& c) {
  const std::size_t n = c.source.size();
  if (n != c.target.size()) throw Error(ErrorCode::InvalidInput, "correspondence lists differ in length");
  if (n < 3) throw Error(ErrorCode::InvalidInput, "registration needs at least 3 points");

  Vec3 src_mean = Vec3::Zero();
  Vec3 dst_mean = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    src_mean += c.source[i];
    dst_mean += c.target[i];
  }
  src_mean /= static_cast<double>(n);
  dst_mean /= static_cast<double>(n);

  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    h += (c.source[i] - src_mean) * (c.target[i] - dst_mean).transpose();
  }

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) {
    throw Error(ErrorCode::DegenerateConfiguration, "cross-covariance has rank < 2 (collinear points)");
  }

  RegistrationResult out;
  out.singular_values = sv;
  Mat3 v = svd.matrixV();
  const Mat3& u = svd.matrixU();
  if ((v * u.transpose()).determinant() < 0.0) {
    v.col(2) *= -1.0;
    out.reflection_corrected = true;
  }
  out.pose.rotation = v * u.transpose();
  out.pose.translation = dst_mean - out.pose.rotation * src_mean;

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += (c.target[i] - out.pose.apply(c.source[i])).squaredNorm();
  out.rms_residual = std::sqrt(ss / static_cast<double>(n));
  return out;
}

Transform arun_register(const Correspondences& c) { return arun_register_detailed(c).pose; }

Twist deflection_twist(const Transform& t) { return log_se3(t); }

Twist twist_from_flux(const SensorGeometry& g, const PositionMap& map, const FluxSample& sample) {
  Correspondences c{magnet_positions_in_center(g, map, sample), nominal_magnet_positions(g)};
  return deflection_twist(arun_register(c));
}

}  // namespace softft
