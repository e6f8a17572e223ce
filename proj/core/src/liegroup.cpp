#include "softft/liegroup.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace softft {

namespace {

// Below this angle the coefficient functions switch to their Taylor series.
constexpr double kSmallAngle = 1e-8;
constexpr double kPiGuard = 1e-9;

// sin(t)/t
double coeff_a(double t) { return t < kSmallAngle ? 1.0 - t * t / 6.0 : std::sin(t) / t; }

// (1 - cos t)/t^2, evaluated through the half angle to avoid cancellation.
double coeff_b(double t) {
  if (t < kSmallAngle) return 0.5 - t * t / 24.0;
  const double s = std::sin(0.5 * t) / (0.5 * t);
  return 0.5 * s * s;
}

// (t - sin t)/t^3
double coeff_c(double t) {
  if (t < kSmallAngle) return 1.0 / 6.0 - t * t / 120.0;
  return (t - std::sin(t)) / (t * t * t);
}

// (1 - (t/2) cot(t/2)) / t^2
double coeff_d(double t) {
  if (t < kSmallAngle) return 1.0 / 12.0 + t * t / 720.0;
  const double h = 0.5 * t;
  return (1.0 - h * std::cos(h) / std::sin(h)) / (t * t);
}

}  // namespace

Transform Transform::from_matrix(const Eigen::Matrix4d& m) {
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

Eigen::Matrix4d Transform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Transform Transform::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  return (r.transpose() * r - Mat3::Identity()).norm() <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Mat3 exp_so3(const Vec3& w) {
  const double t = w.norm();
  const Mat3 k = hat(w);
  return Mat3::Identity() + coeff_a(t) * k + coeff_b(t) * k * k;
}

Vec3 log_so3(const Mat3& r) {
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const Vec3 s = 0.5 * vee(r - r.transpose());  // sin(theta) * axis
  const double theta = std::atan2(s.norm(), c);

  if (std::numbers::pi - theta < kPiGuard) {
    throw Error(ErrorCode::AngleAtPi, "rotation angle is pi; logarithm is not unique");
  }
  if (theta < kSmallAngle) return s * (1.0 + theta * theta / 6.0);

  if (c > -0.99) return s * (theta / std::sin(theta));

  // Near pi the antisymmetric part vanishes; recover the axis from the symmetric part.
  const Mat3 kkt = (0.5 * (r + r.transpose()) - c * Mat3::Identity()) / (1.0 - c);
  Eigen::Index i = 0;
  kkt.diagonal().maxCoeff(&i);
  Vec3 axis = kkt.col(i) / std::sqrt(kkt(i, i));
  axis.normalize();
  if (axis.dot(s) < 0.0) axis = -axis;
  return theta * axis;
}

Transform exp_se3(const Twist& xi) {
  const double t = xi.w.norm();
  const Mat3 k = hat(xi.w);
  const Mat3 k2 = k * k;
  const Mat3 r = Mat3::Identity() + coeff_a(t) * k + coeff_b(t) * k2;
  const Mat3 v = Mat3::Identity() + coeff_b(t) * k + coeff_c(t) * k2;
  return {r, v * xi.v};
}

Twist log_se3(const Transform& t) {
  const Vec3 w = log_so3(t.rotation);
  const double theta = w.norm();
  const Mat3 k = hat(w);
  const Mat3 v_inv = Mat3::Identity() - 0.5 * k + coeff_d(theta) * k * k;
  return {v_inv * t.translation, w};
}

Mat6 adjoint(const Transform& t) {
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = t.rotation;
  ad.topRightCorner<3, 3>() = hat(t.translation) * t.rotation;
  ad.bottomRightCorner<3, 3>() = t.rotation;
  return ad;
}

Wrench transform_wrench(const Transform& t_ab, const Wrench& w) {
  const Mat3 rt = t_ab.rotation.transpose();
  return {rt * w.force, rt * (w.moment - t_ab.translation.cross(w.force))};
}

}  // namespace softft
