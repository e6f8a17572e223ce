#pragma once

#include "softft/common.hpp"

namespace softft {

/**
 * Rigid transform in SE(3). Translation in millimetres.
 *
 * Acts on points as p' = R p + t. Composition `a * b` maps b's frame into a's.
 */
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }
  static Transform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  static Transform from_rotation(const Mat3& r) { return {r, Vec3::Zero()}; }
  static Transform from_matrix(const Eigen::Matrix4d& m);

  Eigen::Matrix4d matrix() const;
  Transform inverse() const;
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  friend Transform operator*(const Transform& a, const Transform& b) {
    return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
  }
};

/// Twist [v; w]: v in mm, w in rad. Translation first everywhere in this library.
struct Twist {
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();

  static Twist from_vector(const Vec6& x) { return {x.head<3>(), x.tail<3>()}; }
  Vec6 vector() const {
    Vec6 x;
    x << v, w;
    return x;
  }
};

/// Wrench [f; m]: force in N, moment in Nm.
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();

  static Wrench from_vector(const Vec6& x) { return {x.head<3>(), x.tail<3>()}; }
  Vec6 vector() const {
    Vec6 x;
    x << force, moment;
    return x;
  }
};

/// Skew-symmetric matrix with hat(v) * u == v.cross(u).
Mat3 hat(const Vec3& v);
Vec3 vee(const Mat3& m);

/// True when R^T R = I and det R = +1 within `tol`.
bool is_rotation(const Mat3& r, double tol = 1e-12);

Mat3 exp_so3(const Vec3& w);

/// Rotation vector of R. Throws AngleAtPi when the angle is within 1e-9 of pi.
Vec3 log_so3(const Mat3& r);

Transform exp_se3(const Twist& xi);

/// Inverse of exp_se3 for rotation angles below pi. Throws AngleAtPi at the boundary.
Twist log_se3(const Transform& t);

/// Adjoint of T in [v; w] ordering: [[R, hat(p) R], [0, R]].
Mat6 adjoint(const Transform& t);

/// Maps a wrench expressed in frame {a} to frame {b}: Ad(T_ab)^T w.
/// The translation of `t_ab` must be in metres when w's moment is in Nm.
Wrench transform_wrench(const Transform& t_ab, const Wrench& w);

}  // namespace softft
