#include "oracle.hpp"

#include "softft/liegroup.hpp"

#include <doctest.h>

using namespace softft;

TEST_CASE("hat basics") {
  CHECK(hat(Vec3::Zero()) == Mat3::Zero());
  Mat3 ex;
  ex << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK(hat(Vec3::UnitX()) == ex);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = oracle::random_vec(rng, 5.0), u = oracle::random_vec(rng, 5.0);
    const Vec3 c(v.y() * u.z() - v.z() * u.y(), v.z() * u.x() - v.x() * u.z(), v.x() * u.y() - v.y() * u.x());
    CHECK((hat(v) * u - c).norm() < 1e-12);
    CHECK(hat(v).transpose() == -hat(v));
    CHECK(vee(hat(v)) == v);
  }
}

TEST_CASE("is_rotation") {
  CHECK(is_rotation(Mat3::Identity()));
  CHECK_FALSE(is_rotation(-Mat3::Identity()));
  CHECK_FALSE(is_rotation(2.0 * Mat3::Identity()));
}

TEST_CASE("exp_se3 examples") {
  const Transform id = exp_se3(Twist{});
  CHECK(id.rotation == Mat3::Identity());
  CHECK(id.translation == Vec3::Zero());

  const Transform t = exp_se3({Vec3(5, 0, 0), Vec3::Zero()});
  CHECK((t.translation - Vec3(5, 0, 0)).norm() == 0.0);

  const Transform r = exp_se3({Vec3::Zero(), Vec3(0, 0, std::numbers::pi / 2)});
  CHECK((r.rotation - oracle::rodrigues(Vec3(0, 0, std::numbers::pi / 2))).norm() < 1e-14);
  Mat3 rz;
  rz << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((r.rotation - rz).norm() < 1e-15);
}

TEST_CASE("exp_se3 matches the matrix exponential") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> mag(0.0, std::numbers::pi - 0.1);
  for (int i = 0; i < 300; ++i) {
    Vec3 w = oracle::random_vec(rng, 1.0).normalized() * mag(rng);
    if (i % 5 == 0) w *= 1e-9;  // Taylor branch
    if (i % 7 == 0) w *= 1e-5;
    Vec6 xi;
    xi << oracle::random_vec(rng, 10.0), w;
    const Eigen::Matrix4d ref = oracle::expm(xi);
    CHECK((exp_se3(Twist::from_vector(xi)).matrix() - ref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("log_se3 examples") {
  CHECK(log_se3(Transform::identity()).vector() == Vec6::Zero());

  const Twist t = log_se3(Transform::from_translation({1, 2, 3}));
  CHECK(t.v == Vec3(1, 2, 3));
  CHECK(t.w == Vec3::Zero());

  const Transform rz = Transform::from_rotation(oracle::rodrigues(Vec3(0, 0, 0.3)));
  const Twist z = log_se3(rz);
  CHECK((z.w - Vec3(0, 0, 0.3)).norm() < 1e-15);
  CHECK(z.v.norm() < 1e-15);
  CHECK((oracle::expm(z.vector()) - rz.matrix()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("log_se3 matches the matrix logarithm") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Transform t{oracle::random_rotation(rng, 2.5), oracle::random_vec(rng, 8.0)};
    CHECK((log_se3(t).vector() - oracle::logm(t.matrix())).norm() < 1e-10);
  }
}

TEST_CASE("round trip including the small-angle and near-pi regimes") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 3000; ++i) {
    double th;
    switch (i % 4) {
      case 0: th = (std::numbers::pi - 0.1) * u(rng); break;
      case 1: th = 1e-10 + 1e-7 * u(rng); break;
      case 2: th = 1e-4 * u(rng); break;
      default: th = std::numbers::pi - 0.1 * (0.01 + u(rng)) * 0.999; break;
    }
    th = std::min(th, std::numbers::pi - 0.1);
    const Vec3 w = oracle::random_vec(rng, 1.0).normalized() * th;
    Vec6 xi;
    xi << oracle::random_vec(rng, 6.0), w;
    worst = std::max(worst, (log_se3(exp_se3(Twist::from_vector(xi))).vector() - xi).norm());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("log near pi: valid up to the guard band, error inside it") {
  const Vec3 axis = Vec3(1, 2, -0.5).normalized();
  for (double gap : {1e-3, 1e-6, 1e-8}) {
    const Mat3 r = oracle::rodrigues(axis * (std::numbers::pi - gap));
    const Vec3 w = log_so3(r);
    CHECK((oracle::rodrigues(w) - r).norm() < 1e-9);
  }
  const Mat3 at_pi = Eigen::AngleAxisd(std::numbers::pi, axis).toRotationMatrix();
  try {
    log_se3(Transform::from_rotation(at_pi));
    FAIL("expected AngleAtPi");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AngleAtPi);
  }
  CHECK_THROWS_AS(log_so3(oracle::rodrigues(axis * (std::numbers::pi - 1e-10))), Error);
}

TEST_CASE("transform inverse and associativity") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Transform a{oracle::random_rotation(rng, 3.0), oracle::random_vec(rng, 50)};
    const Transform b{oracle::random_rotation(rng, 3.0), oracle::random_vec(rng, 50)};
    const Transform c{oracle::random_rotation(rng, 3.0), oracle::random_vec(rng, 50)};
    CHECK(((a * a.inverse()).matrix() - Eigen::Matrix4d::Identity()).norm() < 1e-12);
    CHECK((((a * b) * c).matrix() - (a * (b * c)).matrix()).norm() < 1e-12);
    CHECK(((a * b).matrix() - a.matrix() * b.matrix()).norm() < 1e-12);
    CHECK((Transform::from_matrix(a.matrix()).matrix() - a.matrix()).norm() == 0.0);
  }
}

TEST_CASE("transform_wrench examples") {
  std::mt19937_64 rng(6);
  const Wrench w{oracle::random_vec(rng, 3), oracle::random_vec(rng, 3)};
  const Wrench same = transform_wrench(Transform::identity(), w);
  CHECK(same.force == w.force);
  CHECK(same.moment == w.moment);

  const double d = 0.05, f = 2.0;
  const Wrench moved = transform_wrench(Transform::from_translation({0, 0, d}), {{f, 0, 0}, Vec3::Zero()});
  CHECK(moved.force == Vec3(f, 0, 0));
  // m' = -(p x f) for the frame-change direction used by Ad^T
  CHECK((moved.moment - Vec3(0, -d * f, 0)).norm() < 1e-15);

  for (int i = 0; i < 20; ++i) {
    const Transform t{oracle::random_rotation(rng, 3.0), oracle::random_vec(rng, 1)};
    CHECK(transform_wrench(t, Wrench{}).vector() == Vec6::Zero());
  }
}

TEST_CASE("transform_wrench equals Ad^T and composes") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Transform t1{oracle::random_rotation(rng, 3.0), oracle::random_vec(rng, 0.2)};
    const Transform t2{oracle::random_rotation(rng, 3.0), oracle::random_vec(rng, 0.2)};
    const Wrench w{oracle::random_vec(rng, 10), oracle::random_vec(rng, 1)};

    // Ad from its block definition
    Mat6 ad = Mat6::Zero();
    ad.topLeftCorner<3, 3>() = t1.rotation;
    ad.topRightCorner<3, 3>() = hat(t1.translation) * t1.rotation;
    ad.bottomRightCorner<3, 3>() = t1.rotation;
    CHECK((adjoint(t1) - ad).norm() < 1e-14);
    CHECK((transform_wrench(t1, w).vector() - ad.transpose() * w.vector()).norm() < 1e-12);

    // Ad(T1 T2) = Ad(T1) Ad(T2)
    CHECK((adjoint(t1 * t2) - adjoint(t1) * adjoint(t2)).norm() < 1e-12);
    const Wrench two_step = transform_wrench(t2, transform_wrench(t1, w));
    CHECK((two_step.vector() - transform_wrench(t1 * t2, w).vector()).norm() < 1e-12);
  }
}

TEST_CASE("wrench power pairing is frame invariant") {
  // <Ad^T w, xi> = <w, Ad xi>
  std::mt19937_64 rng(8);
  const Transform t{oracle::random_rotation(rng, 2.0), oracle::random_vec(rng, 0.1)};
  Vec6 xi, w;
  xi << oracle::random_vec(rng, 1), oracle::random_vec(rng, 1);
  w << oracle::random_vec(rng, 1), oracle::random_vec(rng, 1);
  CHECK(std::abs(transform_wrench(t, Wrench::from_vector(w)).vector().dot(xi) - w.dot(adjoint(t) * xi)) < 1e-13);
}
