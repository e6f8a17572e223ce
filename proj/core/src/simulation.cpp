#include "softft/simulation.hpp"

#include "parallel.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <random>

namespace softft {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }
Mat3 rot_y(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Arbitrary robot workspace location; only the orientation affects the load.
const Vec3 kFlangePosition(250.0, 0.0, 300.0);

}  // namespace

Mat6 default_stiffness() {
  // Translational N/mm, rotational Nm/rad, with mild force/tilt coupling.
  Vec6 diag;
  diag << 8.8, 8.8, 6.5, 10.0, 10.0, 10.0;
  Mat6 corr = Mat6::Identity();
  corr(0, 4) = corr(4, 0) = -0.2;
  corr(1, 3) = corr(3, 1) = 0.2;
  corr(2, 5) = corr(5, 2) = 0.05;
  const Vec6 s = diag.cwiseSqrt();
  Mat6 k;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) k(i, j) = corr(i, j) * (s[i] * s[j]);
  }
  return k;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0xD6E8FEB86659FD93ull));
}

World::World(WorldConfig cfg) : cfg_(std::move(cfg)), geometry_(build_geometry(cfg_.geometry)) {
  validate(cfg_.chip);
  if (!(cfg_.magnet_moment > 0.0)) throw Error(ErrorCode::InvalidConfig, "magnet moment must be positive");
  if (cfg_.window == 0) throw Error(ErrorCode::InvalidConfig, "averaging window must be >= 1");
  if (cfg_.noise.sigma_ut < 0.0) throw Error(ErrorCode::InvalidConfig, "noise sigma must be >= 0");
  Eigen::FullPivLU<Mat6> lu(cfg_.stiffness);
  if (!lu.isInvertible()) throw Error(ErrorCode::InvalidConfig, "stiffness must be invertible");
  compliance_ = lu.inverse();

  sources_ = default_magnet_sources(geometry_, cfg_.magnet_moment);

  // Local flux-per-displacement of sensor 0's own magnet; identical for every sensor by symmetry.
  const Transform& s0 = geometry_.sensor_frames.front();
  const Mat3 jac = -s0.rotation.transpose() * dipole_gradient(sources_.front(), s0.translation) * s0.rotation;
  linear_map_.slope = jac.diagonal().cwiseInverse();
  linear_map_.offset = Vec3(0.0, 0.0, cfg_.geometry.magnet_offset_mm);
}

Twist World::deflection(const Wrench& w) const { return Twist::from_vector(compliance_ * w.vector()); }

VecX World::linear_flux(const Twist& xi) const {
  VecX b(static_cast<Eigen::Index>(3 * geometry_.size()));
  for (std::size_t i = 0; i < geometry_.size(); ++i) {
    const Mat3& r = geometry_.sensor_frames[i].rotation;
    const Vec3 dp = r.transpose() * (-xi.v + geometry_.magnet_positions[i].cross(xi.w));
    b.segment<3>(static_cast<Eigen::Index>(3 * i)) = dp.cwiseQuotient(linear_map_.slope);
  }
  return b;
}

FluxSample World::clean_flux(const Transform& center_pose) const {
  if (cfg_.model == FluxModelKind::Linear) return FluxSample::from_stacked(linear_flux(log_se3(center_pose)));
  return synthesize_sample(geometry_, center_pose, sources_, cfg_.chip, SampleNoise{}, 0);
}

FluxSample World::measure(const Transform& center_pose, std::uint64_t seed, double timestamp_ms) const {
  FluxSample s = clean_flux(center_pose);
  s.timestamp_ms = timestamp_ms;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& b : s.flux) {
    if (cfg_.noise.sigma_ut > 0.0) {
      for (int k = 0; k < 3; ++k) b[k] += cfg_.noise.sigma_ut * gauss(rng);
    }
    if (cfg_.noise.quantize) b = quantize(b, cfg_.chip);
  }
  return s;
}

VecX World::averaged_flux(const Transform& center_pose, std::uint64_t seed) const {
  const bool noisy = cfg_.noise.sigma_ut > 0.0 || cfg_.noise.quantize;
  if (!noisy) return clean_flux(center_pose).stacked();
  const FluxSample clean = clean_flux(center_pose);
  VecX sum = VecX::Zero(static_cast<Eigen::Index>(3 * geometry_.size()));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t k = 0; k < cfg_.window; ++k) {
    std::mt19937_64 rng(derive_seed(seed, k));
    for (std::size_t i = 0; i < clean.size(); ++i) {
      Vec3 b = clean.flux[i];
      if (cfg_.noise.sigma_ut > 0.0) {
        for (int a = 0; a < 3; ++a) b[a] += cfg_.noise.sigma_ut * gauss(rng);
      }
      if (cfg_.noise.quantize) b = quantize(b, cfg_.chip);
      sum.segment<3>(static_cast<Eigen::Index>(3 * i)) += b;
    }
  }
  return sum / static_cast<double>(cfg_.window);
}

CalibrationRecord World::make_record(const PosePlan& plan, std::uint64_t seed) const {
  const Wrench w = gravity_wrench(plan.flange_pose, plan.lever_mm, plan.mass_g);
  const Transform center = exp_se3(deflection(w));
  return {plan.flange_pose, plan.mass_g, plan.lever_mm, averaged_flux(center, seed)};
}

CalibrationDataset World::make_dataset(const std::vector<PosePlan>& plans, std::uint64_t seed) const {
  CalibrationDataset ds;
  ds.records.resize(plans.size());
  detail::parallel_for(plans.size(), [&](std::size_t i) { ds.records[i] = make_record(plans[i], derive_seed(seed, i)); });
  ds.rest_flux = rest_flux();
  return ds;
}

std::vector<Vec3> default_levers() { return {{0.0, 0.0, 60.0}, {40.0, 0.0, 40.0}, {0.0, 40.0, 40.0}}; }

std::vector<PosePlan> calibration_poses(std::uint64_t seed, std::size_t count) {
  const auto levers = default_levers();
  std::vector<PosePlan> plans;
  auto add = [&](const Mat3& r, double mass) {
    if (plans.size() >= count) return;
    plans.push_back({{r, kFlangePosition}, mass, levers[plans.size() % levers.size()]});
  };

  for (double mass : {50.0, 200.0}) {
    for (double cone : {30.0, 75.0}) {
      for (int az = 0; az < 16; ++az) {
        const double roll = (az % 8) * 45.0;
        add(rot_z(az * 22.5 * kDeg) * rot_y(cone * kDeg) * rot_z(roll * kDeg), mass);
      }
    }
    for (int roll = 0; roll < 8; ++roll) add(rot_y(90.0 * kDeg) * rot_z(roll * 45.0 * kDeg), mass);
  }

  std::mt19937_64 rng(derive_seed(seed, 0xCA11B));
  std::bernoulli_distribution heavy(0.5);
  while (plans.size() < count) {
    const Mat3 r = random_rotation(rng);
    add(r, heavy(rng) ? 200.0 : 50.0);
  }
  return plans;
}

std::vector<PosePlan> validation_poses(std::uint64_t seed, std::size_t count, double mass_g) {
  const auto levers = default_levers();
  std::mt19937_64 rng(derive_seed(seed, 0x7A11D));
  std::vector<PosePlan> plans;
  plans.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    plans.push_back({{random_rotation(rng), kFlangePosition}, mass_g, levers[i % levers.size()]});
  }
  return plans;
}

Vec3 sweep_reference(const World& world) { return {0.0, 0.0, world.config().geometry.magnet_offset_mm}; }

std::vector<SweepPoint> bench_sweep(const World& world, std::uint64_t seed) {
  const auto& cfg = world.config();
  const Vec3 ref = sweep_reference(world);
  const PositionMap& lin = world.linear_map();

  std::vector<SweepPoint> sweep;
  std::mt19937_64 rng(derive_seed(seed, 0x5EE9));
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto sample = [&](SweepAxis axis, double commanded) {
    Vec3 p = ref;
    p[static_cast<int>(axis)] += commanded;
    Vec3 b;
    if (cfg.model == FluxModelKind::Linear) {
      b = (p - ref).cwiseQuotient(lin.slope);
    } else {
      // Sensor at the bench origin, magnet at p with the same orientation.
      b = dipole_flux({cfg.magnet_moment, Transform::from_translation(p)}, Transform::identity());
    }
    if (cfg.noise.sigma_ut > 0.0) {
      for (int k = 0; k < 3; ++k) b[k] += cfg.noise.sigma_ut * gauss(rng);
    }
    if (cfg.noise.quantize) b = quantize(b, cfg.chip);
    sweep.push_back({axis, commanded, b});
  };

  for (SweepAxis axis : {SweepAxis::X, SweepAxis::Y}) {
    for (int k = 0; k <= 10; ++k) sample(axis, -1.0 + 0.2 * k);
  }
  for (int k = 0; k <= 10; ++k) sample(SweepAxis::Z, 1.0 + 0.2 * k);
  return sweep;
}

}  // namespace softft
