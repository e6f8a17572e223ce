#include "softft/magnetics.hpp"

#include <cmath>
#include <random>
#include <set>

namespace softft {

namespace {

// mu0/4pi in uT * mm^3 / (A * mm^2).
constexpr double kFieldScale = 100.0;
constexpr double kMinDistance = 0.1;  // mm

}  // namespace

void validate(const PositionMap& map) {
  if (!map.slope.allFinite() || !map.offset.allFinite() || (map.slope.array() == 0.0).any()) {
    throw Error(ErrorCode::InvalidInput, "position map needs finite, nonzero slopes");
  }
}

void validate(const ChipModel& chip) {
  if ((chip.resolution_ut.array() <= 0.0).any() || chip.min_period_ms <= 0.0 ||
      chip.sample_period_ms < chip.min_period_ms) {
    throw Error(ErrorCode::InvalidConfig, "chip resolutions must be positive and period >= min period");
  }
}

VecX FluxSample::stacked() const {
  VecX b(static_cast<Eigen::Index>(3 * flux.size()));
  for (std::size_t i = 0; i < flux.size(); ++i) b.segment<3>(static_cast<Eigen::Index>(3 * i)) = flux[i];
  return b;
}

FluxSample FluxSample::from_stacked(const VecX& b, double timestamp_ms) {
  if (b.size() % 3 != 0) throw Error(ErrorCode::InvalidInput, "flux stack length must be a multiple of 3");
  FluxSample s;
  s.timestamp_ms = timestamp_ms;
  s.flux.reserve(static_cast<std::size_t>(b.size() / 3));
  for (Eigen::Index i = 0; i < b.size(); i += 3) s.flux.emplace_back(b.segment<3>(i));
  return s;
}

Vec3 dipole_flux(const DipoleSource& src, const Transform& sensor_frame) {
  const Vec3 r = sensor_frame.translation - src.pose.translation;
  const double d = r.norm();
  if (!(d > kMinDistance)) {
    throw Error(ErrorCode::SingularField, "sensor within 0.1 mm of dipole");
  }
  const Vec3 m = src.moment * src.pose.rotation.col(2);
  const Vec3 rhat = r / d;
  const Vec3 b = kFieldScale * (3.0 * rhat * m.dot(rhat) - m) / (d * d * d);
  return sensor_frame.rotation.transpose() * b;
}

Mat3 dipole_gradient(const DipoleSource& src, const Vec3& point) {
  const Vec3 r = point - src.pose.translation;
  const double d = r.norm();
  if (!(d > kMinDistance)) {
    throw Error(ErrorCode::SingularField, "sensor within 0.1 mm of dipole");
  }
  const Vec3 m = src.moment * src.pose.rotation.col(2);
  const double mr = m.dot(r);
  const double d2 = d * d;
  const double d5 = d2 * d2 * d;
  const Mat3 grad = 3.0 * (mr * Mat3::Identity() + r * m.transpose() + m * r.transpose()) / d5 -
                    15.0 * mr * (r * r.transpose()) / (d5 * d2);
  return kFieldScale * grad;
}

Vec3 position_from_flux(const Vec3& b, const PositionMap& map) {
  return map.slope.cwiseProduct(b) + map.offset;
}

PositionMapFit fit_position_map(std::span<const SweepPoint> sweep, const Vec3& reference) {
  PositionMapFit fit;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> x;  // flux component
    std::vector<double> y;  // commanded position
    std::set<double> distinct;
    for (const auto& p : sweep) {
      if (static_cast<int>(p.axis) != axis) continue;
      x.push_back(p.flux_ut[axis]);
      y.push_back(p.commanded_mm);
      distinct.insert(p.commanded_mm);
    }
    if (distinct.size() < 2) {
      throw Error(ErrorCode::DegenerateSweep, "sweep axis " + std::to_string(axis) + " has fewer than 2 positions");
    }

    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
      syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) {
      throw Error(ErrorCode::DegenerateSweep, "flux is constant along sweep axis " + std::to_string(axis));
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - (slope * x[i] + intercept);
      ss_res += e * e;
    }
    fit.map.slope[axis] = slope;
    fit.map.offset[axis] = intercept + reference[axis];
    fit.r_squared[axis] = 1.0 - ss_res / syy;
  }
  return fit;
}

Vec3 quantize(const Vec3& b, const ChipModel& chip) {
  Vec3 q;
  for (int i = 0; i < 3; ++i) {
    const double lsb = chip.resolution_ut[i];
    q[i] = std::round(b[i] / lsb) * lsb;
  }
  return q;
}

std::vector<DipoleSource> default_magnet_sources(const SensorGeometry& g, double moment) {
  std::vector<DipoleSource> sources;
  sources.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) sources.push_back({moment, g.magnet_frame(i)});
  return sources;
}

FluxSample synthesize_sample(const SensorGeometry& g, const Transform& center_pose,
                             std::span<const DipoleSource> sources, const ChipModel& chip,
                             const SampleNoise& noise, std::uint64_t seed, double timestamp_ms) {
  if (sources.size() != g.size()) {
    throw Error(ErrorCode::InvalidInput, "need exactly one dipole source per sensor");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  FluxSample s;
  s.timestamp_ms = timestamp_ms;
  s.flux.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec3 b = dipole_flux(sources[i], center_pose * g.sensor_frames[i]);
    if (noise.sigma_ut > 0.0) {
      for (int k = 0; k < 3; ++k) b[k] += noise.sigma_ut * gauss(rng);
    }
    if (noise.quantize) b = quantize(b, chip);
    s.flux.push_back(b);
  }
  return s;
}

}  // namespace softft
