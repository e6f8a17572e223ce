#include "softft/estimation.hpp"

#include <cstdio>

namespace softft {

Estimator::Estimator(MatX a, const Mat6& k, std::size_t window, std::optional<VecX> flux_bias)
    : a_(std::move(a)), k_(k), window_(window), flux_bias_(std::move(flux_bias)) {
  if (a_.rows() != 6 || a_.cols() == 0) throw Error(ErrorCode::InvalidInput, "A must be 6 x channels");
  if (window_ == 0) throw Error(ErrorCode::InvalidInput, "averaging window must be >= 1");
  if (flux_bias_ && flux_bias_->size() != a_.cols()) {
    throw Error(ErrorCode::InvalidInput, "flux bias length differs from A");
  }
  ka_ = k_ * a_;
}

Estimator Estimator::from_calibration(const CalibrationResult& r, std::size_t window) {
  return Estimator(r.a, r.k, window, r.flux_bias);
}

Wrench estimate_wrench(const Estimator& e, const VecX& b) {
  if (b.size() != e.channels()) throw Error(ErrorCode::InvalidInput, "flux stack length differs from A");
  if (!b.allFinite()) throw Error(ErrorCode::InvalidInput, "flux stack is not finite");
  if (e.flux_bias()) return Wrench::from_vector(e.ka() * (b - *e.flux_bias()));
  return Wrench::from_vector(e.ka() * b);
}

void validate(const TipRig& rig) {
  if (rig.lever_first_mm == rig.lever_second_mm) {
    throw Error(ErrorCode::InvalidInput, "tip rig sensors must sit at distinct stations");
  }
}

Wrench estimate_tip_wrench(const TipRig& rig, const VecX& b1, const VecX& b2) {
  validate(rig);
  const Wrench w1 = estimate_wrench(rig.first, b1);
  const Wrench w2 = estimate_wrench(rig.second, b2);
  const Vec3 p1 = rig.lever_first_mm * kMmToM;
  const Vec3 p2 = rig.lever_second_mm * kMmToM;
  return {w1.force + w2.force, w1.moment + w2.moment + p1.cross(w1.force) + p2.cross(w2.force)};
}

namespace {

Mat6 tip_adjoint(const Vec3& lever_mm) {
  Mat6 ad = Mat6::Identity();
  ad.bottomLeftCorner<3, 3>() = hat(lever_mm * kMmToM);
  return ad;
}

}  // namespace

MatX tip_matrix(const TipRig& rig) {
  validate(rig);
  const Eigen::Index n1 = rig.first.channels();
  const Eigen::Index n2 = rig.second.channels();
  MatX m(6, n1 + n2);
  m.leftCols(n1) = tip_adjoint(rig.lever_first_mm) * rig.first.ka();
  m.rightCols(n2) = tip_adjoint(rig.lever_second_mm) * rig.second.ka();
  return m;
}

Wrench estimate_tip_wrench_stacked(const TipRig& rig, const VecX& b1, const VecX& b2) {
  VecX b1c = rig.first.flux_bias() ? VecX(b1 - *rig.first.flux_bias()) : b1;
  VecX b2c = rig.second.flux_bias() ? VecX(b2 - *rig.second.flux_bias()) : b2;
  VecX stacked(b1c.size() + b2c.size());
  stacked << b1c, b2c;
  return Wrench::from_vector(tip_matrix(rig) * stacked);
}

std::optional<FluxSample> VectorSource::next() {
  if (pos_ >= samples_.size()) return std::nullopt;
  return samples_[pos_++];
}

WrenchStream::WrenchStream(const Estimator& e, double nominal_period_ms)
    : estimator_(&e), period_ms_(nominal_period_ms), sum_(VecX::Zero(e.channels())) {
  if (!(nominal_period_ms > 0.0)) throw Error(ErrorCode::InvalidInput, "nominal period must be positive");
}

std::optional<StampedWrench> WrenchStream::push(const FluxSample& s) {
  if (last_ts_) {
    if (s.timestamp_ms < *last_ts_) {
      throw Error(ErrorCode::InvalidInput, "sample timestamps went backwards");
    }
    if (s.timestamp_ms - *last_ts_ > 2.0 * period_ms_) gap_ = true;
  }
  last_ts_ = s.timestamp_ms;

  sum_ += s.stacked();
  if (++count_ < estimator_->window()) return std::nullopt;

  StampedWrench out;
  out.timestamp_ms = s.timestamp_ms;
  out.wrench = estimate_wrench(*estimator_, sum_ / static_cast<double>(count_));
  out.flags = gap_ ? kFlagGap : 0u;
  sum_.setZero();
  count_ = 0;
  gap_ = false;
  return out;
}

std::vector<StampedWrench> stream(const Estimator& e, SampleSource& source, double nominal_period_ms) {
  WrenchStream ws(e, nominal_period_ms);
  std::vector<StampedWrench> out;
  while (auto s = source.next()) {
    if (auto w = ws.push(*s)) out.push_back(*w);
  }
  return out;
}

std::string format_stream_record(const StampedWrench& w) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%u", w.timestamp_ms,
                w.wrench.force.x(), w.wrench.force.y(), w.wrench.force.z(), w.wrench.moment.x(),
                w.wrench.moment.y(), w.wrench.moment.z(), w.flags);
  return buf;
}

}  // namespace softft
