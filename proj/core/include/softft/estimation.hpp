#pragma once

#include "softft/calibration.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace softft {

/// Runtime wrench estimator w = K A (b - bias). Immutable after construction.
class Estimator {
 public:
  Estimator(MatX a, const Mat6& k, std::size_t window = 1, std::optional<VecX> flux_bias = std::nullopt);

  static Estimator from_calibration(const CalibrationResult& r, std::size_t window = 1);

  const MatX& a() const { return a_; }
  const Mat6& k() const { return k_; }
  const MatX& ka() const { return ka_; }
  std::size_t window() const { return window_; }
  Eigen::Index channels() const { return a_.cols(); }
  const std::optional<VecX>& flux_bias() const { return flux_bias_; }

 private:
  MatX a_;
  Mat6 k_;
  MatX ka_;
  std::size_t window_;
  std::optional<VecX> flux_bias_;
};

Wrench estimate_wrench(const Estimator& e, const VecX& b);

/**
 * Two sensors on one tool shaft, frames parallel to the tip frame. Lever arms
 * run from the tip to each sensor center, in mm, expressed in the tip frame.
 */
struct TipRig {
  Estimator first;
  Estimator second;
  Vec3 lever_first_mm = Vec3::Zero();
  Vec3 lever_second_mm = Vec3::Zero();
};

void validate(const TipRig& rig);

/// f = f1 + f2; m = m1 + m2 + p1 x f1 + p2 x f2.
Wrench estimate_tip_wrench(const TipRig& rig, const VecX& b1, const VecX& b2);

/// [Ad1 K1 A1 | Ad2 K2 A2] with Ad_i = [[I, 0], [hat(p_i), I]] (p in metres).
MatX tip_matrix(const TipRig& rig);

/// Same wrench via the stacked matrix applied to [b1; b2].
Wrench estimate_tip_wrench_stacked(const TipRig& rig, const VecX& b1, const VecX& b2);

inline constexpr std::uint32_t kFlagGap = 1u << 0;

struct StampedWrench {
  double timestamp_ms = 0.0;  // last sample of the window
  Wrench wrench;
  std::uint32_t flags = 0;
};

/// Pull-based source of ring readings with non-decreasing timestamps.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::optional<FluxSample> next() = 0;
};

class VectorSource final : public SampleSource {
 public:
  explicit VectorSource(std::vector<FluxSample> samples) : samples_(std::move(samples)) {}
  std::optional<FluxSample> next() override;

 private:
  std::vector<FluxSample> samples_;
  std::size_t pos_ = 0;
};

/**
 * Incremental block-mean estimator. Emits one wrench per `window` samples;
 * a gap above 2x the nominal period anywhere since the last emission sets
 * kFlagGap on the next emission. Timestamps going backwards throw InvalidInput.
 */
class WrenchStream {
 public:
  explicit WrenchStream(const Estimator& e, double nominal_period_ms = 10.0);

  std::optional<StampedWrench> push(const FluxSample& s);

 private:
  const Estimator* estimator_;
  double period_ms_;
  VecX sum_;
  std::size_t count_ = 0;
  std::optional<double> last_ts_;
  bool gap_ = false;
};

std::vector<StampedWrench> stream(const Estimator& e, SampleSource& source, double nominal_period_ms = 10.0);

/// "timestamp_ms,fx,fy,fz,mx,my,mz,flags" with 17 significant digits.
std::string format_stream_record(const StampedWrench& w);
inline constexpr const char* kStreamHeader = "timestamp_ms,fx,fy,fz,mx,my,mz,flags";

}  // namespace softft
