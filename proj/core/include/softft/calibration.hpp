#pragma once

#include "softft/registration.hpp"
#include "softft/sensitivity.hpp"

#include <optional>
#include <vector>

namespace softft {

/// One static calibration pose: flange pose, hanging mass, CAD lever and the averaged ring reading.
struct CalibrationRecord {
  Transform flange_pose;     // {ee} in world; the sensor center frame {C} coincides with {ee}
  double mass_g = 0.0;
  Vec3 lever_mm = Vec3::Zero();  // mass center {w} in {ee}
  VecX flux;                 // b-hat, uT

  friend bool operator==(const CalibrationRecord& a, const CalibrationRecord& b) {
    return a.flange_pose.rotation == b.flange_pose.rotation &&
           a.flange_pose.translation == b.flange_pose.translation && a.mass_g == b.mass_g &&
           a.lever_mm == b.lever_mm && a.flux.size() == b.flux.size() && a.flux == b.flux;
  }
};

struct CalibrationDataset {
  std::vector<CalibrationRecord> records;
  std::optional<VecX> rest_flux;  // ring reading at zero load, when known

  std::size_t size() const { return records.size(); }
};

/// Checks finiteness, positive masses and a common flux length; throws InvalidInput tagged with the record.
void validate(const CalibrationDataset& ds);

/// Moore-Penrose pseudoinverse via SVD; singular values below rel_tol * sigma_max are dropped.
MatX pseudo_inverse(const MatX& m, double rel_tol = 1e-10);

/// sigma_max / sigma_min over all min(rows, cols) singular values (infinity when singular).
double condition_number(const MatX& m);

/**
 * Gravity load of a point mass on the sensor center. The mass frame {w} is
 * world-aligned at T_0_ee * lever, so w_w = [0, 0, -m g, 0, 0, 0] and the
 * center sees Ad(T_wC)^T w_w.
 */
Wrench gravity_wrench(const Transform& t_0_ee, const Vec3& lever_mm, double mass_g);

struct TwistFit {
  MatX a;                 // 6 x 24, twist per uT
  double residual = 0.0;  // ||Xi - A B||_F
  double condition = 0.0; // of B
  bool rank_deficient = false;  // cond(B) > 1e8; the fit is still returned
};

/// A = Xi B^+. Needs at least as many columns as flux channels.
TwistFit fit_A(const MatX& b, const MatX& xi);

struct StiffnessFit {
  Mat6 k = Mat6::Zero();
  double residual = 0.0;   // ||W - K A B||_F
  double condition = 0.0;  // of A B
};

/// K = W (A B)^+. Throws RankDeficient when rank(A B) < 6.
StiffnessFit fit_K(const MatX& w, const MatX& a, const MatX& b);

struct CalibrationOptions {
  bool subtract_rest_flux = false;  // fit on b - b_rest instead of raw b (needs dataset.rest_flux)
};

struct CalibrationResult {
  MatX a;  // 6 x 24
  Mat6 k = Mat6::Zero();
  Vec6 residual_rms = Vec6::Zero();  // training wrench residual per axis (N, Nm)
  double twist_residual = 0.0;       // ||Xi - A B||_F
  double condition_b = 0.0;
  double condition_ab = 0.0;
  bool b_rank_deficient = false;
  SensitivityReport sensitivity;
  std::size_t records = 0;
  PositionMap position_map;
  std::optional<VecX> flux_bias;     // subtracted from b before applying A

  MatX ka() const { return k * a; }
};

/// Full pipeline: per record twist via registration, then A and K fits and diagnostics.
CalibrationResult run_calibration(const CalibrationDataset& ds, const SensorGeometry& g, const PositionMap& map,
                                  const CalibrationOptions& options = {});

}  // namespace softft
