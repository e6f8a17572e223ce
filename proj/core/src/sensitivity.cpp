#include "softft/sensitivity.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace softft {

namespace {

BlockSensitivity block_sensitivity(const MatX& block) {
  BlockSensitivity out;
  if (block.size() == 0) return out;
  const VecX sv = Eigen::JacobiSVD<MatX>(block).singularValues();
  out.sigma_max = sv(0);
  out.sigma_min = sv(sv.size() - 1);
  out.isotropy = out.sigma_max > 0.0 ? out.sigma_min / out.sigma_max : 0.0;
  return out;
}

}  // namespace

double spectral_norm(const MatX& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<MatX>(m).singularValues()(0);
}

double wrench_error_bound(const MatX& ka, double delta_b_norm) {
  if (!(delta_b_norm >= 0.0)) throw Error(ErrorCode::InvalidInput, "perturbation norm must be >= 0");
  return spectral_norm(ka) * delta_b_norm;
}

SensitivityReport sensitivity_report(const MatX& ka) {
  if (ka.rows() != 6) throw Error(ErrorCode::InvalidInput, "KA must have 6 rows");
  if (!ka.allFinite()) throw Error(ErrorCode::InvalidInput, "KA has non-finite entries");
  SensitivityReport r;
  r.force = block_sensitivity(ka.topRows(3));
  r.torque = block_sensitivity(ka.bottomRows(3));
  r.sigma_max = spectral_norm(ka);
  return r;
}

SensitivityReport sensitivity_report(const MatX& ka, const MatX& tip_matrix) {
  SensitivityReport r = sensitivity_report(ka);
  r.tip_sigma_max = spectral_norm(tip_matrix);
  return r;
}

Vec6 range_estimate(const Mat6& k, const Vec6& max_deflection) {
  if ((max_deflection.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidInput, "deflection limits must be non-negative");
  }
  return k.diagonal().cwiseAbs().cwiseProduct(max_deflection);
}

}  // namespace softft
