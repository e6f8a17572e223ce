#include "softft/calibration.hpp"

#include "parallel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <exception>
#include <limits>

namespace softft {

void validate(const CalibrationDataset& ds) {
  const Eigen::Index len = ds.records.empty() ? 0 : ds.records.front().flux.size();
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    if (!(r.mass_g > 0.0) || !std::isfinite(r.mass_g)) {
      throw Error(ErrorCode::InvalidInput, "mass must be positive", i);
    }
    if (r.flux.size() != len || len == 0 || len % 3 != 0) {
      throw Error(ErrorCode::InvalidInput, "inconsistent flux stack length", i);
    }
    if (!r.flux.allFinite() || !r.lever_mm.allFinite() || !r.flange_pose.translation.allFinite() ||
        !r.flange_pose.rotation.allFinite()) {
      throw Error(ErrorCode::InvalidInput, "non-finite record", i);
    }
  }
  if (ds.rest_flux && ds.rest_flux->size() != len && len != 0) {
    throw Error(ErrorCode::InvalidInput, "rest flux length differs from records");
  }
}

MatX pseudo_inverse(const MatX& m, double rel_tol) {
  if (m.size() == 0) return MatX::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<MatX> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecX& sv = svd.singularValues();
  const double cutoff = rel_tol * sv(0);
  VecX inv = VecX::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double condition_number(const MatX& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  const VecX sv = Eigen::JacobiSVD<MatX>(m).singularValues();
  const double lo = sv(sv.size() - 1);
  return lo > 0.0 ? sv(0) / lo : std::numeric_limits<double>::infinity();
}

Wrench gravity_wrench(const Transform& t_0_ee, const Vec3& lever_mm, double mass_g) {
  if (!(mass_g > 0.0)) throw Error(ErrorCode::InvalidInput, "mass must be positive");
  const Vec3 p_w = t_0_ee.apply(lever_mm);
  // {w} is world-aligned, so R_wC is the flange orientation.
  const Transform t_w_c{t_0_ee.rotation, (t_0_ee.translation - p_w) * kMmToM};
  const Wrench w_w{{0.0, 0.0, -mass_g * 1e-3 * kGravity}, Vec3::Zero()};
  return transform_wrench(t_w_c, w_w);
}

TwistFit fit_A(const MatX& b, const MatX& xi) {
  if (b.cols() != xi.cols()) throw Error(ErrorCode::InvalidInput, "B and Xi column counts differ");
  if (xi.rows() != 6) throw Error(ErrorCode::InvalidInput, "Xi must have 6 rows");
  if (b.cols() < b.rows()) {
    throw Error(ErrorCode::InvalidInput, "need at least " + std::to_string(b.rows()) + " records to fit A");
  }
  TwistFit fit;
  fit.a = xi * pseudo_inverse(b);
  fit.residual = (xi - fit.a * b).norm();
  fit.condition = condition_number(b);
  fit.rank_deficient = !(fit.condition <= 1e8);
  return fit;
}

StiffnessFit fit_K(const MatX& w, const MatX& a, const MatX& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::InvalidInput, "A and B shapes do not chain");
  if (w.rows() != 6 || w.cols() != b.cols()) throw Error(ErrorCode::InvalidInput, "W must be 6 x n");
  const MatX ab = a * b;

  const VecX sv = Eigen::JacobiSVD<MatX>(ab).singularValues();
  const double cutoff = 1e-10 * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += (sv(i) > cutoff && sv(i) > 0.0) ? 1 : 0;
  if (rank < 6) {
    throw Error(ErrorCode::RankDeficient,
                "A B has rank " + std::to_string(rank) + " < 6; stiffness is not identifiable");
  }

  StiffnessFit fit;
  fit.k = w * pseudo_inverse(ab);
  fit.residual = (w - fit.k * ab).norm();
  fit.condition = sv(0) / sv(sv.size() - 1);
  return fit;
}

CalibrationResult run_calibration(const CalibrationDataset& ds, const SensorGeometry& g, const PositionMap& map,
                                  const CalibrationOptions& options) {
  validate(ds);
  validate(map);
  const std::size_t n = ds.size();
  const auto channels = static_cast<Eigen::Index>(3 * g.size());
  if (n < static_cast<std::size_t>(channels)) {
    throw Error(ErrorCode::InvalidInput, "need at least " + std::to_string(channels) + " calibration records");
  }
  if (ds.records.front().flux.size() != channels) {
    throw Error(ErrorCode::InvalidInput, "flux stacks do not match the sensor geometry");
  }
  if (options.subtract_rest_flux && !ds.rest_flux) {
    throw Error(ErrorCode::InvalidInput, "rest flux subtraction requested but the dataset has none");
  }

  const auto cols = static_cast<Eigen::Index>(n);
  MatX b(channels, cols);
  MatX xi(6, cols);
  MatX w(6, cols);
  std::vector<std::exception_ptr> failures(n);

  detail::parallel_for(n, [&](std::size_t i) {
    try {
      const auto& rec = ds.records[i];
      const auto col = static_cast<Eigen::Index>(i);
      xi.col(col) = twist_from_flux(g, map, FluxSample::from_stacked(rec.flux)).vector();
      w.col(col) = gravity_wrench(rec.flange_pose, rec.lever_mm, rec.mass_g).vector();
      b.col(col) = options.subtract_rest_flux ? VecX(rec.flux - *ds.rest_flux) : rec.flux;
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      throw e.with_record(i);
    }
  }

  const TwistFit twist_fit = fit_A(b, xi);
  const StiffnessFit stiffness_fit = fit_K(w, twist_fit.a, b);

  CalibrationResult r;
  r.a = twist_fit.a;
  r.k = stiffness_fit.k;
  r.twist_residual = twist_fit.residual;
  r.condition_b = twist_fit.condition;
  r.condition_ab = stiffness_fit.condition;
  r.b_rank_deficient = twist_fit.rank_deficient;
  r.records = n;
  r.position_map = map;
  if (options.subtract_rest_flux) r.flux_bias = *ds.rest_flux;

  const MatX ka = r.ka();
  const MatX err = w - ka * b;
  r.residual_rms = (err.array().square().rowwise().sum() / static_cast<double>(n)).sqrt().matrix();
  r.sensitivity = sensitivity_report(ka);
  return r;
}

}  // namespace softft
