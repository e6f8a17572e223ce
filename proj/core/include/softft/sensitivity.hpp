#pragma once

#include "softft/common.hpp"

#include <optional>

namespace softft {

/// Extreme singular values of one 3-row block of a wrench-per-flux matrix.
struct BlockSensitivity {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double isotropy = 0.0;  // sigma_min / sigma_max, 0 for a zero block
};

/**
 * Error amplification of w = KA b. Force rows are 0..2 (N/uT), torque rows
 * 3..5 (Nm/uT); each block is decomposed on its own.
 */
struct SensitivityReport {
  BlockSensitivity force;
  BlockSensitivity torque;
  double sigma_max = 0.0;                  // of the full KA
  std::optional<double> tip_sigma_max;     // of [Ad1 K1 A1 | Ad2 K2 A2] when a tip rig is analysed
};

double spectral_norm(const MatX& m);

/// sigma_max(KA) * |delta b|; bounds |KA delta b| for every perturbation of that norm.
double wrench_error_bound(const MatX& ka, double delta_b_norm);

SensitivityReport sensitivity_report(const MatX& ka);
SensitivityReport sensitivity_report(const MatX& ka, const MatX& tip_matrix);

/// |K_ii| * max_deflection_i per axis. Deflection units must match K's columns.
Vec6 range_estimate(const Mat6& k, const Vec6& max_deflection);

}  // namespace softft
