// One line per acceptance criterion: "ACn PASS|FAIL <summary>".

#include "oracle.hpp"

#include "softft/datalog.hpp"
#include "softft/estimation.hpp"
#include "softft/simulation.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace softft;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec6 validation_rmse(const Estimator& e, const CalibrationDataset& val) {
  Vec6 ss = Vec6::Zero();
  for (const auto& rec : val.records) {
    const Vec6 err = estimate_wrench(e, rec.flux).vector() -
                     gravity_wrench(rec.flange_pose, rec.lever_mm, rec.mass_g).vector();
    ss += err.cwiseAbs2();
  }
  return (ss / double(val.size())).cwiseSqrt();
}

Outcome ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  WorldConfig cfg;
  cfg.model = FluxModelKind::Linear;
  World world(cfg);
  const auto ds = world.make_dataset(calibration_poses(2024), 2024);
  const auto r = run_calibration(ds, world.geometry(), world.linear_map());
  const auto val = world.make_dataset(validation_poses(2025), 2025);
  const Vec6 rmse = validation_rmse(Estimator::from_calibration(r), val);
  const double dt = seconds_since(t0);
  const double f = rmse.head<3>().maxCoeff(), m = rmse.tail<3>().maxCoeff();
  return {ds.size() == 193 && f < 1e-9 && m < 1e-9 && dt < 10.0,
          fmt("linear closed loop, 193 poses: held-out max RMSE %.2e N, %.2e Nm (< 1e-9); %.2f s (< 10 s)", f, m, dt)};
}

Outcome ac2() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = true;
  for (FluxModelKind kind : {FluxModelKind::Linear, FluxModelKind::Dipole}) {
    WorldConfig cfg;
    cfg.model = kind;
    cfg.noise = {1.0, true};
    cfg.window = 100;
    World world(cfg);
    PositionMap map = world.linear_map();
    if (kind == FluxModelKind::Dipole) map = fit_position_map(bench_sweep(world, 7), sweep_reference(world)).map;
    const auto r = run_calibration(world.make_dataset(calibration_poses(7), 7), world.geometry(), map);
    const Vec6 rmse = validation_rmse(Estimator::from_calibration(r), world.make_dataset(validation_poses(8), 8));
    const double f = rmse.head<3>().maxCoeff(), m = rmse.tail<3>().maxCoeff() * 1e3;
    pass = pass && f < 0.5 && m < 15.0;
    detail += fmt("%s world: max force RMSE %.4f N (< 0.5), max torque RMSE %.3f mNm (< 15); ",
                  kind == FluxModelKind::Linear ? "linear" : "dipole", f, m);
  }
  const double dt = seconds_since(t0);
  pass = pass && dt < 60.0;
  return {pass, detail + fmt("1 LSB + 1 uT + 100-sample mean, 100 g set, %.2f s (< 60 s)", dt)};
}

Outcome ac3() {
  std::mt19937_64 rng(33);
  const auto src = nominal_magnet_positions(build_geometry({}));
  const double max_angle = 20.0 * std::numbers::pi / 180.0;
  double worst = 0.0;
  int proper = 0, total = 0;
  for (int i = 0; i < 1000; ++i) {
    Vec3 t = oracle::random_vec(rng, 1.0);
    while (t.norm() > 1.0) t = oracle::random_vec(rng, 1.0);
    const Transform truth{oracle::random_rotation(rng, max_angle), 3.0 * t};
    std::vector<Vec3> dst;
    for (const auto& p : src) dst.push_back(truth.apply(p));
    const Transform est = arun_register({src, dst});
    worst = std::max(worst, oracle::pose_error(est, truth));
    proper += std::abs(est.rotation.determinant() - 1.0) < 1e-12 && is_rotation(est.rotation, 1e-12);
    ++total;
  }
  int traps = 0, traps_fired = 0;
  for (int i = 0; i < 200; ++i) {
    std::vector<Vec3> a, b;
    const bool mirror = i % 2 == 0;
    for (int k = 0; k < 8; ++k) {
      Vec3 p = oracle::random_vec(rng, 10.0);
      if (!mirror) p.z() = 0.0;  // coplanar cloud, H has rank 2
      a.push_back(p);
    }
    const Transform g{oracle::random_rotation(rng, 3.0), oracle::random_vec(rng, 3.0)};
    for (const auto& p : a) b.push_back(mirror ? g.apply(Vec3(p.x(), p.y(), -p.z())) : g.apply(p));
    const RegistrationResult r = arun_register_detailed({a, b});
    traps_fired += r.reflection_corrected;
    proper += std::abs(r.pose.rotation.determinant() - 1.0) < 1e-12 && is_rotation(r.pose.rotation, 1e-12);
    ++total;
    ++traps;
  }
  return {worst < 1e-9 && proper == total,
          fmt("1000 poses (<= 20 deg, <= 3 mm): max pose error %.2e (< 1e-9); det(R) = +1 in %d/%d incl. %d "
              "reflection traps (%d needed the sign correction)",
              worst, proper, total, traps, traps_fired)};
}

Outcome ac4() {
  WorldConfig cfg;
  World world(cfg);
  const auto r = run_calibration(world.make_dataset(calibration_poses(4), 4), world.geometry(), world.linear_map());
  const MatX ka = r.ka();
  const double smax = oracle::sigma_max(ka);
  const double bound_unit = wrench_error_bound(ka, 1.0);

  std::mt19937_64 rng(44);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> mag(0.0, 50.0);
  int violations = 0;
  double best_random = 0.0;
  VecX d(ka.cols());
  for (int i = 0; i < 100000; ++i) {
    for (auto& x : d) x = g(rng);
    d *= mag(rng) / d.norm();
    const double n = d.norm();
    const double lhs = (ka * d).norm();
    if (lhs > wrench_error_bound(ka, n) * (1.0 + 1e-12)) ++violations;
    if (n > 0) best_random = std::max(best_random, lhs / n);
  }

  // supremum by power iteration on (KA)^T KA from random starts
  double sup = 0.0;
  for (int s = 0; s < 5; ++s) {
    for (auto& x : d) x = g(rng);
    d.normalize();
    for (int it = 0; it < 200; ++it) {
      d = ka.transpose() * (ka * d);
      d.normalize();
    }
    sup = std::max(sup, (ka * d).norm());
  }
  return {violations == 0 && sup >= 0.99 * bound_unit && std::abs(bound_unit - smax) < 1e-12 * smax,
          fmt("1e5 random perturbations: %d violations; power-iteration supremum %.6f of sigma_max "
              "(>= 0.99); best random direction %.3f",
              violations, sup / bound_unit, best_random / bound_unit)};
}

Outcome ac5() {
  double worst = 0.0;
  // p = M b + o with the reported map, b = [10, 20, 30] uT
  const Vec3 p = position_from_flux(Vec3(10, 20, 30), PositionMap::reference_fit());
  worst = std::max(worst, (p - Vec3(-17.577, -10.644, 6.065)).cwiseAbs().maxCoeff());
  const Vec3 p0 = position_from_flux(Vec3(0, 0, 0), PositionMap::reference_fit());
  worst = std::max(worst, (p0 - Vec3(-22, -18, 8)).cwiseAbs().maxCoeff());

  // w = K A b with the reported K; A picks the first six channels scaled by 1e-3
  MatX a = MatX::Zero(6, 24);
  a.leftCols(6) = 1e-3 * MatX::Identity(6, 6);
  const Estimator e(a, oracle::reported_k());
  VecX b = VecX::Zero(24);
  b[0] = 1.0;
  Vec6 expect;
  expect << -8.82, 1.53, 39.70, -0.13, -0.76, 0.08;
  worst = std::max(worst, (estimate_wrench(e, b).vector() - expect).cwiseAbs().maxCoeff());
  b[1] = 1.0;
  expect << -20.15, 14.30, 66.82, -0.56, -1.30, 0.10;
  worst = std::max(worst, (estimate_wrench(e, b).vector() - expect).cwiseAbs().maxCoeff());
  b.setZero();
  b[5] = 2.0;
  expect << 0.04, -0.12, -0.08, 0.0, 0.0, 0.02;
  worst = std::max(worst, (estimate_wrench(e, b).vector() - expect).cwiseAbs().maxCoeff());

  const MatX ka = oracle::block_fixture({6.07e-3, 4.2e-3, 2.88e-3}, {2.26e-3, 1.81e-3, 1.48e-3}, 5);
  const SensitivityReport s = sensitivity_report(ka);
  const double fi = std::round(s.force.isotropy * 100) / 100, ti = std::round(s.torque.isotropy * 100) / 100;
  return {worst < 1e-12 && fi == 0.47 && ti == 0.65,
          fmt("reported M/o and K products: max deviation %.1e (< 1e-12); isotropy force %.2f, torque %.2f "
              "(0.47 / 0.65)",
              worst, fi, ti)};
}

Outcome ac6() {
  // reported K (x1e3) against metres and radians; angular limits from the 3 mm axial and
  // 6 mm tangential travel over the 15 mm ring radius
  Vec6 lim;
  lim << 0.006, 0.006, 0.003, 0.2, 0.2, 0.4;
  const Vec6 r = range_estimate(oracle::reported_k(), lim);
  Vec6 claim;
  claim << 50, 50, 20, 0.2, 0.2, 0.2;
  bool pass = true;
  std::string detail = "range vs claim (+-30%):";
  const char* names[6] = {"Fx", "Fy", "Fz", "Mx", "My", "Mz"};
  for (int i = 0; i < 6; ++i) {
    const double rel = r[i] / claim[i] - 1.0;
    const bool ok = std::abs(rel) <= 0.30;
    pass = pass && ok;
    detail += fmt(" %s %.3g/%.3g (%+.0f%%%s)", names[i], r[i], claim[i], 100 * rel, ok ? "" : " out");
  }
  return {pass, detail + "; units of the reported K and angular limits are not stated"};
}

Outcome ac7() {
  std::string detail;
  bool pass = true;
  for (double sigma : {0.0, 1.0}) {
    WorldConfig cfg;
    cfg.noise = {sigma, sigma > 0};
    World world(cfg);
    const auto fit = fit_position_map(bench_sweep(world, 77), sweep_reference(world));
    pass = pass && fit.r_squared.minCoeff() >= 0.98;
    detail += fmt("%s R^2 x %.4f y %.4f z %.4f; ", sigma > 0 ? "noisy+quantised" : "clean", fit.r_squared.x(),
                  fit.r_squared.y(), fit.r_squared.z());
  }
  return {pass, "dipole sweep " + detail + "threshold 0.98"};
}

Outcome ac8() {
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 w = oracle::random_vec(rng, 1.0).normalized() * (std::numbers::pi - 0.1) * u(rng);
    Vec6 xi;
    xi << oracle::random_vec(rng, 10.0), w;
    worst = std::max(worst, (log_se3(exp_se3(Twist::from_vector(xi))).vector() - xi).norm());
  }
  double comp = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Transform a{oracle::random_rotation(rng, 3.0), oracle::random_vec(rng, 0.1)};
    const Transform b{oracle::random_rotation(rng, 3.0), oracle::random_vec(rng, 0.1)};
    const Wrench w{oracle::random_vec(rng, 10), oracle::random_vec(rng, 1)};
    comp = std::max(comp, (transform_wrench(b, transform_wrench(a, w)).vector() -
                           transform_wrench(a * b, w).vector()).norm());
  }
  return {worst < 1e-10 && comp < 1e-12,
          fmt("1000 twists: max |log(exp(xi)) - xi| %.2e (< 1e-10); wrench composition error %.2e (< 1e-12)", worst,
              comp)};
}

Outcome ac9() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> byte(0, 255), op(0, 5);

  std::string seed_log;
  for (int f = 0; f < 6; ++f) {
    for (int i = 0; i < 8; ++i) {
      seed_log += (i == 0 ? "t=" + std::to_string(10 * f) + " " : "") + "S" + std::to_string(i) + ": " +
                  std::to_string(f * 3 - i) + " " + std::to_string(i) + " -" + std::to_string(f) + "\n";
    }
  }
  const std::string alphabet = "S0123456789:t=.-+eE \n\t\r,";

  int crashes = 0, inconsistent = 0;
  for (int n = 0; n < 10000; ++n) {
    std::string s = seed_log;
    if (n % 4 == 0) {
      s.assign(static_cast<std::size_t>(byte(rng)) * 4, '\0');
      for (auto& c : s) c = static_cast<char>(byte(rng));
    } else {
      std::uniform_int_distribution<int> edits(1, 30);
      for (int k = edits(rng); k > 0 && !s.empty(); --k) {
        std::uniform_int_distribution<std::size_t> at(0, s.size() - 1);
        const char c = n % 3 ? alphabet[std::size_t(byte(rng)) % alphabet.size()] : static_cast<char>(byte(rng));
        switch (op(rng)) {
          case 0: s[at(rng)] = c; break;
          case 1: s.insert(at(rng), 1, c); break;
          case 2: s.erase(at(rng), 1); break;
          case 3: s.insert(at(rng), "\xE2\x88\x92"); break;
          case 4: s += s.substr(at(rng), 40); break;
          default: s.insert(at(rng), "S" + std::to_string(byte(rng) % 12) + ": 1e308 9e999 -0\n"); break;
        }
      }
    }
    try {
      ParseOptions opt;
      if (n % 5 == 0) opt.units = FluxUnits::Lsb;
      const ParsedLog log = parse_serial_log_lenient(s, opt);
      bool ok = log.samples.size() == log.report.frames_parsed && log.report.bad_lines <= log.report.lines;
      for (const auto& smp : log.samples) ok = ok && smp.size() == 8 && smp.stacked().allFinite();
      inconsistent += !ok;
    } catch (...) {
      ++crashes;
    }
  }

  WorldConfig cfg;
  cfg.noise = {1.0, true};
  cfg.window = 3;
  World world(cfg);
  const auto ds = world.make_dataset(calibration_poses(9), 9);
  std::stringstream first;
  write_dataset(first, ds);
  std::stringstream in(first.str());
  const auto back = read_dataset(in);
  bool identical = back.size() == ds.size() && back.rest_flux && *back.rest_flux == *ds.rest_flux;
  for (std::size_t i = 0; identical && i < ds.size(); ++i) identical = back.records[i] == ds.records[i];
  std::stringstream second;
  write_dataset(second, back);
  identical = identical && second.str() == first.str();

  return {crashes == 0 && inconsistent == 0 && identical,
          fmt("1e4 fuzzed logs: %d crashes, %d report inconsistencies; 193-record CSV round trip %s", crashes,
              inconsistent, identical ? "bit-identical" : "DIFFERS")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
