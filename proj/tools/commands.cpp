#include "commands.hpp"

#include "softft/datalog.hpp"
#include "softft/estimation.hpp"
#include "softft/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

namespace softft::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Options {
  std::optional<std::uint64_t> seed;
  double noise_ut = 0.0;
  bool quantize = false;
  std::size_t window = 100;
  std::string geometry;
  std::string out = ".";
  std::string dataset;
  std::string calibration;
  std::string position_map;
  std::string log;
  std::string world = "dipole";
  std::size_t poses = 0;  // 0: command default
  bool subtract_rest = false;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::uint64_t need_seed(const Options& o) {
  if (!o.seed) throw Error(ErrorCode::InvalidConfig, "--seed is required for synthetic runs");
  return *o.seed;
}

WorldConfig world_config(const Options& o) {
  WorldConfig cfg;
  if (!o.geometry.empty()) cfg.geometry = load_geometry_config(o.geometry);
  if (o.world == "linear") cfg.model = FluxModelKind::Linear;
  else if (o.world == "dipole") cfg.model = FluxModelKind::Dipole;
  else throw Error(ErrorCode::InvalidConfig, "--world must be linear or dipole");
  cfg.noise = {o.noise_ut, o.quantize};
  cfg.window = o.window;
  return cfg;
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + o.out + ": " + ec.message());
  return dir;
}

std::string path_in(const fs::path& dir, const char* name) { return (dir / name).string(); }

void write_stream(const std::string& path, const auto& fill) {
  std::ostringstream ss;
  fill(ss);
  write_text_file(path, ss.str());
}

// Map used for a given world: the bench fit for the dipole world, the exact inverse otherwise.
PositionMapFit synthetic_map(const World& world, std::uint64_t seed) {
  if (world.config().model == FluxModelKind::Linear) return {world.linear_map(), Vec3::Ones()};
  return fit_position_map(bench_sweep(world, seed), sweep_reference(world));
}

void print_matrix(std::ostream& out, const MatX& m, int digits) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << "  ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%12.*f", digits, m(r, c));
      out << buf;
    }
    out << '\n';
  }
}

void print_sensitivity(std::ostream& out, const SensitivityReport& s) {
  out << "force:  sigma_max = " << sci(s.force.sigma_max) << " N/uT, sigma_min = " << sci(s.force.sigma_min)
      << " N/uT, isotropy = " << fixed(s.force.isotropy, 2) << '\n';
  out << "torque: sigma_max = " << sci(s.torque.sigma_max) << " Nm/uT, sigma_min = " << sci(s.torque.sigma_min)
      << " Nm/uT, isotropy = " << fixed(s.torque.isotropy, 2) << '\n';
  out << "sigma_max(KA) = " << sci(s.sigma_max) << '\n';
}

// ---------------------------------------------------------------------------

int cmd_sweep(const Options& o, std::ostream& out) {
  const std::uint64_t seed = need_seed(o);
  World world(world_config(o));
  const auto sweep = bench_sweep(world, seed);
  const PositionMapFit fit = fit_position_map(sweep, sweep_reference(world));

  const fs::path dir = out_dir(o);
  write_stream(path_in(dir, "sweep.csv"), [&](std::ostream& s) { write_sweep(s, sweep); });
  write_text_file(path_in(dir, "position_map.json"), position_map_to_json(fit));

  out << "sweep: " << sweep.size() << " points (" << o.world << " source)\n";
  out << "axis  slope_mm_per_uT     intercept_mm   R^2\n";
  for (int k = 0; k < 3; ++k) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-4c  %-16.6e  %-13.6f  %.4f\n", "xyz"[k], fit.map.slope[k], fit.map.offset[k],
                  fit.r_squared[k]);
    out << buf;
  }
  return 0;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
  World world(world_config(o));
  const fs::path dir = out_dir(o);

  CalibrationDataset ds;
  PositionMapFit map{world.linear_map(), Vec3::Ones()};
  if (!o.dataset.empty()) {
    ds = read_dataset(o.dataset);
  } else {
    const std::uint64_t seed = need_seed(o);
    ds = world.make_dataset(calibration_poses(seed, o.poses ? o.poses : 193), seed);
    map = synthetic_map(world, seed);
    write_dataset(path_in(dir, "calibration_dataset.csv"), ds);
  }
  if (!o.position_map.empty()) map.map = position_map_from_json(read_text_file(o.position_map));

  CalibrationOptions opt;
  opt.subtract_rest_flux = o.subtract_rest;
  const CalibrationResult r = run_calibration(ds, world.geometry(), map.map, opt);

  write_text_file(path_in(dir, "calibration.json"), calibration_to_json(r));
  write_text_file(path_in(dir, "sensitivity.json"), sensitivity_to_json(r.sensitivity));

  out << "calibration: " << r.records << " records\n";
  out << "K (N/mm | Nm/rad columns, [v; w] order):\n";
  print_matrix(out, r.k, 4);
  out << "training residual RMS (N, N, N, Nm, Nm, Nm):";
  for (int i = 0; i < 6; ++i) out << ' ' << sci(r.residual_rms[i]);
  out << "\ncond(B) = " << sci(r.condition_b) << (r.b_rank_deficient ? " (RankDeficient warning)" : "")
      << ", cond(AB) = " << sci(r.condition_ab) << '\n';
  print_sensitivity(out, r.sensitivity);
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out) {
  if (o.calibration.empty()) throw Error(ErrorCode::InvalidConfig, "--calibration is required");
  const CalibrationResult cal = calibration_from_json(read_text_file(o.calibration));
  const Estimator e = Estimator::from_calibration(cal);

  CalibrationDataset val;
  if (!o.dataset.empty()) {
    val = read_dataset(o.dataset);
  } else {
    const std::uint64_t seed = need_seed(o);
    World world(world_config(o));
    val = world.make_dataset(validation_poses(seed, o.poses ? o.poses : 60, 100.0), seed);
  }
  if (val.size() == 0) throw Error(ErrorCode::InvalidInput, "validation set is empty");

  const fs::path dir = out_dir(o);
  Vec6 ss = Vec6::Zero();
  std::ostringstream rows;
  rows << "index,mass_g,fx_true,fy_true,fz_true,mx_true,my_true,mz_true,fx_est,fy_est,fz_est,mx_est,my_est,mz_est\n";
  for (std::size_t i = 0; i < val.size(); ++i) {
    const auto& rec = val.records[i];
    const Vec6 truth = gravity_wrench(rec.flange_pose, rec.lever_mm, rec.mass_g).vector();
    const Vec6 est = estimate_wrench(e, rec.flux).vector();
    ss += (est - truth).cwiseAbs2();
    rows << i << ',' << num(rec.mass_g);
    for (int k = 0; k < 6; ++k) rows << ',' << num(truth[k]);
    for (int k = 0; k < 6; ++k) rows << ',' << num(est[k]);
    rows << '\n';
  }
  write_text_file(path_in(dir, "validation_records.csv"), rows.str());

  Vec6 rmse = (ss / static_cast<double>(val.size())).cwiseSqrt();
  rmse.tail<3>() *= 1e3;  // mNm

  std::ostringstream table;
  table << "Quantity,Fx,Fy,Fz,Mx,My,Mz\n";
  table << "RMS error";
  for (int k = 0; k < 6; ++k) table << ',' << num(rmse[k]);
  table << "\nUnits,N,N,N,mNm,mNm,mNm\n";
  write_text_file(path_in(dir, "validation.csv"), table.str());

  const double force_norm = rmse.head<3>().norm();
  const double torque_norm = rmse.tail<3>().norm() * 1e-3;
  ordered_json summary;
  summary["records"] = val.size();
  summary["rmse"] = {{"Fx", rmse[0]}, {"Fy", rmse[1]}, {"Fz", rmse[2]},
                     {"Mx", rmse[3]}, {"My", rmse[4]}, {"Mz", rmse[5]}};
  summary["units"] = {"N", "N", "N", "mNm", "mNm", "mNm"};
  summary["force_norm_N"] = force_norm;
  summary["torque_norm_Nm"] = torque_norm;
  write_text_file(path_in(dir, "validation_summary.json"), summary.dump(2) + "\n");

  out << "validation: " << val.size() << " records\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %10s %10s %10s %10s %10s %10s\n", "Quantity", "Fx", "Fy", "Fz", "Mx", "My",
                "Mz");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-10s %10.4f %10.4f %10.4f %10.1f %10.1f %10.1f\n", "RMS error", rmse[0], rmse[1],
                rmse[2], rmse[3], rmse[4], rmse[5]);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-10s %10s %10s %10s %10s %10s %10s\n", "Units", "N", "N", "N", "mNm", "mNm", "mNm");
  out << buf;
  out << "overall: " << fixed(force_norm, 4) << " N, " << fixed(torque_norm, 4) << " Nm\n";
  return 0;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  if (o.calibration.empty()) throw Error(ErrorCode::InvalidConfig, "--calibration is required");
  const CalibrationResult cal = calibration_from_json(read_text_file(o.calibration));
  const SensitivityReport s = sensitivity_report(cal.ka());

  // mm for translation (K columns are per mm), rad for rotation
  Vec6 limits;
  limits << 6.0, 6.0, 3.0, 0.2, 0.2, 0.4;
  const Vec6 range = range_estimate(cal.k, limits);
  const Vec6 claim = (Vec6() << 50, 50, 20, 0.2, 0.2, 0.2).finished();
  const char* names[6] = {"Fx", "Fy", "Fz", "Mx", "My", "Mz"};
  const char* units[6] = {"N", "N", "N", "Nm", "Nm", "Nm"};

  ordered_json j = ordered_json::parse(sensitivity_to_json(s));
  ordered_json rj = ordered_json::array();
  for (int i = 0; i < 6; ++i) {
    rj.push_back({{"axis", names[i]},
                  {"deflection_limit", limits[i]},
                  {"limit_units", i < 3 ? "mm" : "rad"},
                  {"range", range[i]},
                  {"units", units[i]},
                  {"reference_claim", claim[i]}});
  }
  j["range"] = rj;
  write_text_file(path_in(out_dir(o), "sensitivity.json"), j.dump(2) + "\n");

  print_sensitivity(out, s);
  out << "axis  limit        range        claim\n";
  for (int i = 0; i < 6; ++i) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-4s  %-5.3g %-4s  %-9.4g %-2s  +-%g %s\n", names[i], limits[i],
                  i < 3 ? "mm" : "rad", range[i], units[i], claim[i], units[i]);
    out << buf;
  }
  return 0;
}

int cmd_parse_log(const Options& o, std::ostream& out) {
  if (o.log.empty()) throw Error(ErrorCode::InvalidConfig, "--log is required");
  ParseOptions popt;
  if (!o.geometry.empty()) popt.sensor_count = load_geometry_config(o.geometry).sensor_count;
  const ParsedLog log = parse_serial_log(read_text_file(o.log), popt);
  const fs::path dir = out_dir(o);

  std::ostringstream samples;
  samples << "timestamp_ms";
  for (int i = 0; i < popt.sensor_count; ++i) samples << ",b" << i << "x,b" << i << "y,b" << i << "z";
  samples << '\n';
  for (const auto& s : log.samples) {
    samples << num(s.timestamp_ms);
    const VecX b = s.stacked();
    for (Eigen::Index k = 0; k < b.size(); ++k) samples << ',' << num(b[k]);
    samples << '\n';
  }
  write_text_file(path_in(dir, "flux_samples.csv"), samples.str());

  out << "parse-log: " << log.report.lines << " lines, " << log.report.bad_lines << " bad, "
      << log.report.frames_parsed << " frames, " << log.report.frames_dropped << " dropped\n";

  if (!o.calibration.empty()) {
    const CalibrationResult cal = calibration_from_json(read_text_file(o.calibration));
    const Estimator e = Estimator::from_calibration(cal, o.window);
    VectorSource src(log.samples);
    const auto wrenches = stream(e, src, popt.chip.sample_period_ms);
    std::size_t gaps = 0;
    write_stream(path_in(dir, "wrench_stream.csv"), [&](std::ostream& s) {
      s << kStreamHeader << '\n';
      for (const auto& w : wrenches) {
        s << format_stream_record(w) << '\n';
        gaps += (w.flags & kFlagGap) != 0;
      }
    });
    out << "stream: " << wrenches.size() << " wrenches (window " << o.window << "), " << gaps << " flagged gaps\n";
  }
  return 0;
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--seed", o.seed, "RNG seed (required for synthetic runs)");
  app->add_option("--noise-ut", o.noise_ut, "Gaussian flux noise sigma, uT")->check(CLI::NonNegativeNumber);
  app->add_flag("--quantize", o.quantize, "Round readings to chip LSBs");
  app->add_option("--window", o.window, "Samples averaged per pose / per streamed wrench")->check(CLI::PositiveNumber);
  app->add_option("--geometry", o.geometry, "Geometry config JSON");
  app->add_option("--out", o.out, "Output directory");
  app->add_option("--dataset", o.dataset, "Calibration dataset CSV");
  app->add_option("--calibration", o.calibration, "Calibration JSON");
  app->add_option("--world", o.world, "Synthetic flux model")->check(CLI::IsMember({"linear", "dipole"}));
  app->add_option("--poses", o.poses, "Number of synthetic poses (default 193 calibrate, 60 validate)");
}

void print_error(std::ostream& err, const std::string& code, const std::string& message,
                 std::optional<std::size_t> record = std::nullopt) {
  ordered_json j;
  j["error"] = code;
  j["message"] = message;
  j["record"] = record ? ordered_json(*record) : ordered_json(nullptr);
  err << j.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Soft six-axis force/torque sensor: synthetic experiments and analysis"};
  app.require_subcommand(1);
  Options o;

  auto* sweep = app.add_subcommand("sweep", "Bench sweep of one sensor/magnet pair and position-map fit");
  auto* calibrate = app.add_subcommand("calibrate", "Fit A and K from a dataset or a synthetic 193-pose run");
  auto* validate = app.add_subcommand("validate", "Per-axis RMSE of a calibration on a 100 g validation set");
  auto* analyze = app.add_subcommand("analyze", "Sensitivity and range report for a calibration");
  auto* parse_log = app.add_subcommand("parse-log", "Parse a serial capture; stream wrenches with --calibration");
  for (auto* sub : {sweep, calibrate, validate, analyze, parse_log}) add_common(sub, o);
  calibrate->add_option("--position-map", o.position_map, "Position map JSON (from sweep)");
  calibrate->add_flag("--subtract-rest", o.subtract_rest, "Fit on flux minus the dataset's rest reading");
  parse_log->add_option("--log", o.log, "Serial capture text file")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    print_error(err, "UsageError", e.what());
    return e.get_exit_code() ? e.get_exit_code() : 2;
  }

  try {
    if (*sweep) return cmd_sweep(o, out);
    if (*calibrate) return cmd_calibrate(o, out);
    if (*validate) return cmd_validate(o, out);
    if (*analyze) return cmd_analyze(o, out);
    return cmd_parse_log(o, out);
  } catch (const Error& e) {
    print_error(err, std::string(to_string(e.code())), e.detail(), e.record());
    return 3;
  } catch (const std::exception& e) {
    print_error(err, "Internal", e.what());
    return 4;
  }
}

}  // namespace softft::cli
