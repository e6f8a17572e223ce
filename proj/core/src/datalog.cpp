#include "softft/datalog.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace softft {

namespace {

using nlohmann::ordered_json;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

bool looks_integer(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

// U+2212 MINUS SIGN is normalised to '-'.
std::string normalise_minus(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 && static_cast<unsigned char>(s[i + 1]) == 0x88 &&
        static_cast<unsigned char>(s[i + 2]) == 0x92) {
      out.push_back('-');
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

struct SerialLine {
  std::optional<double> timestamp_ms;
  int sensor = -1;
  Vec3 flux = Vec3::Zero();
};

std::optional<SerialLine> parse_serial_line(std::string_view raw, const ParseOptions& opt) {
  const std::string norm = normalise_minus(raw);
  std::string_view s = trim(norm);
  SerialLine line;

  if (s.size() >= 2 && s[0] == 't' && s[1] == '=') {
    std::size_t end = 2;
    while (end < s.size() && !is_space(s[end])) ++end;
    line.timestamp_ms = parse_double(s.substr(2, end - 2));
    if (!line.timestamp_ms) return std::nullopt;
    s = trim(s.substr(end));
  }

  if (s.empty() || s[0] != 'S') return std::nullopt;
  s.remove_prefix(1);
  std::size_t digits = 0;
  while (digits < s.size() && s[digits] >= '0' && s[digits] <= '9') ++digits;
  if (digits == 0 || digits > 4) return std::nullopt;
  const auto index = parse_int(s.substr(0, digits));
  if (!index || *index < 0 || *index >= opt.sensor_count) return std::nullopt;
  line.sensor = static_cast<int>(*index);
  s = trim(s.substr(digits));
  if (!s.empty() && s[0] == ':') s = trim(s.substr(1));

  const auto tokens = split_ws(s);
  if (tokens.size() != 3) return std::nullopt;
  bool all_integer = true;
  for (int k = 0; k < 3; ++k) {
    const auto v = parse_double(tokens[static_cast<std::size_t>(k)]);
    if (!v) return std::nullopt;
    line.flux[k] = *v;
    all_integer = all_integer && looks_integer(tokens[static_cast<std::size_t>(k)]);
  }
  const bool lsb = opt.units == FluxUnits::Lsb || (opt.units == FluxUnits::Auto && all_integer);
  if (lsb) line.flux = line.flux.cwiseProduct(opt.chip.resolution_ut);
  return line;
}

}  // namespace

ParsedLog parse_serial_log_lenient(std::string_view text, const ParseOptions& options) {
  ParsedLog out;
  const int n = std::max(options.sensor_count, 1);

  struct Frame {
    std::vector<Vec3> flux;
    std::optional<double> timestamp_ms;
    bool valid = true;
  };
  std::optional<Frame> frame;
  std::optional<double> last_emitted;

  const auto drop = [&] {
    if (frame) {
      ++out.report.frames_dropped;
      frame.reset();
    }
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (trim(raw).empty()) continue;
    ++out.report.lines;

    const auto line = parse_serial_line(raw, options);
    if (!line) {
      ++out.report.bad_lines;
      if (frame) frame->valid = false;
      continue;
    }

    if (line->sensor == 0) {
      drop();
      frame.emplace();
    } else if (!frame) {
      frame.emplace();
      frame->valid = false;  // started mid-frame
    }
    if (static_cast<std::size_t>(line->sensor) != frame->flux.size()) frame->valid = false;
    frame->flux.push_back(line->flux);
    if (line->timestamp_ms) frame->timestamp_ms = line->timestamp_ms;

    if (line->sensor != n - 1 && frame->flux.size() < static_cast<std::size_t>(n)) continue;
    if (!frame->valid || frame->flux.size() != static_cast<std::size_t>(n)) {
      drop();
      continue;
    }
    const double ts = frame->timestamp_ms.value_or(static_cast<double>(out.report.frames_parsed) *
                                                   options.chip.sample_period_ms);
    if (last_emitted && ts < *last_emitted) {
      drop();
      continue;
    }
    FluxSample sample;
    sample.flux = std::move(frame->flux);
    sample.timestamp_ms = ts;
    out.samples.push_back(std::move(sample));
    ++out.report.frames_parsed;
    last_emitted = ts;
    frame.reset();
  }
  drop();  // partial trailing frame
  return out;
}

ParsedLog parse_serial_log(std::string_view text, const ParseOptions& options) {
  ParsedLog out = parse_serial_log_lenient(text, options);
  if (out.samples.empty()) throw Error(ErrorCode::EmptyLog, "no complete frame in serial log");
  return out;
}

FluxSample average_frames(std::span<const FluxSample> samples, std::size_t n) {
  if (n == 0 || samples.size() < n) {
    throw Error(ErrorCode::InsufficientSamples,
                "need " + std::to_string(n) + " samples, have " + std::to_string(samples.size()));
  }
  const std::size_t sensors = samples.front().size();
  FluxSample mean;
  mean.flux.assign(sensors, Vec3::Zero());
  for (std::size_t k = 0; k < n; ++k) {
    if (samples[k].size() != sensors) throw Error(ErrorCode::InvalidInput, "samples differ in sensor count");
    for (std::size_t i = 0; i < sensors; ++i) mean.flux[i] += samples[k].flux[i];
  }
  for (auto& b : mean.flux) b /= static_cast<double>(n);
  mean.timestamp_ms = samples[n - 1].timestamp_ms;
  return mean;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr std::size_t kFixedColumns = 16;  // 12 pose + mass + 3 lever

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t c = s.find(',', start);
    out.push_back(trim(s.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start)));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return out;
}

std::vector<std::string> dataset_header(std::size_t sensors) {
  std::vector<std::string> h;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) h.push_back("T" + std::to_string(r) + std::to_string(c));
  }
  h.insert(h.end(), {"mass_g", "lever_x_mm", "lever_y_mm", "lever_z_mm"});
  for (std::size_t i = 0; i < sensors; ++i) {
    for (char axis : {'x', 'y', 'z'}) h.push_back("b" + std::to_string(i) + axis);
  }
  return h;
}

double field(std::string_view s, std::size_t line) {
  const auto v = parse_double(s);
  if (!v) throw Error(ErrorCode::MalformedRow, "bad number '" + std::string(s) + "'", line);
  return *v;
}

}  // namespace

void write_dataset(std::ostream& out, const CalibrationDataset& ds) {
  validate(ds);
  std::size_t sensors = 8;
  if (!ds.records.empty()) sensors = static_cast<std::size_t>(ds.records.front().flux.size() / 3);
  else if (ds.rest_flux) sensors = static_cast<std::size_t>(ds.rest_flux->size() / 3);

  if (ds.rest_flux) {
    out << "#rest_flux";
    for (Eigen::Index i = 0; i < ds.rest_flux->size(); ++i) out << ',' << fmt17((*ds.rest_flux)(i));
    out << '\n';
  }
  const auto header = dataset_header(sensors);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';

  for (const auto& r : ds.records) {
    const Eigen::Matrix4d m = r.flange_pose.matrix();
    std::string row;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 4; ++j) row += fmt17(m(i, j)) + ',';
    }
    row += fmt17(r.mass_g);
    for (int k = 0; k < 3; ++k) row += ',' + fmt17(r.lever_mm[k]);
    for (Eigen::Index k = 0; k < r.flux.size(); ++k) row += ',' + fmt17(r.flux(k));
    out << row << '\n';
  }
}

CalibrationDataset read_dataset(std::istream& in) {
  CalibrationDataset ds;
  std::string text;
  std::size_t line_no = 0;
  std::optional<std::size_t> columns;

  while (std::getline(in, text)) {
    ++line_no;
    const std::string_view line = trim(text);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.starts_with("#rest_flux")) {
        auto parts = split_commas(line);
        VecX rest(static_cast<Eigen::Index>(parts.size() - 1));
        for (std::size_t k = 1; k < parts.size(); ++k) rest(static_cast<Eigen::Index>(k - 1)) = field(parts[k], line_no);
        ds.rest_flux = rest;
      }
      continue;
    }
    const auto parts = split_commas(line);
    if (!columns) {
      if (parts.size() <= kFixedColumns || (parts.size() - kFixedColumns) % 3 != 0) {
        throw Error(ErrorCode::SchemaMismatch,
                    "dataset header has " + std::to_string(parts.size()) + " columns; expected 16 + 3 per sensor",
                    line_no);
      }
      const auto expected = dataset_header((parts.size() - kFixedColumns) / 3);
      for (std::size_t k = 0; k < parts.size(); ++k) {
        if (parts[k] != expected[k]) {
          throw Error(ErrorCode::SchemaMismatch, "unexpected column '" + std::string(parts[k]) + "'", line_no);
        }
      }
      columns = parts.size();
      continue;
    }
    if (parts.size() != *columns) {
      throw Error(ErrorCode::SchemaMismatch,
                  "row has " + std::to_string(parts.size()) + " columns, header has " + std::to_string(*columns),
                  line_no);
    }
    CalibrationRecord r;
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 4; ++j) m(i, j) = field(parts[static_cast<std::size_t>(4 * i + j)], line_no);
    }
    r.flange_pose = Transform::from_matrix(m);
    r.mass_g = field(parts[12], line_no);
    for (int k = 0; k < 3; ++k) r.lever_mm[k] = field(parts[static_cast<std::size_t>(13 + k)], line_no);
    r.flux.resize(static_cast<Eigen::Index>(*columns - kFixedColumns));
    for (std::size_t k = kFixedColumns; k < *columns; ++k) {
      r.flux(static_cast<Eigen::Index>(k - kFixedColumns)) = field(parts[k], line_no);
    }
    if (!(r.mass_g > 0.0)) throw Error(ErrorCode::MalformedRow, "mass must be positive", line_no);
    ds.records.push_back(std::move(r));
  }
  if (!columns) throw Error(ErrorCode::SchemaMismatch, "dataset has no header");
  return ds;
}

void write_dataset(const std::string& path, const CalibrationDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write dataset: " + path);
  write_dataset(out, ds);
}

CalibrationDataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open dataset: " + path);
  return read_dataset(in);
}

void write_sweep(std::ostream& out, std::span<const SweepPoint> sweep) {
  out << "axis,commanded_mm,bx_uT,by_uT,bz_uT\n";
  for (const auto& p : sweep) {
    out << "xyz"[static_cast<int>(p.axis)] << ',' << fmt17(p.commanded_mm) << ',' << fmt17(p.flux_ut.x()) << ','
        << fmt17(p.flux_ut.y()) << ',' << fmt17(p.flux_ut.z()) << '\n';
  }
}

std::vector<SweepPoint> read_sweep(std::istream& in) {
  std::vector<SweepPoint> out;
  std::string text;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, text)) {
    ++line_no;
    const std::string_view line = trim(text);
    if (line.empty() || line.front() == '#') continue;
    const auto parts = split_commas(line);
    if (parts.size() != 5) throw Error(ErrorCode::SchemaMismatch, "sweep rows need 5 columns", line_no);
    if (!header) {
      if (parts[0] != "axis") throw Error(ErrorCode::SchemaMismatch, "missing sweep header", line_no);
      header = true;
      continue;
    }
    SweepPoint p;
    if (parts[0] == "x") p.axis = SweepAxis::X;
    else if (parts[0] == "y") p.axis = SweepAxis::Y;
    else if (parts[0] == "z") p.axis = SweepAxis::Z;
    else throw Error(ErrorCode::MalformedRow, "axis must be x, y or z", line_no);
    p.commanded_mm = field(parts[1], line_no);
    for (int k = 0; k < 3; ++k) p.flux_ut[k] = field(parts[static_cast<std::size_t>(2 + k)], line_no);
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ordered_json matrix_json(const MatX& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = data;
  return j;
}

MatX matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    throw Error(ErrorCode::SchemaMismatch, "matrix data length does not match its shape");
  }
  MatX m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

std::vector<double> to_vec(const VecX& v) { return {v.data(), v.data() + v.size()}; }

VecX from_vec(const std::vector<double>& v) {
  return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ordered_json block_json(const BlockSensitivity& b, const char* units) {
  ordered_json j;
  j["sigma_max"] = b.sigma_max;
  j["sigma_min"] = b.sigma_min;
  j["isotropy"] = b.isotropy;
  j["units"] = units;
  return j;
}

ordered_json sensitivity_json(const SensitivityReport& r) {
  ordered_json j;
  j["force"] = block_json(r.force, "N/uT");
  j["torque"] = block_json(r.torque, "Nm/uT");
  j["sigma_max"] = r.sigma_max;
  j["tip_sigma_max"] = r.tip_sigma_max ? ordered_json(*r.tip_sigma_max) : ordered_json(nullptr);
  return j;
}

BlockSensitivity block_from_json(const nlohmann::json& j) {
  return {j.at("sigma_max").get<double>(), j.at("sigma_min").get<double>(), j.at("isotropy").get<double>()};
}

double number_or_inf(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

ordered_json map_json(const PositionMap& m) {
  ordered_json j;
  j["slope"] = std::vector<double>{m.slope.x(), m.slope.y(), m.slope.z()};
  j["offset"] = std::vector<double>{m.offset.x(), m.offset.y(), m.offset.z()};
  return j;
}

PositionMap map_from_json(const nlohmann::json& j) {
  const auto s = j.at("slope").get<std::vector<double>>();
  const auto o = j.at("offset").get<std::vector<double>>();
  if (s.size() != 3 || o.size() != 3) throw Error(ErrorCode::SchemaMismatch, "position map needs 3 slopes and offsets");
  return {{s[0], s[1], s[2]}, {o[0], o[1], o[2]}};
}

}  // namespace

std::string position_map_to_json(const PositionMapFit& fit) {
  ordered_json j = map_json(fit.map);
  j["r_squared"] = std::vector<double>{fit.r_squared.x(), fit.r_squared.y(), fit.r_squared.z()};
  return j.dump(2) + "\n";
}

PositionMap position_map_from_json(const std::string& text) {
  try {
    return map_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("position map json: ") + e.what());
  }
}

std::string sensitivity_to_json(const SensitivityReport& r) { return sensitivity_json(r).dump(2) + "\n"; }

std::string calibration_to_json(const CalibrationResult& r) {
  ordered_json j;
  j["format"] = "softft-calibration/1";
  j["records"] = r.records;
  j["A"] = matrix_json(r.a);
  j["K"] = matrix_json(r.k);
  j["position_map"] = map_json(r.position_map);
  j["flux_bias"] = r.flux_bias ? ordered_json(to_vec(*r.flux_bias)) : ordered_json(nullptr);
  ordered_json d;
  d["residual_rms"] = to_vec(r.residual_rms);
  d["residual_units"] = {"N", "N", "N", "Nm", "Nm", "Nm"};
  d["twist_residual"] = r.twist_residual;
  d["condition_B"] = r.condition_b;
  d["condition_AB"] = r.condition_ab;
  d["B_rank_deficient"] = r.b_rank_deficient;
  j["diagnostics"] = d;
  j["sensitivity"] = sensitivity_json(r.sensitivity);
  return j.dump(2) + "\n";
}

CalibrationResult calibration_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    CalibrationResult r;
    r.records = j.at("records").get<std::size_t>();
    r.a = matrix_from_json(j.at("A"));
    const MatX k = matrix_from_json(j.at("K"));
    if (k.rows() != 6 || k.cols() != 6 || r.a.rows() != 6) {
      throw Error(ErrorCode::SchemaMismatch, "K must be 6x6 and A must have 6 rows");
    }
    r.k = k;
    r.position_map = map_from_json(j.at("position_map"));
    if (!j.at("flux_bias").is_null()) r.flux_bias = from_vec(j.at("flux_bias").get<std::vector<double>>());
    const auto& d = j.at("diagnostics");
    const auto rms = d.at("residual_rms").get<std::vector<double>>();
    if (rms.size() != 6) throw Error(ErrorCode::SchemaMismatch, "residual_rms needs 6 entries");
    r.residual_rms = Eigen::Map<const Vec6>(rms.data());
    r.twist_residual = d.at("twist_residual").get<double>();
    r.condition_b = number_or_inf(d.at("condition_B"));
    r.condition_ab = number_or_inf(d.at("condition_AB"));
    r.b_rank_deficient = d.at("B_rank_deficient").get<bool>();
    const auto& s = j.at("sensitivity");
    r.sensitivity.force = block_from_json(s.at("force"));
    r.sensitivity.torque = block_from_json(s.at("torque"));
    r.sensitivity.sigma_max = s.at("sigma_max").get<double>();
    if (!s.at("tip_sigma_max").is_null()) r.sensitivity.tip_sigma_max = s.at("tip_sigma_max").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("calibration json: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
}

}  // namespace softft
