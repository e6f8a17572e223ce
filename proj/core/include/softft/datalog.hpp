#pragma once

#include "softft/calibration.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace softft {

/**
 * Serial capture grammar, one sensor per line:
 *
 *     [t=<ms>] S<i>: <bx> <by> <bz>
 *
 * Whitespace-tolerant; the colon is optional. A frame is S0..S(n-1) in order.
 * A frame that is interrupted (bad line, wrong index, new S0, end of input)
 * is dropped. Integers are LSB counts and decimals are uT unless overridden.
 */
enum class FluxUnits { Auto, Lsb, Microtesla };

struct ParseOptions {
  int sensor_count = 8;
  ChipModel chip;
  FluxUnits units = FluxUnits::Auto;
};

struct ParseReport {
  std::size_t lines = 0;
  std::size_t bad_lines = 0;
  std::size_t frames_parsed = 0;
  std::size_t frames_dropped = 0;
};

struct ParsedLog {
  std::vector<FluxSample> samples;
  ParseReport report;
};

/// Total over arbitrary bytes. Frames without timestamps are stamped frame_index * sample period.
ParsedLog parse_serial_log_lenient(std::string_view text, const ParseOptions& options = {});

/// As above; throws EmptyLog when no complete frame was found.
ParsedLog parse_serial_log(std::string_view text, const ParseOptions& options = {});

/// Per-sensor mean over the first n samples; timestamp of the last one. Throws InsufficientSamples.
FluxSample average_frames(std::span<const FluxSample> samples, std::size_t n);

/// Dataset CSV: T00..T23 (row-major 3x4 pose), mass_g, lever xyz (mm), b0x..b(n-1)z (uT).
void write_dataset(std::ostream& out, const CalibrationDataset& ds);
CalibrationDataset read_dataset(std::istream& in);
void write_dataset(const std::string& path, const CalibrationDataset& ds);
CalibrationDataset read_dataset(const std::string& path);

/// Sweep CSV: axis, commanded_mm, bx_uT, by_uT, bz_uT.
void write_sweep(std::ostream& out, std::span<const SweepPoint> sweep);
std::vector<SweepPoint> read_sweep(std::istream& in);

std::string position_map_to_json(const PositionMapFit& fit);
PositionMap position_map_from_json(const std::string& text);

std::string sensitivity_to_json(const SensitivityReport& r);
std::string calibration_to_json(const CalibrationResult& r);
CalibrationResult calibration_from_json(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace softft
