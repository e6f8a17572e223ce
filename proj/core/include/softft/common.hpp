#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace softft {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Length unit used for poses and twists is the millimetre; wrenches use N and Nm.
inline constexpr double kMmToM = 1e-3;
inline constexpr double kGravity = 9.81;  // m/s^2

enum class ErrorCode {
  InvalidInput,
  InvalidConfig,
  AngleAtPi,
  SingularField,
  DegenerateSweep,
  DegenerateConfiguration,
  RankDeficient,
  GapDetected,
  EmptyLog,
  InsufficientSamples,
  MalformedRow,
  SchemaMismatch,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every fatal condition raised by the library. `record()` is set when the
// failure happened while processing a specific dataset record or file line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> record = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> record() const noexcept { return record_; }
  const std::string& detail() const noexcept { return detail_; }

  Error with_record(std::size_t index) const;

 private:
  ErrorCode code_;
  std::optional<std::size_t> record_;
  std::string detail_;
};

}  // namespace softft
